#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <random>
#include <sstream>

#include "semopt/checkpoint.hpp"
#include "semopt/error.hpp"

using namespace semopt;

namespace {

// Fewest forward evaluations that make the states start+l-1, ..., start
// available in that order, given `start` held in one of c slots. The
// working state is free; storing a state costs a slot for the rest of the
// segment.
class ReversalOracle {
 public:
  std::int64_t cost(int l, int c) {
    if (l <= 1) return 0;
    if (c <= 1) return static_cast<std::int64_t>(l) * (l - 1) / 2;
    auto it = memo_.find({l, c});
    if (it != memo_.end()) return it->second;
    std::int64_t best = cost(l, 1);
    for (int k = 1; k < l; ++k) best = std::min(best, k + cost(l - k, c - 1) + cost(k, c));
    memo_[{l, c}] = best;
    return best;
  }
  // Reaching the final state costs one more evaluation beyond the reversal.
  std::int64_t recomputed(int m, int s) { return cost(m, s) + 1 - m; }

 private:
  std::map<std::pair<int, int>, std::int64_t> memo_;
};

class Recorder final : public ScheduleHandler {
 public:
  void store(int slot, int step) override { log.push_back(Action::store(slot, step)); }
  void restore(int slot, int step) override { log.push_back(Action::restore(slot, step)); }
  void advance(int from, int to, bool final_step) override {
    log.push_back(Action::advance(from, to));
    if (final_step) ++finals;
  }
  void adjoint_step(int step) override { adjoints.push_back(step); }
  std::vector<Action> log;
  std::vector<int> adjoints;
  int finals = 0;
};

bool rejected(const Schedule& s, std::size_t* index = nullptr) {
  try {
    replay(s);
  } catch (const ScheduleError& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ScheduleInvalid);
    if (index) *index = e.action_index();
    return true;
  }
  return false;
}

}  // namespace

TEST(StoreAll, ThreeSteps) {
  const Schedule s = plan_store_all(3);
  EXPECT_EQ(s.recomputed, 0);
  std::vector<int> stored;
  std::vector<int> adj;
  for (const Action& a : s.actions) {
    if (a.kind == ActionKind::Store) stored.push_back(a.from);
    if (a.kind == ActionKind::AdjointStep) adj.push_back(a.from);
  }
  EXPECT_EQ(stored, (std::vector<int>{0, 1, 2}));
  EXPECT_EQ(adj, (std::vector<int>{2, 1, 0}));
  EXPECT_EQ(s.actions.back().kind, ActionKind::Done);
}

TEST(StoreAll, SingleStep) {
  const Schedule s = plan_store_all(1);
  const auto stores = std::count_if(s.actions.begin(), s.actions.end(),
                                    [](const Action& a) { return a.kind == ActionKind::Store; });
  const auto adjoints = std::count_if(s.actions.begin(), s.actions.end(),
                                      [](const Action& a) { return a.kind == ActionKind::AdjointStep; });
  EXPECT_EQ(stores, 1);
  EXPECT_EQ(adjoints, 1);
}

TEST(StoreAll, NeverRecomputes) {
  for (int m = 1; m <= 40; ++m) {
    const Schedule s = plan_store_all(m);
    EXPECT_EQ(s.recomputed, 0);
    EXPECT_EQ(simulate_schedule(s), m);
  }
}

TEST(Binomial, SmallProblemsEqualStoreAll) {
  for (int m = 1; m <= 6; ++m) {
    for (int s = m; s <= 8; ++s) {
      const Schedule b = plan_binomial(m, s);
      EXPECT_EQ(b.actions, plan_store_all(m).actions);
      EXPECT_EQ(b.recomputed, 0);
    }
  }
}

TEST(Binomial, TenStepsThreeSlots) {
  ReversalOracle oracle;
  const Schedule s = plan_binomial(10, 3);
  EXPECT_EQ(s.recomputed, oracle.recomputed(10, 3));
  EXPECT_EQ(s.recomputed, 6);
  EXPECT_EQ(simulate_schedule(s), 10 + s.recomputed);
  EXPECT_LE(replay(s).high_water, 3);
}

TEST(Binomial, HundredStepsTenSlots) {
  ReversalOracle oracle;
  const Schedule s = plan_binomial(100, 10);
  EXPECT_EQ(s.recomputed, oracle.recomputed(100, 10));
  const ReplayTrace t = replay(s);
  EXPECT_LE(t.high_water, 10);
  EXPECT_EQ(t.adjoint_steps, 100);
}

TEST(Binomial, MatchesOracleExhaustively) {
  ReversalOracle oracle;
  for (int m = 1; m <= 30; ++m) {
    for (int s = 1; s <= 5; ++s) {
      const Schedule sched = plan_binomial(m, s);
      EXPECT_EQ(sched.recomputed, oracle.recomputed(m, s)) << "m=" << m << " s=" << s;
      EXPECT_EQ(simulate_schedule(sched), m + sched.recomputed);
    }
  }
}

TEST(Binomial, ClosedFormCostMatchesOracle) {
  ReversalOracle oracle;
  for (int l = 1; l <= 150; ++l)
    for (int c = 1; c <= 9; ++c) EXPECT_EQ(reversal_cost(l, c), oracle.cost(l, c)) << l << "," << c;
}

TEST(Binomial, RandomizedHighWaterAndAdjointOrder) {
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<int> steps(1, 400);
  std::uniform_int_distribution<int> slots(1, 25);
  for (int t = 0; t < 1000; ++t) {
    const int m = steps(rng);
    const int s = slots(rng);
    const Schedule sched = plan_binomial(m, s);
    Recorder rec;
    const ReplayTrace trace = replay(sched, &rec);
    EXPECT_LE(trace.high_water, s);
    ASSERT_EQ(static_cast<int>(rec.adjoints.size()), m);
    for (int i = 0; i < m; ++i) EXPECT_EQ(rec.adjoints[i], m - 1 - i);
    EXPECT_EQ(rec.finals, 1);
  }
}

TEST(Binomial, ZeroSlotsIsUnsupported) {
  try {
    plan_binomial(10, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::UnsupportedConfiguration);
  }
}

TEST(Replay, HandlerSeesActionsInOrder) {
  const Schedule s = plan_binomial(12, 3);
  Recorder rec;
  replay(s, &rec);
  std::vector<Action> expected;
  for (const Action& a : s.actions) {
    if (a.kind == ActionKind::Store || a.kind == ActionKind::Restore || a.kind == ActionKind::Advance) {
      expected.push_back(a);
    }
  }
  EXPECT_EQ(rec.log, expected);
}

TEST(Replay, ShuffledSchedulesAreRejected) {
  std::mt19937_64 rng(23);
  for (int t = 0; t < 200; ++t) {
    Schedule s = plan_binomial(20, 4);
    std::shuffle(s.actions.begin(), s.actions.end(), rng);
    EXPECT_TRUE(rejected(s));
  }
}

TEST(Replay, TargetedViolationsReportTheirIndex) {
  const Schedule good = plan_binomial(8, 3);
  ASSERT_FALSE(rejected(good));
  auto find = [&](ActionKind k) {
    return static_cast<std::size_t>(std::find_if(good.actions.begin(), good.actions.end(),
                                                 [&](const Action& a) { return a.kind == k; }) -
                                    good.actions.begin());
  };
  {
    Schedule s = good;
    const std::size_t i = find(ActionKind::Restore);
    s.actions[i].from += 1;
    std::size_t at = 0;
    EXPECT_TRUE(rejected(s, &at));
    EXPECT_EQ(at, i);
  }
  {
    Schedule s = good;
    const std::size_t i = find(ActionKind::Store);
    s.actions[i].slot = 3;
    std::size_t at = 0;
    EXPECT_TRUE(rejected(s, &at));
    EXPECT_EQ(at, i);
  }
  {
    Schedule s = good;
    const std::size_t i = find(ActionKind::AdjointStep);
    s.actions.insert(s.actions.begin() + static_cast<std::ptrdiff_t>(i), Action::adjoint(3));
    std::size_t at = 0;
    EXPECT_TRUE(rejected(s, &at));
    EXPECT_EQ(at, i);
  }
  {
    Schedule s = good;
    s.actions.pop_back();
    std::size_t at = 0;
    EXPECT_TRUE(rejected(s, &at));
    EXPECT_EQ(at, s.actions.size());
  }
  {
    Schedule s = good;
    const std::size_t i = find(ActionKind::Advance);
    s.actions[i].from += 1;
    std::size_t at = 0;
    EXPECT_TRUE(rejected(s, &at));
    EXPECT_EQ(at, i);
  }
}

TEST(ScheduleCsv, HasHeaderAndOneRowPerAction) {
  const Schedule s = plan_binomial(5, 2);
  std::istringstream in(schedule_csv(s));
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "index,action,slot,from,to");
  std::size_t rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, s.actions.size());
  EXPECT_NE(schedule_csv(s).find("0,store,0,0,0"), std::string::npos);
}
