#include "semopt/checkpoint.hpp"

#include <algorithm>
#include <limits>
#include <sstream>

#include "semopt/error.hpp"

namespace semopt {

const char* to_string(ActionKind k) {
  switch (k) {
    case ActionKind::Store: return "store";
    case ActionKind::Restore: return "restore";
    case ActionKind::Advance: return "advance";
    case ActionKind::AdjointStep: return "adjoint";
    case ActionKind::Done: return "done";
  }
  return "?";
}

bool operator==(const Action& a, const Action& b) {
  return a.kind == b.kind && a.slot == b.slot && a.from == b.from && a.to == b.to;
}

namespace {

constexpr std::int64_t kSaturated = std::numeric_limits<std::int64_t>::max() / 4;

// C(c + r, c), saturating.
std::int64_t beta(int c, std::int64_t r) {
  if (r < 0) return 0;
  std::int64_t b = 1;
  for (std::int64_t i = 1; i <= r; ++i) {
    if (b > kSaturated / (c + i)) return kSaturated;
    b = b * (c + i) / i;
  }
  return b;
}

class BinomialPlanner {
 public:
  BinomialPlanner(int m, int s) : m_(m), s_(s) {}

  std::vector<Action> run() {
    actions_.push_back(Action::store(0, 0));
    reverse(0, m_, s_);
    actions_.push_back(Action::done());
    return std::move(actions_);
  }

 private:
  // Working state is at `start`, which is also held in slot s - c.
  void reverse(int start, int end, int c) {
    const int l = end - start;
    if (l == 1) {
      if (end == m_) actions_.push_back(Action::advance(start, end));
      actions_.push_back(Action::adjoint(start));
      return;
    }
    const int slot = s_ - c;
    if (c == 1) {
      for (int j = l - 1; j >= 0; --j) {
        if (j != l - 1) actions_.push_back(Action::restore(slot, start));
        if (j == l - 1 && end == m_) {
          actions_.push_back(Action::advance(start, end));
        } else if (j > 0) {
          actions_.push_back(Action::advance(start, start + j));
        }
        actions_.push_back(Action::adjoint(start + j));
      }
      return;
    }
    int best_k = 1;
    std::int64_t best = std::numeric_limits<std::int64_t>::max();
    for (int k = 1; k < l; ++k) {
      const std::int64_t cost = k + reversal_cost(l - k, c - 1) + reversal_cost(k, c);
      if (cost < best) {
        best = cost;
        best_k = k;
      }
    }
    const int mid = start + best_k;
    actions_.push_back(Action::advance(start, mid));
    actions_.push_back(Action::store(slot + 1, mid));
    reverse(mid, end, c - 1);
    actions_.push_back(Action::restore(slot, start));
    reverse(start, mid, c);
  }

  int m_;
  int s_;
  std::vector<Action> actions_;
};

class Validator {
 public:
  explicit Validator(const Schedule& s) : sched_(s), slots_(static_cast<std::size_t>(s.s), -1) {}

  ReplayTrace run(ScheduleHandler* handler) {
    ReplayTrace trace;
    int working = 0;
    bool terminal = false;
    int expected = sched_.m - 1;
    const auto& acts = sched_.actions;
    bool done = false;
    for (std::size_t i = 0; i < acts.size(); ++i) {
      const Action& a = acts[i];
      index_ = i;
      check(!done, "action after done");
      switch (a.kind) {
        case ActionKind::Store: {
          check(a.slot >= 0 && a.slot < sched_.s, "slot out of range");
          check(working >= 0 && working == a.from, "stored step is not the working state");
          if (handler) handler->store(a.slot, a.from);
          slots_[a.slot] = a.from;
          const int live = static_cast<int>(std::count_if(slots_.begin(), slots_.end(), [](int v) { return v >= 0; }));
          trace.high_water = std::max(trace.high_water, live);
          break;
        }
        case ActionKind::Restore:
          check(a.slot >= 0 && a.slot < sched_.s, "slot out of range");
          check(slots_[a.slot] == a.from, "restored slot does not hold the requested step");
          if (handler) handler->restore(a.slot, a.from);
          working = a.from;
          break;
        case ActionKind::Advance: {
          check(working == a.from, "advance does not start at the working state");
          check(a.to > a.from && a.to <= sched_.m, "invalid advance range");
          const bool final_step = a.to == sched_.m;
          if (handler) handler->advance(a.from, a.to, final_step);
          trace.forward_steps += a.to - a.from;
          if (final_step) {
            terminal = true;
            working = sched_.m - 1;
          } else {
            working = a.to;
          }
          break;
        }
        case ActionKind::AdjointStep:
          check(terminal, "adjoint step before the final state was reached");
          check(a.from == expected, "adjoint steps out of order");
          check(working == a.from, "forward state for the adjoint step is not available");
          if (handler) handler->adjoint_step(a.from);
          --expected;
          ++trace.adjoint_steps;
          break;
        case ActionKind::Done:
          check(expected == -1, "schedule ends before every adjoint step ran");
          done = true;
          break;
      }
    }
    index_ = acts.size();
    check(done, "schedule does not end with done");
    return trace;
  }

 private:
  void check(bool ok, const char* what) const {
    if (!ok) throw ScheduleError(what, index_);
  }

  const Schedule& sched_;
  std::vector<int> slots_;
  std::size_t index_ = 0;
};

void finalize(Schedule& s) { s.recomputed = replay(s).forward_steps - s.m; }

}  // namespace

std::int64_t reversal_cost(std::int64_t l, int c) {
  require(l >= 1 && c >= 1, "reversal_cost needs l >= 1 and c >= 1");
  std::int64_t r = 0;
  while (beta(c, r) < l) ++r;
  const std::int64_t b = beta(c + 1, r - 1);
  return r * l - b;
}

Schedule plan_store_all(int m) {
  require(m >= 1, "schedule needs at least one step");
  Schedule s;
  s.m = m;
  s.s = m;
  for (int n = 0; n < m; ++n) {
    s.actions.push_back(Action::store(n, n));
    s.actions.push_back(Action::advance(n, n + 1));
  }
  for (int n = m - 1; n >= 0; --n) {
    if (n != m - 1) s.actions.push_back(Action::restore(n, n));
    s.actions.push_back(Action::adjoint(n));
  }
  s.actions.push_back(Action::done());
  finalize(s);
  return s;
}

Schedule plan_binomial(int m, int s) {
  require(m >= 1, "schedule needs at least one step");
  if (s < 1) fail(ErrorKind::UnsupportedConfiguration, "binomial checkpointing needs at least one slot");
  if (m <= s) {
    Schedule all = plan_store_all(m);
    all.s = s;
    return all;
  }
  Schedule sched;
  sched.m = m;
  sched.s = s;
  sched.actions = BinomialPlanner(m, s).run();
  finalize(sched);
  return sched;
}

ReplayTrace replay(const Schedule& schedule, ScheduleHandler* handler) {
  require(schedule.m >= 1 && schedule.s >= 1, "schedule has no steps or no slots");
  return Validator(schedule).run(handler);
}

std::int64_t simulate_schedule(const Schedule& schedule) { return replay(schedule).forward_steps; }

std::string schedule_csv(const Schedule& schedule) {
  std::ostringstream out;
  out << "index,action,slot,from,to\n";
  for (std::size_t i = 0; i < schedule.actions.size(); ++i) {
    const Action& a = schedule.actions[i];
    out << i << ',' << to_string(a.kind) << ',' << a.slot << ',' << a.from << ',' << a.to << '\n';
  }
  return out.str();
}

}  // namespace semopt
