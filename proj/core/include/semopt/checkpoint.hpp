#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace semopt {

enum class ActionKind { Store, Restore, Advance, AdjointStep, Done };

const char* to_string(ActionKind k);

/// One instruction of a reversal schedule.
///
/// Store(slot, step)   copy the working state (at `step`) into `slot`
/// Restore(slot, step) copy `slot` (holding `step`) into the working state
/// Advance(from, to)   step the working state forward from `from` to `to`;
///                     when `to` is the final step, the final state goes to a
///                     separate terminal buffer and the working state stays at
///                     to - 1
/// AdjointStep(step)   run the backward step from step+1 to step, which needs
///                     the working state at `step`
/// Done                end of schedule
struct Action {
  ActionKind kind = ActionKind::Done;
  int slot = -1;
  int from = 0;  // step for Store/Restore/AdjointStep, start for Advance
  int to = 0;    // end for Advance

  static Action store(int slot, int step) { return {ActionKind::Store, slot, step, step}; }
  static Action restore(int slot, int step) { return {ActionKind::Restore, slot, step, step}; }
  static Action advance(int from, int to) { return {ActionKind::Advance, -1, from, to}; }
  static Action adjoint(int step) { return {ActionKind::AdjointStep, -1, step, step}; }
  static Action done() { return {ActionKind::Done, -1, 0, 0}; }
};

bool operator==(const Action& a, const Action& b);

struct Schedule {
  int m = 0;  // forward steps
  int s = 0;  // snapshot slots
  std::vector<Action> actions;
  /// Forward step evaluations performed by the schedule beyond the m needed
  /// for a single forward pass.
  std::int64_t recomputed = 0;
};

/// Keeps every state 0..m-1 in its own slot (s = m); no recomputation.
Schedule plan_store_all(int m);

/// Binomial reversal schedule with minimal recomputation for s slots.
Schedule plan_binomial(int m, int s);

/// Minimal number of forward steps needed to reverse l steps starting from a
/// stored state with c slots (that state's slot included), when reaching the
/// final state is not counted. Binomial closed form.
std::int64_t reversal_cost(std::int64_t l, int c);

/// Callbacks invoked by replay(); each corresponds to one action.
class ScheduleHandler {
 public:
  virtual ~ScheduleHandler() = default;
  virtual void store(int slot, int step) = 0;
  virtual void restore(int slot, int step) = 0;
  /// `final_step` is true when `to` is the final step (terminal buffer).
  virtual void advance(int from, int to, bool final_step) = 0;
  virtual void adjoint_step(int step) = 0;
};

struct ReplayTrace {
  std::int64_t forward_steps = 0;
  int high_water = 0;  // most slots occupied at once
  int adjoint_steps = 0;
};

/// Validates a schedule while executing it against `handler` (may be null).
/// Violations raise ScheduleError carrying the offending action index; an
/// action is checked before the handler sees it.
ReplayTrace replay(const Schedule& schedule, ScheduleHandler* handler = nullptr);

/// Counting replay: number of forward step evaluations the schedule performs.
std::int64_t simulate_schedule(const Schedule& schedule);

/// One CSV row per action: index,action,slot,from,to.
std::string schedule_csv(const Schedule& schedule);

}  // namespace semopt
