#include "pbt/btree/context.hpp"

#include <algorithm>

#include "pbt/common.hpp"

namespace pbt::btree {

Context encode_context(const TaskState& state) {
  Context c{};
  c[static_cast<std::size_t>(state.stage)] = 1.0;
  if (state.box_type) {
    require(*state.box_type == 1 || *state.box_type == 2, "encode_context: box type must be 1 or 2");
    c[3] = 1.0;
    c[3 + static_cast<std::size_t>(*state.box_type)] = 1.0;
  }
  require(state.items_placed >= 0, "encode_context: negative item count");
  c[6] = std::min(1.0, static_cast<double>(state.items_placed) / kItemsPerBox);
  return c;
}

void complete_phase(TaskState& state, const sim::PhaseKind& phase) {
  switch (phase.type) {
    case sim::PhaseType::BoxDelivery:
      state.box_type = phase.box_type;
      break;
    case sim::PhaseType::BubbleWrap:
      ++state.items_placed;
      break;
    case sim::PhaseType::WrapUp:
      state = TaskState{};
      return;
  }
  state.stage = state.items_placed == 0 ? TaskStage::AwaitingItem : TaskStage::AwaitingWrapDecision;
}

TaskState task_state_before(const sim::SessionScript& script, std::size_t phase) {
  require(phase < script.phases.size(), "task_state_before: phase index out of range");
  TaskState s;
  for (std::size_t p = 0; p < phase; ++p) complete_phase(s, script.phases[p].kind);
  return s;
}

}  // namespace pbt::btree
