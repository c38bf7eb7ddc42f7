#pragma once

#include <array>
#include <cstddef>
#include <optional>

#include "pbt/sim/session.hpp"

namespace pbt::btree {

/// Layout: [awaiting_box, awaiting_item, awaiting_wrap_decision,
///          box_type_known, type1, type2, items_placed / 4].
inline constexpr std::size_t kContextDim = 7;
inline constexpr int kContextVersion = 1;
inline constexpr int kItemsPerBox = 4;

using Context = std::array<double, kContextDim>;

enum class TaskStage { AwaitingBox, AwaitingItem, AwaitingWrapDecision };

/// Task blackboard fields that the context vector is built from.
struct TaskState {
  TaskStage stage = TaskStage::AwaitingBox;
  std::optional<int> box_type;
  int items_placed = 0;
};

Context encode_context(const TaskState& state);

/// Applies the effect of a finished phase: a delivered box reveals its type
/// (barcode), a finished bubble-wrap phase places one item.
void complete_phase(TaskState& state, const sim::PhaseKind& phase);

/// Blackboard at the start of phase `phase` of a session.
TaskState task_state_before(const sim::SessionScript& script, std::size_t phase);

}  // namespace pbt::btree
