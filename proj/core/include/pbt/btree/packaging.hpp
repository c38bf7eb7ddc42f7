#pragma once

#include <string>

#include "pbt/btree/node.hpp"

namespace pbt::btree {

inline constexpr const char* kTriggerCondition = "trigger_arrived";
inline constexpr const char* kReactiveAction = "reactive_action";

/// Fallback(QValueNode(policy), Sequence(trigger_arrived, reactive_action)).
NodePtr build_packaging_tree(const std::string& policy_handle);
/// The packaging tree with the learned node removed.
NodePtr build_reactive_tree();

/// Registers the trigger condition and the reactive command, which performs
/// the phase's correct action once the trigger has arrived.
void register_packaging_handles(Registry& registry);

}  // namespace pbt::btree
