#include "pbt/btree/packaging.hpp"

namespace pbt::btree {

namespace {
constexpr const char* kReactiveActor = "reactive";

NodePtr reactive_branch() {
  std::vector<NodePtr> c;
  c.push_back(std::make_unique<Condition>(kTriggerCondition));
  c.push_back(std::make_unique<Action>(kReactiveAction));
  return make_sequence(std::move(c), "reactive");
}
}  // namespace

NodePtr build_packaging_tree(const std::string& policy_handle) {
  std::vector<NodePtr> c;
  c.push_back(std::make_unique<QValueNode>(policy_handle));
  c.push_back(reactive_branch());
  return make_fallback(std::move(c), "root");
}

NodePtr build_reactive_tree() {
  std::vector<NodePtr> c;
  c.push_back(reactive_branch());
  return make_fallback(std::move(c), "root");
}

void register_packaging_handles(Registry& registry) {
  registry.add_condition(kTriggerCondition, [](const Blackboard& bb) { return bb.trigger_arrived(); });
  registry.add_action(kReactiveAction, [](Blackboard& bb) {
    if (bb.dispatched) return bb.dispatched_by == kReactiveActor ? bb.progress() : NodeStatus::Failure;
    bb.dispatch(sim::correct_action(bb.phase), kReactiveActor);
    return NodeStatus::Running;
  });
}

}  // namespace pbt::btree
