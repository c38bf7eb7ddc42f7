#include "pbt/btree/node.hpp"

#include "pbt/common.hpp"

namespace pbt::btree {

std::string_view status_name(NodeStatus s) {
  switch (s) {
    case NodeStatus::Running:
      return "running";
    case NodeStatus::Success:
      return "success";
    case NodeStatus::Failure:
      return "failure";
  }
  return "?";
}

std::string_view node_kind_name(NodeKind k) {
  switch (k) {
    case NodeKind::Sequence:
      return "sequence";
    case NodeKind::Fallback:
      return "fallback";
    case NodeKind::Condition:
      return "condition";
    case NodeKind::Action:
      return "action";
    case NodeKind::QValue:
      return "qvalue";
  }
  return "?";
}

void Blackboard::dispatch(sim::RobotAction action, std::string by) {
  require(!dispatched.has_value(), "blackboard: a robot action was already dispatched this phase");
  require(!action.is_wait(), "blackboard: Wait is not a robot command");
  dispatched = action;
  dispatched_by = std::move(by);
  dispatch_time = time;
  remaining_ticks = action_ticks;
}

NodeStatus Blackboard::progress() {
  if (remaining_ticks > 0) --remaining_ticks;
  return remaining_ticks > 0 ? NodeStatus::Running : NodeStatus::Success;
}

void Registry::add_condition(std::string name, Predicate p) { conditions_[std::move(name)] = std::move(p); }
void Registry::add_action(std::string name, Command c) { actions_[std::move(name)] = std::move(c); }
void Registry::add_policy(std::string name, std::shared_ptr<DecisionPolicy> p) {
  require(p != nullptr, "registry: null policy for '" + name + "'");
  policies_[std::move(name)] = std::move(p);
}

const Predicate* Registry::condition(const std::string& name) const {
  auto it = conditions_.find(name);
  return it == conditions_.end() ? nullptr : &it->second;
}
const Command* Registry::action(const std::string& name) const {
  auto it = actions_.find(name);
  return it == actions_.end() ? nullptr : &it->second;
}
DecisionPolicy* Registry::policy(const std::string& name) const {
  auto it = policies_.find(name);
  return it == policies_.end() ? nullptr : it->second.get();
}
void Registry::reset_policies() const {
  for (const auto& [_, p] : policies_) p->reset();
}

Node::Node(NodeKind kind, std::string label) : kind_(kind), label_(std::move(label)) {}

NodeStatus Node::tick(Blackboard& bb, const Registry& reg) {
  ++ticks_;
  last_ = do_tick(bb, reg);
  return *last_;
}

void Node::reset_counters() {
  ticks_ = 0;
  last_.reset();
  for (const auto& c : children()) c->reset_counters();
}

Sequence::Sequence(std::vector<NodePtr> children, std::string label)
    : Node(NodeKind::Sequence, std::move(label)), children_(std::move(children)) {
  for (const auto& c : children_) require(c != nullptr, "sequence: null child");
}

NodeStatus Sequence::do_tick(Blackboard& bb, const Registry& reg) {
  for (const auto& c : children_) {
    const NodeStatus s = c->tick(bb, reg);
    if (s != NodeStatus::Success) return s;
  }
  return NodeStatus::Success;
}

Fallback::Fallback(std::vector<NodePtr> children, std::string label)
    : Node(NodeKind::Fallback, std::move(label)), children_(std::move(children)) {
  for (const auto& c : children_) require(c != nullptr, "fallback: null child");
}

NodeStatus Fallback::do_tick(Blackboard& bb, const Registry& reg) {
  for (const auto& c : children_) {
    const NodeStatus s = c->tick(bb, reg);
    if (s != NodeStatus::Failure) return s;
  }
  return NodeStatus::Failure;
}

Condition::Condition(std::string handle) : Node(NodeKind::Condition, std::move(handle)) {}

NodeStatus Condition::do_tick(Blackboard& bb, const Registry& reg) {
  const Predicate* p = reg.condition(label());
  if (!p) {
    bb.diagnostics.push_back("condition '" + label() + "' is not registered");
    return NodeStatus::Failure;
  }
  return (*p)(bb) ? NodeStatus::Success : NodeStatus::Failure;
}

Action::Action(std::string handle) : Node(NodeKind::Action, std::move(handle)) {}

NodeStatus Action::do_tick(Blackboard& bb, const Registry& reg) {
  const Command* c = reg.action(label());
  if (!c) {
    bb.diagnostics.push_back("action '" + label() + "' is not registered");
    return NodeStatus::Failure;
  }
  return (*c)(bb);
}

QValueNode::QValueNode(std::string policy_handle) : Node(NodeKind::QValue, std::move(policy_handle)) {}

NodeStatus QValueNode::do_tick(Blackboard& bb, const Registry& reg) {
  const std::string me = "qvalue:" + label();
  if (bb.dispatched && bb.dispatched_by == me) return bb.progress();
  if (bb.dispatched || !bb.window) return NodeStatus::Failure;
  DecisionPolicy* policy = reg.policy(label());
  if (!policy) {
    bb.diagnostics.push_back("policy '" + label() + "' is not loaded");
    return NodeStatus::Failure;
  }
  const sim::RobotAction a = policy->decide(*bb.window, encode_context(bb.task));
  if (a.is_wait()) return NodeStatus::Failure;
  bb.dispatch(a, me);
  return NodeStatus::Running;
}

NodePtr make_sequence(std::vector<NodePtr> children, std::string label) {
  return std::make_unique<Sequence>(std::move(children), std::move(label));
}

NodePtr make_fallback(std::vector<NodePtr> children, std::string label) {
  return std::make_unique<Fallback>(std::move(children), std::move(label));
}

namespace {
void visit_impl(const Node& n, std::size_t depth, const std::function<void(const Node&, std::size_t)>& f) {
  f(n, depth);
  for (const auto& c : n.children()) visit_impl(*c, depth + 1, f);
}
}  // namespace

void visit(const Node& root, const std::function<void(const Node&, std::size_t depth)>& f) { visit_impl(root, 0, f); }

}  // namespace pbt::btree
