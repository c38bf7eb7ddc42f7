#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pbt/btree/context.hpp"
#include "pbt/repr/train.hpp"
#include "pbt/sim/types.hpp"

namespace pbt::btree {

enum class NodeStatus { Running, Success, Failure };
std::string_view status_name(NodeStatus s);

/// A complete window offered to the tree on this tick.
struct WindowObservation {
  repr::WindowKey key;
  std::span<const skeleton::MotionFrame> frames;
};

/// Shared state read and written by nodes during a phase.
struct Blackboard {
  TaskState task;
  sim::PhaseKind phase;
  double time = 0.0;  // phase-local seconds
  double t_trigger = std::numeric_limits<double>::infinity();
  std::optional<WindowObservation> window;

  // Robot action bookkeeping: at most one action per phase.
  std::optional<sim::RobotAction> dispatched;
  std::string dispatched_by;
  double dispatch_time = 0.0;
  int remaining_ticks = 0;
  int action_ticks = 1;

  std::vector<std::string> diagnostics;

  bool trigger_arrived() const noexcept { return time >= t_trigger - 1e-9; }
  /// Starts executing an action; Running until it completes.
  void dispatch(sim::RobotAction action, std::string by);
  /// Advances an executing action: Running while ticks remain, then Success.
  NodeStatus progress();
};

/// Decides what to do with an offered window. Wait means "need more data".
class DecisionPolicy {
 public:
  virtual ~DecisionPolicy() = default;
  /// Called at the start of each phase (recurrent state reset).
  virtual void reset() = 0;
  virtual sim::RobotAction decide(const WindowObservation& window, const Context& context) = 0;
};

using Predicate = std::function<bool(const Blackboard&)>;
using Command = std::function<NodeStatus(Blackboard&)>;

/// Named handles the tree resolves at tick time.
class Registry {
 public:
  void add_condition(std::string name, Predicate p);
  void add_action(std::string name, Command c);
  void add_policy(std::string name, std::shared_ptr<DecisionPolicy> p);

  const Predicate* condition(const std::string& name) const;
  const Command* action(const std::string& name) const;
  DecisionPolicy* policy(const std::string& name) const;
  void reset_policies() const;

 private:
  std::map<std::string, Predicate> conditions_;
  std::map<std::string, Command> actions_;
  std::map<std::string, std::shared_ptr<DecisionPolicy>> policies_;
};

enum class NodeKind { Sequence, Fallback, Condition, Action, QValue };
std::string_view node_kind_name(NodeKind k);

class Node {
 public:
  Node(NodeKind kind, std::string label);
  virtual ~Node() = default;
  Node(const Node&) = delete;
  Node& operator=(const Node&) = delete;

  NodeStatus tick(Blackboard& bb, const Registry& reg);

  NodeKind kind() const noexcept { return kind_; }
  /// Handle name for leaves, optional display name for composites.
  const std::string& label() const noexcept { return label_; }
  std::size_t tick_count() const noexcept { return ticks_; }
  std::optional<NodeStatus> last_status() const noexcept { return last_; }
  virtual std::span<const std::unique_ptr<Node>> children() const { return {}; }
  void reset_counters();

 protected:
  virtual NodeStatus do_tick(Blackboard& bb, const Registry& reg) = 0;

 private:
  NodeKind kind_;
  std::string label_;
  std::size_t ticks_ = 0;
  std::optional<NodeStatus> last_;
};

using NodePtr = std::unique_ptr<Node>;

/// Ticks children left to right and returns the first non-Success status.
class Sequence final : public Node {
 public:
  explicit Sequence(std::vector<NodePtr> children, std::string label = "");
  std::span<const NodePtr> children() const override { return children_; }

 protected:
  NodeStatus do_tick(Blackboard& bb, const Registry& reg) override;

 private:
  std::vector<NodePtr> children_;
};

/// Ticks children left to right and returns the first non-Failure status.
class Fallback final : public Node {
 public:
  explicit Fallback(std::vector<NodePtr> children, std::string label = "");
  std::span<const NodePtr> children() const override { return children_; }

 protected:
  NodeStatus do_tick(Blackboard& bb, const Registry& reg) override;

 private:
  std::vector<NodePtr> children_;
};

class Condition final : public Node {
 public:
  explicit Condition(std::string handle);

 protected:
  NodeStatus do_tick(Blackboard& bb, const Registry& reg) override;
};

class Action final : public Node {
 public:
  explicit Action(std::string handle);

 protected:
  NodeStatus do_tick(Blackboard& bb, const Registry& reg) override;
};

/// Learned decision node: Failure without a window or when the policy
/// prefers to wait; otherwise dispatches the action and reports Running
/// until it completes.
class QValueNode final : public Node {
 public:
  explicit QValueNode(std::string policy_handle);

 protected:
  NodeStatus do_tick(Blackboard& bb, const Registry& reg) override;
};

NodePtr make_sequence(std::vector<NodePtr> children, std::string label = "");
NodePtr make_fallback(std::vector<NodePtr> children, std::string label = "");

/// Visits every node depth-first (pre-order).
void visit(const Node& root, const std::function<void(const Node&, std::size_t depth)>& f);

}  // namespace pbt::btree
