#include <sstream>

#include "bt_trace.hpp"
#include "doctest.h"
#include "pbt/btree/context.hpp"
#include "pbt/btree/qnode.hpp"
#include "pbt/btree/tree_spec.hpp"
#include "pbt/common.hpp"

using namespace pbt;
using btree::NodeStatus;

namespace {

struct Counter {
  int calls = 0;
};

btree::Registry counting_registry(Counter& a, Counter& b, NodeStatus sa, NodeStatus sb) {
  btree::Registry reg;
  reg.add_action("a", [&a, sa](btree::Blackboard&) { ++a.calls; return sa; });
  reg.add_action("b", [&b, sb](btree::Blackboard&) { ++b.calls; return sb; });
  return reg;
}

std::vector<btree::NodePtr> two_actions() {
  std::vector<btree::NodePtr> v;
  v.push_back(std::make_unique<btree::Action>("a"));
  v.push_back(std::make_unique<btree::Action>("b"));
  return v;
}

class ConstantValues final : public btree::ValueFunction {
 public:
  explicit ConstantValues(std::vector<double> v) : v_(std::move(v)) {}
  void reset() override {}
  std::vector<double> values(const btree::WindowObservation&, const btree::Context&) override { return v_; }

 private:
  std::vector<double> v_;
};

}  // namespace

TEST_SUITE("btree") {

TEST_CASE("hand trace of one phase") {
  const auto r = testing::hand_trace();
  using R = btree::TickRecord;
  const std::vector<R> expected{{0, 1.0, true, NodeStatus::Failure},
                                {0, 2.0, true, NodeStatus::Failure},
                                {0, 3.0, true, NodeStatus::Running},
                                {0, 4.0, false, NodeStatus::Success}};
  REQUIRE(r.run.trace.size() == expected.size());
  for (std::size_t i = 0; i < expected.size(); ++i) {
    CHECK(r.run.trace[i].time == doctest::Approx(expected[i].time));
    CHECK(r.run.trace[i].window == expected[i].window);
    CHECK(r.run.trace[i].status == expected[i].status);
  }
  CHECK(r.policy_calls == std::vector<std::uint32_t>{0, 1, 2});
  REQUIRE(r.run.phases.size() == 1);
  CHECK(r.run.phases[0].outcome.reward == doctest::Approx(1.0));
  CHECK(r.run.phases[0].actor == "qvalue:drqn");
  CHECK(r.run.diagnostics.empty());
}

TEST_CASE("sequence stops at the first non-success") {
  Counter a, b;
  auto reg = counting_registry(a, b, NodeStatus::Failure, NodeStatus::Success);
  btree::Sequence seq(two_actions());
  btree::Blackboard bb;
  CHECK(seq.tick(bb, reg) == NodeStatus::Failure);
  CHECK(a.calls == 1);
  CHECK(b.calls == 0);

  Counter c, d;
  auto reg2 = counting_registry(c, d, NodeStatus::Success, NodeStatus::Running);
  btree::Sequence seq2(two_actions());
  CHECK(seq2.tick(bb, reg2) == NodeStatus::Running);
  CHECK(seq2.tick(bb, reg2) == NodeStatus::Running);
  CHECK(c.calls == 2);  // memory-less: restarts from the first child
  CHECK(d.calls == 2);
}

TEST_CASE("fallback stops at the first non-failure") {
  Counter a, b;
  auto reg = counting_registry(a, b, NodeStatus::Success, NodeStatus::Success);
  btree::Fallback fb(two_actions());
  btree::Blackboard bb;
  CHECK(fb.tick(bb, reg) == NodeStatus::Success);
  CHECK(b.calls == 0);

  Counter c, d;
  auto reg2 = counting_registry(c, d, NodeStatus::Failure, NodeStatus::Failure);
  btree::Fallback fb2(two_actions());
  CHECK(fb2.tick(bb, reg2) == NodeStatus::Failure);
  CHECK(c.calls == 1);
  CHECK(d.calls == 1);
  CHECK(fb2.tick_count() == 1);
  CHECK(fb2.last_status() == NodeStatus::Failure);
}

TEST_CASE("unregistered handles fail with a diagnostic") {
  btree::Registry reg;
  btree::Blackboard bb;
  btree::Condition cond("nope");
  btree::Action act("missing");
  CHECK(cond.tick(bb, reg) == NodeStatus::Failure);
  CHECK(act.tick(bb, reg) == NodeStatus::Failure);
  bb.window = btree::WindowObservation{};
  btree::QValueNode q("ghost");
  CHECK(q.tick(bb, reg) == NodeStatus::Failure);
  REQUIRE(bb.diagnostics.size() == 3);
  CHECK(bb.diagnostics[2].find("ghost") != std::string::npos);
}

TEST_CASE("q-value node without a window does not consult the policy") {
  auto policy = std::make_shared<testing::ScriptedPolicy>(0, sim::RobotAction::lift_box());
  btree::Registry reg;
  reg.add_policy("p", policy);
  btree::QValueNode q("p");
  btree::Blackboard bb;
  CHECK(q.tick(bb, reg) == NodeStatus::Failure);
  CHECK(policy->calls.empty());
  CHECK(!bb.dispatched);
}

TEST_CASE("removing the learned node leaves a zero-return tree") {
  const auto sessions = sim::generate_sessions(sim::SimConfig{}, sim::session_seeds(9, "bt", 3));
  btree::Registry reg;
  btree::register_packaging_handles(reg);
  auto reactive = btree::build_reactive_tree();
  const auto ev = btree::evaluate_tree(*reactive, reg, sessions);
  CHECK(ev.mean_reward == 0.0);
  CHECK(ev.act_rate == 0.0);

  // A policy that never acts is equivalent.
  reg.add_policy("drqn", std::make_shared<testing::ScriptedPolicy>(1000, sim::RobotAction::lift_box()));
  auto full = btree::build_packaging_tree("drqn");
  CHECK(btree::evaluate_tree(*full, reg, sessions).mean_reward == 0.0);
}

TEST_CASE("gated value policy") {
  btree::WindowObservation w;
  btree::Context ctx{};
  btree::QValuePolicy acts(std::make_shared<ConstantValues>(std::vector<double>{0.1, 0.5, 2.0, 0, 0, 0}), 1.0);
  CHECK(acts.decide(w, ctx).index() == 2);
  btree::QValuePolicy gated(std::make_shared<ConstantValues>(std::vector<double>{0.1, 0.5, 0.9, 0, 0, 0}), 1.0);
  CHECK(gated.decide(w, ctx).is_wait());
  btree::QValuePolicy wait_best(std::make_shared<ConstantValues>(std::vector<double>{5, 0.5, 2, 0, 0, 0}), 0.0);
  CHECK(wait_best.decide(w, ctx).is_wait());
  btree::QValuePolicy bad(std::make_shared<ConstantValues>(std::vector<double>{1, 2}));
  CHECK_THROWS_AS(bad.decide(w, ctx), ContractViolation);
}

TEST_CASE("tree spec round trip") {
  const std::string text =
      "fallback root\n"
      "  qvalue drqn\n"
      "  sequence reactive\n"
      "    condition trigger_arrived\n"
      "    action reactive_action\n";
  auto tree = btree::parse_tree("# comment\n\n" + text);
  CHECK(btree::format_tree(*tree) == text);
  CHECK(tree->kind() == btree::NodeKind::Fallback);
  REQUIRE(tree->children().size() == 2);
  CHECK(tree->children()[0]->kind() == btree::NodeKind::QValue);
  CHECK(tree->children()[0]->label() == "drqn");

  std::istringstream is(btree::format_tree(*btree::build_packaging_tree("drqn")));
  auto again = btree::read_tree(is);
  std::size_t nodes = 0;
  btree::visit(*again, [&](const btree::Node&, std::size_t) { ++nodes; });
  CHECK(nodes == 5);
}

TEST_CASE("tree spec errors") {
  CHECK_THROWS_AS(btree::parse_tree(""), FormatError);
  CHECK_THROWS_AS(btree::parse_tree("teleport x\n"), FormatError);
  CHECK_THROWS_AS(btree::parse_tree("sequence\n    action a\n"), FormatError);
  CHECK_THROWS_AS(btree::parse_tree("action a\n  action b\n"), FormatError);
  CHECK_THROWS_AS(btree::parse_tree("condition\n"), FormatError);
  CHECK_THROWS_AS(btree::parse_tree("action a\naction b\n"), FormatError);
}

TEST_CASE("context encoding follows the task") {
  btree::TaskState s;
  auto c = btree::encode_context(s);
  CHECK(c == btree::Context{1, 0, 0, 0, 0, 0, 0});
  btree::complete_phase(s, {sim::PhaseType::BoxDelivery, 2, 1});
  CHECK(btree::encode_context(s) == btree::Context{0, 1, 0, 1, 0, 1, 0});
  btree::complete_phase(s, {sim::PhaseType::BubbleWrap, 2, 1});
  CHECK(btree::encode_context(s) == btree::Context{0, 0, 1, 1, 0, 1, 0.25});
  for (int i = 0; i < 5; ++i) btree::complete_phase(s, {sim::PhaseType::BubbleWrap, 2, 1});
  CHECK(btree::encode_context(s)[6] == 1.0);
  btree::complete_phase(s, {sim::PhaseType::WrapUp, 2, 1});
  CHECK(btree::encode_context(s) == btree::Context{1, 0, 0, 0, 0, 0, 0});

  const auto script = sim::make_script(sim::SimConfig{}, 4);
  const auto before = btree::task_state_before(script, 2);
  CHECK(before.items_placed == 1);
  CHECK(before.box_type == script.box_type);
}

}  // TEST_SUITE
