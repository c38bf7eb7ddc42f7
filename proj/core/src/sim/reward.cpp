#include "pbt/sim/reward.hpp"

#include <algorithm>
#include <stdexcept>

#include "pbt/common.hpp"

namespace pbt::sim {

RobotAction RobotAction::pick(int item_type, int position) {
  require((item_type == 1 || item_type == 2) && (position == 1 || position == 2),
          "pick: item type and position must be 1 or 2");
  return RobotAction(1 + static_cast<std::size_t>((item_type - 1) * 2 + (position - 1)));
}

RobotAction RobotAction::from_index(std::size_t index) {
  require(index < kCount, "robot action index " + std::to_string(index) + " out of range");
  return RobotAction(index);
}

RobotAction::Kind RobotAction::kind() const noexcept {
  if (index_ == 0) return Kind::Wait;
  if (index_ == 5) return Kind::LiftBox;
  return Kind::Pick;
}

int RobotAction::item_type() const noexcept {
  return kind() == Kind::Pick ? static_cast<int>((index_ - 1) / 2) + 1 : 0;
}

int RobotAction::position() const noexcept {
  return kind() == Kind::Pick ? static_cast<int>((index_ - 1) % 2) + 1 : 0;
}

std::string RobotAction::to_string() const {
  switch (kind()) {
    case Kind::Wait:
      return "wait";
    case Kind::LiftBox:
      return "lift_box";
    case Kind::Pick:
      break;
  }
  return "pick(" + std::to_string(item_type()) + "," + std::to_string(position()) + ")";
}

std::string_view phase_type_name(PhaseType type) {
  switch (type) {
    case PhaseType::BoxDelivery:
      return "box_delivery";
    case PhaseType::BubbleWrap:
      return "bubble_wrap";
    case PhaseType::WrapUp:
      return "wrap_up";
  }
  return "?";
}

PhaseType parse_phase_type(std::string_view name) {
  if (name == "box_delivery") return PhaseType::BoxDelivery;
  if (name == "bubble_wrap") return PhaseType::BubbleWrap;
  if (name == "wrap_up") return PhaseType::WrapUp;
  throw FormatError("unknown phase kind '" + std::string(name) + "'");
}

RobotAction correct_action(const PhaseKind& phase) {
  if (phase.type == PhaseType::WrapUp) return RobotAction::lift_box();
  return RobotAction::pick(phase.box_type, phase.position);
}

std::string_view activity_name(Activity a) {
  switch (a) {
    case Activity::CarryBox1:
      return "carry_box1";
    case Activity::CarryBox2:
      return "carry_box2";
    case Activity::PlaceBox:
      return "place_box";
    case Activity::PlaceBubble:
      return "place_bubble";
    case Activity::WrapUp:
      return "wrap_up";
    case Activity::Idle:
      return "idle";
  }
  return "?";
}

double compute_reward(const PhaseKind& phase, RobotAction action, double t_b) {
  require(!action.is_wait(), "compute_reward: Wait has no reward (the episode is not over)");
  require(t_b >= 0.0, "compute_reward: t_b must be non-negative");
  const auto gain = [t_b](double cap) { return std::min(t_b, cap); };
  const auto loss = [t_b](double cap) { return std::max(-t_b, -cap); };

  switch (phase.type) {
    case PhaseType::BoxDelivery:
      if (action.kind() == RobotAction::Kind::LiftBox) return loss(4.5);
      if (action.item_type() != phase.box_type) return loss(3.5);
      return action.position() == phase.position ? gain(4.0) : gain(3.5);
    case PhaseType::BubbleWrap:
      if (action.kind() == RobotAction::Kind::LiftBox) return loss(4.5);
      return action.item_type() == phase.box_type ? gain(3.5) : loss(3.5);
    case PhaseType::WrapUp:
      return action.kind() == RobotAction::Kind::LiftBox ? gain(4.5) : loss(3.5);
  }
  throw std::logic_error("compute_reward: unknown phase type");
}

}  // namespace pbt::sim
