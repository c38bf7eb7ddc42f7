#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <string_view>

namespace pbt::sim {

/// The six high-level robot actions. Index 0 is Wait; Pick(item, position)
/// occupies 1..4 in (item, position) lexicographic order; LiftBox is 5.
class RobotAction {
 public:
  enum class Kind { Wait, Pick, LiftBox };
  static constexpr std::size_t kCount = 6;

  constexpr RobotAction() = default;

  static constexpr RobotAction wait() { return RobotAction(0); }
  static constexpr RobotAction lift_box() { return RobotAction(5); }
  /// item_type and position are 1-based (1 or 2).
  static RobotAction pick(int item_type, int position);
  static RobotAction from_index(std::size_t index);

  constexpr std::size_t index() const noexcept { return index_; }
  Kind kind() const noexcept;
  bool is_wait() const noexcept { return index_ == 0; }
  /// 1 or 2 for Pick, 0 otherwise.
  int item_type() const noexcept;
  int position() const noexcept;

  std::string to_string() const;

  friend constexpr bool operator==(RobotAction a, RobotAction b) { return a.index_ == b.index_; }

 private:
  constexpr explicit RobotAction(std::size_t index) : index_(index) {}
  std::size_t index_ = 0;
};

enum class PhaseType { BoxDelivery, BubbleWrap, WrapUp };

std::string_view phase_type_name(PhaseType type);
PhaseType parse_phase_type(std::string_view name);

/// What the human does in a phase. box_type and position are the session's
/// box (1 or 2); the position only matters for BoxDelivery.
struct PhaseKind {
  PhaseType type = PhaseType::BoxDelivery;
  int box_type = 1;
  int position = 1;

  friend bool operator==(const PhaseKind&, const PhaseKind&) = default;
};

/// The action the reactive plan executes once the trigger arrives.
RobotAction correct_action(const PhaseKind& phase);

/// Human activity classes used for auxiliary supervision.
enum class Activity { CarryBox1 = 0, CarryBox2, PlaceBox, PlaceBubble, WrapUp, Idle };
inline constexpr std::size_t kActivityCount = 6;
std::string_view activity_name(Activity a);

}  // namespace pbt::sim
