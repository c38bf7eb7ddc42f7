#pragma once

#include <filesystem>
#include <iosfwd>
#include <vector>

#include "pbt/skeleton/skeleton.hpp"

namespace pbt::skeleton {

/// A recorded motion stream at a fixed frame rate.
struct MotionSequence {
  double fps = kDefaultFps;
  std::vector<MotionFrame> frames;
};

/// Line-oriented text format:
///
///   J <joint count> FPS <rate>
///   x0 y0 z0 x1 y1 z1 ...        (one line per frame, 3*J values)
///
/// Lines starting with '#' are comments. Frame i has timestamp i / fps.
void write_motion(std::ostream& os, const MotionSequence& seq, int decimals = 5);
MotionSequence read_motion(std::istream& is);

void write_motion_file(const std::filesystem::path& path, const MotionSequence& seq, int decimals = 5);
MotionSequence read_motion_file(const std::filesystem::path& path);

}  // namespace pbt::skeleton
