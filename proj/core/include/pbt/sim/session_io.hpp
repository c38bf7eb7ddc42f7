#pragma once

#include <filesystem>
#include <iosfwd>

#include "pbt/sim/session.hpp"

namespace pbt::sim {

/// Sidecar label format, one line per phase after an optional seed comment:
///
///   # seed <session seed>
///   <kind> <box_type> <position> <cue_onset> <t_trigger> <duration>
///
/// kind is box_delivery, bubble_wrap or wrap_up; times are seconds.
void write_labels(std::ostream& os, const SessionScript& script);
SessionScript read_labels(std::istream& is, double fps);

struct SessionFiles {
  std::filesystem::path motion;
  std::filesystem::path labels;
};

SessionFiles session_files(const std::filesystem::path& dir, std::string_view name);

/// Writes <name>.skel and <name>.labels under dir.
SessionFiles write_session(const std::filesystem::path& dir, std::string_view name, const Session& session);
Session read_session(const SessionFiles& files);

}  // namespace pbt::sim
