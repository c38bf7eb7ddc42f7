#include "pbt/sim/session_io.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>

#include "pbt/common.hpp"
#include "pbt/skeleton/motion_io.hpp"

namespace pbt::sim {

void write_labels(std::ostream& os, const SessionScript& script) {
  os << "# seed " << script.seed << '\n';
  os << std::setprecision(17);
  for (const auto& p : script.phases) {
    os << phase_type_name(p.kind.type) << ' ' << p.kind.box_type << ' ' << p.kind.position << ' ' << p.cue_onset
       << ' ' << p.t_trigger << ' ' << p.duration << '\n';
  }
  if (!os) throw FormatError("write_labels: stream failure");
}

SessionScript read_labels(std::istream& is, double fps) {
  require(fps > 0.0, "read_labels: fps must be positive");
  SessionScript script;
  std::string line;
  std::size_t frame = 0;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ls(line);
    if (line.front() == '#') {
      std::string hash, key;
      ls >> hash >> key;
      if (key == "seed" && !(ls >> script.seed)) throw FormatError("labels: bad seed comment");
      continue;
    }
    std::string kind;
    PhaseScript p;
    if (!(ls >> kind >> p.kind.box_type >> p.kind.position >> p.cue_onset >> p.t_trigger >> p.duration))
      throw FormatError("labels: line " + std::to_string(line_no) + " needs 6 fields");
    std::string extra;
    if (ls >> extra) throw FormatError("labels: line " + std::to_string(line_no) + " has trailing fields");
    p.kind.type = parse_phase_type(kind);
    if (p.kind.box_type < 1 || p.kind.box_type > 2 || p.kind.position < 1 || p.kind.position > 2)
      throw FormatError("labels: line " + std::to_string(line_no) + " box type and position must be 1 or 2");
    if (!(p.cue_onset > 0.0 && p.cue_onset < p.t_trigger && p.t_trigger <= p.duration + 1e-9))
      throw FormatError("labels: line " + std::to_string(line_no) + " needs 0 < cue_onset < t_trigger <= duration");
    p.start_frame = frame;
    p.frame_count = static_cast<std::size_t>(std::llround(p.duration * fps));
    frame += p.frame_count;
    script.phases.push_back(p);
  }
  if (script.phases.empty()) throw FormatError("labels: no phases");
  script.box_type = script.phases.front().kind.box_type;
  script.position = script.phases.front().kind.position;
  return script;
}

SessionFiles session_files(const std::filesystem::path& dir, std::string_view name) {
  return {dir / (std::string(name) + ".skel"), dir / (std::string(name) + ".labels")};
}

SessionFiles write_session(const std::filesystem::path& dir, std::string_view name, const Session& session) {
  std::filesystem::create_directories(dir);
  const auto files = session_files(dir, name);
  skeleton::write_motion_file(files.motion, {session.fps, session.frames});
  std::ofstream os(files.labels);
  if (!os) throw FormatError("cannot open " + files.labels.string());
  write_labels(os, session.script);
  return files;
}

Session read_session(const SessionFiles& files) {
  auto seq = skeleton::read_motion_file(files.motion);
  std::ifstream is(files.labels);
  if (!is) throw FormatError("cannot open " + files.labels.string());
  Session s;
  s.fps = seq.fps;
  s.script = read_labels(is, seq.fps);
  s.frames = std::move(seq.frames);
  const auto& last = s.script.phases.back();
  if (last.start_frame + last.frame_count != s.frames.size())
    throw FormatError("session: labels cover " + std::to_string(last.start_frame + last.frame_count) +
                      " frames but motion has " + std::to_string(s.frames.size()));
  return s;
}

}  // namespace pbt::sim
