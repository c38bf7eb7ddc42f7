#include "pbt/skeleton/motion_io.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

namespace pbt::skeleton {
namespace {

void append_fixed(std::string& line, double v, int decimals) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed, decimals);
  if (ec != std::errc{}) throw FormatError("cannot format coordinate");
  line.append(buf, end);
}

double parse_double(std::string_view token, std::size_t line_no) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (ec != std::errc{} || ptr != token.data() + token.size())
    throw FormatError("motion line " + std::to_string(line_no) + ": bad number '" + std::string(token) + "'");
  return v;
}

}  // namespace

void write_motion(std::ostream& os, const MotionSequence& seq, int decimals) {
  const std::size_t nj = seq.frames.empty() ? 0 : seq.frames.front().joints.size();
  std::string line = "J " + std::to_string(nj) + " FPS ";
  append_fixed(line, seq.fps, 3);
  os << line << '\n';
  for (const auto& f : seq.frames) {
    require(f.joints.size() == nj, "write_motion: frames differ in joint count");
    line.clear();
    for (std::size_t j = 0; j < nj; ++j)
      for (int c = 0; c < 3; ++c) {
        if (j || c) line.push_back(' ');
        append_fixed(line, f.joints[j][c], decimals);
      }
    os << line << '\n';
  }
}

MotionSequence read_motion(std::istream& is) {
  std::string line;
  std::size_t line_no = 0;
  auto next_line = [&]() -> bool {
    while (std::getline(is, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty() || line.front() == '#') continue;
      return true;
    }
    return false;
  };
  if (!next_line()) throw FormatError("motion file is empty");
  std::istringstream header(line);
  std::string jtag, ftag;
  std::size_t nj = 0;
  double fps = 0.0;
  if (!(header >> jtag >> nj >> ftag >> fps) || jtag != "J" || ftag != "FPS" || fps <= 0.0)
    throw FormatError("motion header must read 'J <count> FPS <rate>', got '" + line + "'");

  MotionSequence seq;
  seq.fps = fps;
  while (next_line()) {
    MotionFrame f;
    f.joints.resize(nj);
    f.timestamp = static_cast<double>(seq.frames.size()) / fps;
    std::size_t count = 0;
    std::size_t pos = 0;
    while (pos < line.size()) {
      while (pos < line.size() && line[pos] == ' ') ++pos;
      if (pos >= line.size()) break;
      std::size_t end = line.find(' ', pos);
      if (end == std::string::npos) end = line.size();
      if (count >= 3 * nj)
        throw FormatError("motion line " + std::to_string(line_no) + ": more than " + std::to_string(3 * nj) +
                          " values");
      f.joints[count / 3][static_cast<int>(count % 3)] =
          parse_double(std::string_view(line).substr(pos, end - pos), line_no);
      ++count;
      pos = end;
    }
    if (count != 3 * nj)
      throw FormatError("motion line " + std::to_string(line_no) + ": expected " + std::to_string(3 * nj) +
                        " values, got " + std::to_string(count));
    seq.frames.push_back(std::move(f));
  }
  return seq;
}

void write_motion_file(const std::filesystem::path& path, const MotionSequence& seq, int decimals) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw FormatError("cannot open " + path.string() + " for writing");
  write_motion(os, seq, decimals);
}

MotionSequence read_motion_file(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError("cannot open " + path.string());
  return read_motion(is);
}

}  // namespace pbt::skeleton
