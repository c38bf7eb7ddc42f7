#include "pbt/btree/tree_spec.hpp"

#include <istream>
#include <iterator>
#include <sstream>
#include <vector>

#include "pbt/common.hpp"

namespace pbt::btree {

namespace {

struct Line {
  std::size_t number;
  std::size_t depth;
  std::string kind;
  std::string name;
};

[[noreturn]] void fail(std::size_t line, const std::string& what) {
  throw FormatError("tree spec line " + std::to_string(line) + ": " + what);
}

std::vector<Line> tokenize(std::string_view text) {
  std::vector<Line> out;
  std::istringstream is{std::string(text)};
  std::string raw;
  for (std::size_t n = 1; std::getline(is, raw); ++n) {
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    const auto first = raw.find_first_not_of(' ');
    if (first == std::string::npos || raw[first] == '#') continue;
    if (raw.find('\t') != std::string::npos) fail(n, "tabs are not allowed");
    if (first % 2) fail(n, "indentation must be a multiple of two spaces");
    std::istringstream ls(raw.substr(first));
    Line l{n, first / 2, {}, {}};
    ls >> l.kind >> l.name;
    std::string extra;
    if (ls >> extra) fail(n, "unexpected token '" + extra + "'");
    out.push_back(std::move(l));
  }
  return out;
}

NodePtr build(const std::vector<Line>& lines, std::size_t& i) {
  const Line& l = lines[i++];
  const bool composite = l.kind == "sequence" || l.kind == "fallback";
  if (composite) {
    std::vector<NodePtr> children;
    while (i < lines.size() && lines[i].depth > l.depth) {
      if (lines[i].depth != l.depth + 1) fail(lines[i].number, "indentation skips a level");
      children.push_back(build(lines, i));
    }
    if (children.empty()) fail(l.number, l.kind + " has no children");
    return l.kind == "sequence" ? make_sequence(std::move(children), l.name) : make_fallback(std::move(children), l.name);
  }
  if (i < lines.size() && lines[i].depth > l.depth) fail(lines[i].number, "leaf nodes cannot have children");
  if (l.name.empty()) fail(l.number, l.kind + " needs a handle name");
  if (l.kind == "condition") return std::make_unique<Condition>(l.name);
  if (l.kind == "action") return std::make_unique<Action>(l.name);
  if (l.kind == "qvalue") return std::make_unique<QValueNode>(l.name);
  fail(l.number, "unknown node kind '" + l.kind + "'");
}

}  // namespace

NodePtr parse_tree(std::string_view text) {
  const auto lines = tokenize(text);
  if (lines.empty()) throw FormatError("tree spec: empty");
  if (lines.front().depth != 0) fail(lines.front().number, "root must not be indented");
  std::size_t i = 0;
  NodePtr root = build(lines, i);
  if (i != lines.size()) fail(lines[i].number, "more than one root node");
  return root;
}

NodePtr read_tree(std::istream& is) {
  const std::string text{std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
  return parse_tree(text);
}

std::string format_tree(const Node& root) {
  std::string out;
  visit(root, [&](const Node& n, std::size_t depth) {
    out.append(2 * depth, ' ');
    out += node_kind_name(n.kind());
    if (!n.label().empty()) out += ' ' + n.label();
    out += '\n';
  });
  return out;
}

}  // namespace pbt::btree
