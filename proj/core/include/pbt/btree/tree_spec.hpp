#pragma once

#include <iosfwd>
#include <string>
#include <string_view>

#include "pbt/btree/node.hpp"

namespace pbt::btree {

/// Indented text form, two spaces per level, one node per line:
///
///   fallback root
///     qvalue drqn
///     sequence reactive
///       condition trigger_arrived
///       action reactive_action
///
/// Leaves name their handle; composites take an optional label.
/// Blank lines and lines starting with '#' are ignored.
NodePtr parse_tree(std::string_view text);
NodePtr read_tree(std::istream& is);
std::string format_tree(const Node& root);

}  // namespace pbt::btree
