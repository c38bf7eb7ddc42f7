#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace pbt {

using Rng = std::mt19937_64;

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t basis = 0xcbf29ce484222325ULL);

std::uint64_t splitmix64(std::uint64_t x);

/// Named stream derivation: a child seed that depends only on the parent seed
/// and the stream name, so stages stay reproducible in isolation.
std::uint64_t derive_seed(std::uint64_t parent, std::string_view stream);
std::uint64_t derive_seed(std::uint64_t parent, std::string_view stream, std::uint64_t index);

}  // namespace pbt
