#pragma once

#include <filesystem>
#include <initializer_list>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pbt/harness/config.hpp"
#include "pbt/numcore/params.hpp"
#include "pbt/repr/normalizer.hpp"

namespace pbt::harness {

/// Binary model container:
///
///   "PBT1" u32 format-version
///   str kind, u32 precision, u32 context-version, str config-echo
///   u64 n, n x (str key, str value)                      metadata
///   u64 n, n x (str name, u32 rank, u64 dims..., f64 values...)
///
/// Integers and doubles are little-endian; str is u64 length + bytes.
/// Tensors are stored as f64 whatever the model precision.
struct Checkpoint {
  std::string kind;
  int precision = 32;
  int context_version = 0;
  std::string config_text;
  std::map<std::string, std::string> meta;
  std::vector<std::pair<std::string, nn::Tensor<double>>> tensors;

  const nn::Tensor<double>& tensor(std::string_view name) const;
  void add_tensor(std::string name, nn::Tensor<double> t);
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

void write_checkpoint(std::ostream& os, const Checkpoint& ck);
Checkpoint read_checkpoint(std::istream& is);
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ck);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// New container echoing the full configuration.
Checkpoint make_checkpoint(std::string kind, const ExperimentConfig& cfg);

/// Throws FormatError when the kind, precision or context layout differ, or
/// when any config key under `prefixes` differs from `cfg`.
void check_compatible(const Checkpoint& ck, std::string_view kind, const ExperimentConfig& cfg,
                      std::initializer_list<std::string_view> prefixes);

template <typename T>
void put_params(Checkpoint& ck, const nn::ParamSet<T>& params);
/// Overwrites every parameter; names and shapes must match exactly.
template <typename T>
void get_params(const Checkpoint& ck, nn::ParamSet<T>& params);

void put_normalizer(Checkpoint& ck, const repr::Normalizer& n);
repr::Normalizer get_normalizer(const Checkpoint& ck);

}  // namespace pbt::harness
