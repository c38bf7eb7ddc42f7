#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "pbt/baselines/classifier.hpp"
#include "pbt/drqn/qnet.hpp"
#include "pbt/drqn/trainer.hpp"
#include "pbt/repr/vae.hpp"
#include "pbt/sim/session.hpp"

namespace pbt::harness {

struct DataConfig {
  std::size_t train_sessions = 200;
  std::size_t eval_sessions = 50;
  /// Leading training sessions used to fit the VAE and the baselines.
  std::size_t vae_sessions = 100;
  std::size_t classifier_sessions = 100;
};

struct BaselineConfig {
  baselines::ClassifierConfig classifier;
  std::size_t bootstrap_models = 5;
  std::size_t dropout_passes = 20;
  std::vector<double> taus;
};

struct SweepConfig {
  std::vector<std::size_t> latent_dims{8, 16, 32};
  std::vector<std::size_t> hidden_sizes{32, 64};
};

struct ExperimentConfig {
  std::uint64_t seed = 1;
  /// Independent training replicates per configuration.
  std::size_t replicates = 5;
  int precision = 32;
  sim::SimConfig sim;
  DataConfig data;
  repr::VaeConfig vae;
  std::size_t q_hidden = 64;
  drqn::TrainConfig drqn;
  BaselineConfig baselines;
  SweepConfig sweep;
  double aux_lambda = 1.0;
  /// Not part of the hash.
  std::filesystem::path out_dir = "out";

  ExperimentConfig();
  void validate() const;

  /// Every hashed setting as `key = value` lines in a fixed order.
  std::string to_text() const;
  /// Only the lines whose key starts with one of the prefixes.
  std::string section_text(std::initializer_list<std::string_view> prefixes) const;
  std::uint64_t hash() const;
  std::string hash_hex() const;

  /// Sets one dotted key; throws FormatError for unknown keys or bad values.
  void set(std::string_view key, std::string_view value);
  std::vector<std::string> keys() const;
};

/// Applies `key = value` lines on top of `base`. '#' starts a comment.
ExperimentConfig parse_config(std::string_view text, ExperimentConfig base = {});
ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base = {});

std::string hex64(std::uint64_t v);

}  // namespace pbt::harness
