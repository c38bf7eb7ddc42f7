#pragma once

#include <compare>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "pbt/baselines/sweep.hpp"
#include "pbt/btree/session_runner.hpp"
#include "pbt/csv.hpp"
#include "pbt/drqn/packaging_env.hpp"
#include "pbt/drqn/trainer.hpp"
#include "pbt/harness/checkpoint.hpp"
#include "pbt/harness/config.hpp"
#include "pbt/repr/train.hpp"

namespace pbt::harness {

/// Raised by pipeline stages; what() is prefixed with the stage name.
class StageError : public std::runtime_error {
 public:
  StageError(std::string stage, const std::string& cause);
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

/// Runs f, rethrowing any other exception as a StageError for `stage`.
template <typename F>
auto run_stage(const std::string& stage, F&& f) {
  try {
    return f();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(stage, e.what());
  }
}

struct DataBundle {
  std::shared_ptr<const std::vector<sim::Session>> train;
  std::shared_ptr<const std::vector<sim::Session>> eval;
};

/// Sessions generated from the master seed (no files involved).
DataBundle generate_data(const ExperimentConfig& cfg);

template <typename T>
struct VaeRun {
  std::shared_ptr<const repr::Vae<T>> vae;
  repr::VaeTrace trace;
  std::shared_ptr<const drqn::LatentTable> train_latents;
  std::shared_ptr<const drqn::LatentTable> eval_latents;
};

template <typename T>
struct DrqnRun {
  std::shared_ptr<const drqn::QNet<T>> net;
  std::vector<drqn::CurvePoint> curve;
  /// Greedy policy inside the packaging tree on the evaluation sessions.
  btree::TreeEvaluation final_eval;
};

template <typename T>
struct BaselineRun {
  std::shared_ptr<const baselines::Classifier<T>> single;
  std::vector<std::shared_ptr<const baselines::Classifier<T>>> bootstrap;
  /// Sweep rows for dropout, bootstrap and combined, in that order.
  std::vector<baselines::SweepRow> rows;
};

/// Memoizing experiment state shared by stages and reports. Every trained
/// artifact is keyed by its settings and replicate, so reports that need the
/// same model train it once.
template <typename T>
class Workspace {
 public:
  explicit Workspace(ExperimentConfig cfg);
  Workspace(ExperimentConfig cfg, DataBundle data);

  const ExperimentConfig& config() const noexcept { return cfg_; }
  const DataBundle& data() const noexcept { return data_; }
  const skeleton::SkeletonGraph& graph() const noexcept { return *graph_; }
  std::shared_ptr<const skeleton::SkeletonGraph> graph_ptr() const noexcept { return graph_; }
  /// Fitted on all training windows.
  const repr::Normalizer& normalizer();
  const repr::WindowDataset<T>& train_windows();
  const repr::WindowDataset<T>& eval_windows();

  std::uint64_t replicate_seed(std::size_t replicate) const;

  const VaeRun<T>& vae(std::size_t latent_dim, bool aux, std::size_t replicate);
  /// Installs an externally trained encoder (e.g. loaded from a checkpoint).
  void install_vae(std::size_t latent_dim, bool aux, std::size_t replicate, repr::Vae<T> vae,
                   const repr::Normalizer& normalizer);
  const DrqnRun<T>& drqn(std::size_t latent_dim, std::size_t hidden, bool aux, std::size_t replicate);
  void install_drqn(std::size_t latent_dim, std::size_t hidden, bool aux, std::size_t replicate, drqn::QNet<T> net);
  const BaselineRun<T>& baselines(std::size_t replicate);

  /// Greedy Q-policy inside the packaging tree over the evaluation sessions.
  btree::TreeEvaluation evaluate_rl(const drqn::QNet<T>& net, const VaeRun<T>& vae) const;
  btree::TreeEvaluation evaluate_reactive() const;

  std::function<void(std::string_view)> log;

 private:
  struct VaeKey {
    std::size_t latent;
    bool aux;
    std::size_t replicate;
    auto operator<=>(const VaeKey&) const = default;
  };
  struct DrqnKey {
    VaeKey vae;
    std::size_t hidden;
    auto operator<=>(const DrqnKey&) const = default;
  };
  void note(const std::string& msg) const;
  VaeRun<T> encode_all(repr::Vae<T> vae, repr::VaeTrace trace);

  ExperimentConfig cfg_;
  DataBundle data_;
  std::shared_ptr<const skeleton::SkeletonGraph> graph_;
  std::optional<repr::Normalizer> normalizer_;
  std::optional<repr::WindowDataset<T>> train_windows_, eval_windows_;
  std::map<VaeKey, VaeRun<T>> vaes_;
  std::map<DrqnKey, DrqnRun<T>> drqns_;
  std::map<std::size_t, BaselineRun<T>> baselines_;
};

extern template class Workspace<float>;
extern template class Workspace<double>;

/// Comment lines embedded in every CSV: config hash plus a stage tag.
std::vector<std::string> provenance(const ExperimentConfig& cfg, std::string_view stage);
void write_table(const std::filesystem::path& path, const CsvTable& table);

CsvTable curve_table(std::span<const drqn::CurvePoint> curve);

// ---- file-based stages (the CLI subcommands) -------------------------------

/// out/data/{train,eval}/sNNNN.{skel,labels} plus out/data/manifest.txt.
void stage_gen_data(const ExperimentConfig& cfg);
/// Reads the sessions written by stage_gen_data; rejects a manifest written
/// for different data settings.
DataBundle load_data(const ExperimentConfig& cfg);
/// out/vae.ckpt, out/vae_trace.csv
void stage_train_vae(const ExperimentConfig& cfg);
/// out/drqn.ckpt, out/learning_curve.csv
void stage_train_drqn(const ExperimentConfig& cfg);
/// out/evaluation.csv (per phase) and out/evaluation_summary.csv
void stage_evaluate(const ExperimentConfig& cfg);

struct StageRecord {
  std::string stage;
  double seconds = 0.0;
};

struct RunRecord {
  std::string config_hash;
  std::vector<StageRecord> stages;
  std::vector<drqn::CurvePoint> curve;
  btree::TreeEvaluation final_eval;
};

/// gen-data -> train-vae -> train-drqn -> evaluate under cfg.out_dir.
RunRecord run_pipeline(const ExperimentConfig& cfg, const std::function<void(std::string_view)>& log = {});

}  // namespace pbt::harness
