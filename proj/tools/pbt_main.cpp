// pbt: command line front end for the experiment stages.

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "pbt/harness/experiments.hpp"
#include "pbt/harness/pipeline.hpp"

namespace {

using pbt::harness::ExperimentConfig;

struct CommonOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<int> precision;
  std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--config", o.config, "Config file of `key = value` lines")->check(CLI::ExistingFile);
  cmd->add_option("--seed", o.seed, "Master seed");
  cmd->add_option("--out", o.out, "Output directory");
  cmd->add_option("--precision", o.precision, "Floating point width")->check(CLI::IsMember({32, 64}));
  cmd->add_option("--set", o.overrides, "Override one setting, e.g. --set drqn.iterations=50");
}

ExperimentConfig resolve(const CommonOptions& o) {
  ExperimentConfig cfg = o.config.empty() ? ExperimentConfig{} : pbt::harness::load_config(o.config);
  for (const auto& kv : o.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw pbt::FormatError("--set expects key=value, got '" + kv + "'");
    cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (o.seed) cfg.seed = *o.seed;
  if (o.precision) cfg.precision = *o.precision;
  if (o.out) cfg.out_dir = *o.out;
  cfg.validate();
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Proactive behavior tree experiments"};
  app.require_subcommand(1);
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "Progress messages on stderr");

  struct Command {
    const char* name;
    const char* help;
    void (*run)(const ExperimentConfig&);
  };
  const Command commands[] = {
      {"gen-data", "Generate train and eval sessions", pbt::harness::stage_gen_data},
      {"train-vae", "Train the window encoder", pbt::harness::stage_train_vae},
      {"train-drqn", "Train the recurrent Q-network on encoded windows", pbt::harness::stage_train_drqn},
      {"evaluate", "Run the trained policy inside the packaging tree", pbt::harness::stage_evaluate},
      {"proactivity", "RL return against the reactive and oracle references", pbt::harness::stage_proactivity},
      {"benchmark", "RL against uncertainty-gated classifier baselines", pbt::harness::stage_benchmark},
      {"sweep", "Latent size by hidden size learning curves", pbt::harness::stage_sweep},
      {"aux-compare", "Unsupervised against auxiliary-loss encoder", pbt::harness::stage_aux_compare},
  };
  CommonOptions opts;
  std::vector<std::pair<CLI::App*, const Command*>> subs;
  for (const auto& c : commands) {
    auto* cmd = app.add_subcommand(c.name, c.help);
    add_common(cmd, opts);
    subs.emplace_back(cmd, &c);
  }
  auto* show = app.add_subcommand("show-config", "Print the resolved configuration and its hash");
  add_common(show, opts);

  CLI11_PARSE(app, argc, argv);

  try {
    const ExperimentConfig cfg = resolve(opts);
    if (show->parsed()) {
      std::cout << "# config_hash = " << cfg.hash_hex() << '\n' << cfg.to_text();
      return 0;
    }
    for (const auto& [cmd, c] : subs) {
      if (!cmd->parsed()) continue;
      if (verbose) std::cerr << c->name << ": config " << cfg.hash_hex() << ", out " << cfg.out_dir.string() << '\n';
      c->run(cfg);
      if (verbose) std::cerr << c->name << ": done\n";
    }
  } catch (const pbt::harness::StageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: config: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
