#include "pbt/harness/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <iterator>
#include <sstream>

#include "pbt/baselines/sweep.hpp"
#include "pbt/csv.hpp"
#include "pbt/numcore/rng.hpp"

namespace pbt::harness {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value) {
  throw FormatError("config: invalid value '" + std::string(value) + "' for " + std::string(key));
}

template <typename U>
U parse_number(std::string_view key, std::string_view s) {
  U v{};
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc{} || r.ptr != s.data() + s.size()) bad_value(key, s);
  return v;
}

template <typename U>
std::vector<U> parse_list(std::string_view key, std::string_view s) {
  std::vector<U> out;
  std::istringstream is{std::string(s)};
  for (std::string item; std::getline(is, item, ',');) out.push_back(parse_number<U>(key, trim(item)));
  if (out.empty()) bad_value(key, s);
  return out;
}

template <typename U>
std::string show(U v) {
  if constexpr (std::is_floating_point_v<U>)
    return format_real(v);
  else
    return std::to_string(v);
}

template <typename U>
std::string show_list(const std::vector<U>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + show(v[i]);
  return s;
}

struct Field {
  std::string key;
  std::function<std::string(const ExperimentConfig&)> get;
  std::function<void(ExperimentConfig&, std::string_view)> set;
};

template <typename U, typename Ref>
Field num(std::string key, Ref ref) {
  return {key, [ref](const ExperimentConfig& c) { return show<U>(ref(c)); },
          [ref, key](ExperimentConfig& c, std::string_view v) { ref(c) = parse_number<U>(key, v); }};
}

template <typename U, typename Ref>
Field list(std::string key, Ref ref) {
  return {key, [ref](const ExperimentConfig& c) { return show_list<U>(ref(c)); },
          [ref, key](ExperimentConfig& c, std::string_view v) { ref(c) = parse_list<U>(key, v); }};
}

template <typename U, std::size_t N, typename Ref>
Field array(std::string key, Ref ref) {
  return {key,
          [ref](const ExperimentConfig& c) {
            const auto& a = ref(c);
            return show_list<U>(std::vector<U>(a.begin(), a.end()));
          },
          [ref, key](ExperimentConfig& c, std::string_view v) {
            const auto l = parse_list<U>(key, v);
            if (l.size() != N) bad_value(key, v);
            std::copy(l.begin(), l.end(), ref(c).begin());
          }};
}

#define PBT_REF(expr) [](auto& c) -> auto& { return c.expr; }

const std::vector<Field>& fields() {
  using sz = std::size_t;
  static const std::vector<Field> f = {
      num<std::uint64_t>("seed", PBT_REF(seed)),
      num<sz>("replicates", PBT_REF(replicates)),
      num<int>("precision", PBT_REF(precision)),
      num<double>("sim.fps", PBT_REF(sim.fps)),
      num<double>("sim.noise_sigma", PBT_REF(sim.noise_sigma)),
      num<double>("sim.cue_onset_fraction", PBT_REF(sim.cue_onset_fraction)),
      num<double>("sim.box_delivery_seconds", PBT_REF(sim.box_delivery_seconds)),
      num<double>("sim.bubble_wrap_seconds", PBT_REF(sim.bubble_wrap_seconds)),
      num<double>("sim.wrap_up_seconds", PBT_REF(sim.wrap_up_seconds)),
      num<int>("sim.max_bubble_wrap_phases", PBT_REF(sim.max_bubble_wrap_phases)),
      num<double>("sim.continue_probability", PBT_REF(sim.continue_probability)),
      num<sz>("data.train_sessions", PBT_REF(data.train_sessions)),
      num<sz>("data.eval_sessions", PBT_REF(data.eval_sessions)),
      num<sz>("data.vae_sessions", PBT_REF(data.vae_sessions)),
      num<sz>("data.classifier_sessions", PBT_REF(data.classifier_sessions)),
      num<sz>("vae.latent_dim", PBT_REF(vae.latent_dim)),
      num<double>("vae.beta", PBT_REF(vae.beta)),
      array<sz, 4>("vae.trunk_widths", PBT_REF(vae.trunk.widths)),
      array<sz, 4>("vae.trunk_strides", PBT_REF(vae.trunk.strides)),
      num<sz>("vae.trunk_kernel", PBT_REF(vae.trunk.kernel)),
      num<sz>("vae.decoder_seed_frames", PBT_REF(vae.decoder_seed_frames)),
      array<sz, 2>("vae.decoder_channels", PBT_REF(vae.decoder_channels)),
      num<sz>("vae.decoder_kernel", PBT_REF(vae.decoder_kernel)),
      num<sz>("vae.decoder_stride", PBT_REF(vae.decoder_stride)),
      num<double>("vae.logvar_min", PBT_REF(vae.logvar_min)),
      num<double>("vae.logvar_max", PBT_REF(vae.logvar_max)),
      num<double>("vae.logvar_bias_init", PBT_REF(vae.logvar_bias_init)),
      num<sz>("vae.epochs", PBT_REF(vae.epochs)),
      num<sz>("vae.batch_size", PBT_REF(vae.batch_size)),
      num<double>("vae.learning_rate", PBT_REF(vae.learning_rate)),
      num<sz>("qnet.hidden", PBT_REF(q_hidden)),
      num<double>("drqn.gamma", PBT_REF(drqn.gamma)),
      num<sz>("drqn.iterations", PBT_REF(drqn.iterations)),
      num<sz>("drqn.updates_per_iteration", PBT_REF(drqn.updates_per_iteration)),
      num<sz>("drqn.batch_size", PBT_REF(drqn.batch_size)),
      num<double>("drqn.epsilon_start", PBT_REF(drqn.epsilon_start)),
      num<double>("drqn.epsilon_end", PBT_REF(drqn.epsilon_end)),
      num<sz>("drqn.epsilon_decay_iterations", PBT_REF(drqn.epsilon_decay_iterations)),
      num<sz>("drqn.episodes_per_iteration", PBT_REF(drqn.episodes_per_iteration)),
      num<sz>("drqn.replay_capacity", PBT_REF(drqn.replay_capacity)),
      num<double>("drqn.learning_rate", PBT_REF(drqn.learning_rate)),
      num<double>("drqn.eval_min_value", PBT_REF(drqn.eval_min_value)),
      num<sz>("drqn.eval_interval", PBT_REF(drqn.eval_interval)),
      num<sz>("baselines.feature_dim", PBT_REF(baselines.classifier.feature_dim)),
      num<sz>("baselines.lstm_hidden", PBT_REF(baselines.classifier.lstm_hidden)),
      num<sz>("baselines.dense_hidden", PBT_REF(baselines.classifier.dense_hidden)),
      num<double>("baselines.dropout", PBT_REF(baselines.classifier.dropout)),
      num<sz>("baselines.epochs", PBT_REF(baselines.classifier.epochs)),
      num<sz>("baselines.batch_phases", PBT_REF(baselines.classifier.batch_phases)),
      num<double>("baselines.learning_rate", PBT_REF(baselines.classifier.learning_rate)),
      num<sz>("baselines.bootstrap_models", PBT_REF(baselines.bootstrap_models)),
      num<sz>("baselines.dropout_passes", PBT_REF(baselines.dropout_passes)),
      list<double>("baselines.taus", PBT_REF(baselines.taus)),
      list<sz>("sweep.latent_dims", PBT_REF(sweep.latent_dims)),
      list<sz>("sweep.hidden_sizes", PBT_REF(sweep.hidden_sizes)),
      num<double>("aux.lambda", PBT_REF(aux_lambda)),
  };
  return f;
}

#undef PBT_REF

}  // namespace

ExperimentConfig::ExperimentConfig() { baselines.taus = baselines::default_tau_grid(); }

void ExperimentConfig::validate() const {
  require(replicates >= 1, "config: replicates must be >= 1");
  require(precision == 32 || precision == 64, "config: precision must be 32 or 64");
  sim.validate();
  require(data.train_sessions >= 1 && data.eval_sessions >= 1, "config: need training and evaluation sessions");
  require(data.vae_sessions >= 1 && data.vae_sessions <= data.train_sessions,
          "config: data.vae_sessions must lie in [1, data.train_sessions]");
  require(data.classifier_sessions >= 1 && data.classifier_sessions <= data.train_sessions,
          "config: data.classifier_sessions must lie in [1, data.train_sessions]");
  vae.validate();
  require(q_hidden >= 1, "config: qnet.hidden must be >= 1");
  drqn.validate();
  baselines.classifier.validate();
  require(baselines.bootstrap_models >= 2, "config: baselines.bootstrap_models must be >= 2");
  require(baselines.dropout_passes >= 2, "config: baselines.dropout_passes must be >= 2");
  require(!baselines.taus.empty(), "config: baselines.taus must not be empty");
  for (double t : baselines.taus) require(t >= 0.0, "config: thresholds must be >= 0");
  require(!sweep.latent_dims.empty() && !sweep.hidden_sizes.empty(), "config: sweep grids must not be empty");
  require(aux_lambda >= 0.0, "config: aux.lambda must be >= 0");
}

std::string ExperimentConfig::to_text() const {
  std::string s;
  for (const auto& f : fields()) s += f.key + " = " + f.get(*this) + "\n";
  return s;
}

std::string ExperimentConfig::section_text(std::initializer_list<std::string_view> prefixes) const {
  std::string s;
  for (const auto& f : fields())
    for (auto p : prefixes)
      if (f.key.rfind(p, 0) == 0) {
        s += f.key + " = " + f.get(*this) + "\n";
        break;
      }
  return s;
}

std::uint64_t ExperimentConfig::hash() const { return fnv1a64(to_text()); }
std::string ExperimentConfig::hash_hex() const { return hex64(hash()); }

void ExperimentConfig::set(std::string_view key, std::string_view value) {
  if (key == "out_dir") {
    out_dir = std::string(value);
    return;
  }
  for (const auto& f : fields())
    if (f.key == key) {
      f.set(*this, trim(value));
      return;
    }
  throw FormatError("config: unknown key '" + std::string(key) + "'");
}

std::vector<std::string> ExperimentConfig::keys() const {
  std::vector<std::string> k;
  for (const auto& f : fields()) k.push_back(f.key);
  return k;
}

ExperimentConfig parse_config(std::string_view text, ExperimentConfig base) {
  std::istringstream is{std::string(text)};
  std::string line;
  for (std::size_t n = 1; std::getline(is, line); ++n) {
    if (const auto h = line.find('#'); h != std::string::npos) line.erase(h);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw FormatError("config line " + std::to_string(n) + ": expected key = value");
    base.set(trim(std::string_view(t).substr(0, eq)), trim(std::string_view(t).substr(eq + 1)));
  }
  return base;
}

ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base) {
  std::ifstream is(path);
  if (!is) throw FormatError("config: cannot open " + path.string());
  const std::string text{std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
  return parse_config(text, std::move(base));
}

std::string hex64(std::uint64_t v) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) s[static_cast<std::size_t>(i)] = digits[v & 0xf];
  return s;
}

}  // namespace pbt::harness
