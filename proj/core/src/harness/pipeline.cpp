#include "pbt/harness/pipeline.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "pbt/btree/packaging.hpp"
#include "pbt/btree/qnode.hpp"
#include "pbt/sim/session_io.hpp"

namespace pbt::harness {

namespace fs = std::filesystem;

StageError::StageError(std::string stage, const std::string& cause)
    : std::runtime_error(stage + ": " + cause), stage_(std::move(stage)) {}

DataBundle generate_data(const ExperimentConfig& cfg) {
  cfg.sim.validate();
  const std::uint64_t master = derive_seed(cfg.seed, "data");
  const auto train = sim::session_seeds(master, "train", cfg.data.train_sessions);
  const auto eval = sim::session_seeds(master, "eval", cfg.data.eval_sessions);
  return {std::make_shared<const std::vector<sim::Session>>(sim::generate_sessions(cfg.sim, train)),
          std::make_shared<const std::vector<sim::Session>>(sim::generate_sessions(cfg.sim, eval))};
}

template <typename T>
Workspace<T>::Workspace(ExperimentConfig cfg) : Workspace(cfg, generate_data(cfg)) {}

template <typename T>
Workspace<T>::Workspace(ExperimentConfig cfg, DataBundle data)
    : cfg_(std::move(cfg)), data_(std::move(data)),
      graph_(std::make_shared<const skeleton::SkeletonGraph>(skeleton::default_skeleton())) {
  cfg_.validate();
  require(data_.train && data_.eval && !data_.train->empty() && !data_.eval->empty(),
          "workspace: training and evaluation sessions are required");
  require(data_.train->size() >= cfg_.data.vae_sessions && data_.train->size() >= cfg_.data.classifier_sessions,
          "workspace: fewer training sessions than the VAE or classifier subsets");
}

template <typename T>
void Workspace<T>::note(const std::string& msg) const {
  if (log) log(msg);
}

template <typename T>
const repr::Normalizer& Workspace<T>::normalizer() {
  if (!normalizer_) {
    auto tr = repr::build_window_dataset<T>(*data_.train, *graph_);
    auto ev = repr::build_window_dataset<T>(*data_.eval, *graph_);
    normalizer_ = repr::Normalizer::fit(tr.windows);
    normalizer_->apply(tr.windows);
    normalizer_->apply(ev.windows);
    train_windows_ = std::move(tr);
    eval_windows_ = std::move(ev);
  }
  return *normalizer_;
}

template <typename T>
const repr::WindowDataset<T>& Workspace<T>::train_windows() {
  normalizer();
  return *train_windows_;
}

template <typename T>
const repr::WindowDataset<T>& Workspace<T>::eval_windows() {
  normalizer();
  return *eval_windows_;
}

template <typename T>
std::uint64_t Workspace<T>::replicate_seed(std::size_t replicate) const {
  return derive_seed(cfg_.seed, "replicate", replicate);
}

template <typename T>
VaeRun<T> Workspace<T>::encode_all(repr::Vae<T> vae, repr::VaeTrace trace) {
  VaeRun<T> run;
  const auto& tr = train_windows();
  const auto& ev = eval_windows();
  run.train_latents = std::make_shared<const drqn::LatentTable>(drqn::make_latent_table(
      std::span<const repr::WindowKey>(tr.keys), repr::encode_means(vae, tr.windows), *data_.train));
  run.eval_latents = std::make_shared<const drqn::LatentTable>(drqn::make_latent_table(
      std::span<const repr::WindowKey>(ev.keys), repr::encode_means(vae, ev.windows), *data_.eval));
  run.vae = std::make_shared<const repr::Vae<T>>(std::move(vae));
  run.trace = std::move(trace);
  return run;
}

template <typename T>
const VaeRun<T>& Workspace<T>::vae(std::size_t latent_dim, bool aux, std::size_t replicate) {
  const VaeKey key{latent_dim, aux, replicate};
  if (auto it = vaes_.find(key); it != vaes_.end()) return it->second;
  const auto& tr = train_windows();
  std::size_t n = 0;
  while (n < tr.size() && tr.keys[n].session < cfg_.data.vae_sessions) ++n;
  std::vector<std::size_t> rows(n);
  std::iota(rows.begin(), rows.end(), 0);
  const nn::Tensor<T> x = nn::gather_rows(tr.windows, std::span<const std::size_t>(rows));
  repr::VaeConfig vc = cfg_.vae;
  vc.latent_dim = latent_dim;
  const std::uint64_t seed = derive_seed(replicate_seed(replicate), "vae");
  note("train-vae latent=" + std::to_string(latent_dim) + (aux ? " aux" : "") + " replicate=" +
       std::to_string(replicate) + " windows=" + std::to_string(n));
  auto trained = aux ? repr::train_vae_with_aux(x, std::span<const int>(tr.activity.data(), n), *graph_, vc,
                                                cfg_.aux_lambda, seed)
                     : repr::train_vae(x, *graph_, vc, seed);
  return vaes_.emplace(key, encode_all(std::move(trained.model), std::move(trained.trace))).first->second;
}

template <typename T>
void Workspace<T>::install_vae(std::size_t latent_dim, bool aux, std::size_t replicate, repr::Vae<T> vae,
                               const repr::Normalizer& normalizer) {
  if (!(normalizer == this->normalizer()))
    throw FormatError("workspace: the encoder was fitted with a different normalization");
  require(vae.config().latent_dim == latent_dim, "workspace: encoder latent size mismatch");
  vaes_[VaeKey{latent_dim, aux, replicate}] = encode_all(std::move(vae), {});
}

template <typename T>
btree::TreeEvaluation Workspace<T>::evaluate_rl(const drqn::QNet<T>& net, const VaeRun<T>& vae) const {
  btree::Registry reg;
  btree::register_packaging_handles(reg);
  auto values = std::make_shared<btree::DrqnValueFunction<T>>(std::make_shared<const drqn::QNet<T>>(net),
                                                              std::make_shared<btree::TableLatents>(vae.eval_latents));
  reg.add_policy("drqn", std::make_shared<btree::QValuePolicy>(values, cfg_.drqn.eval_min_value));
  const auto tree = btree::build_packaging_tree("drqn");
  return btree::evaluate_tree(*tree, reg, *data_.eval);
}

template <typename T>
btree::TreeEvaluation Workspace<T>::evaluate_reactive() const {
  btree::Registry reg;
  btree::register_packaging_handles(reg);
  const auto tree = btree::build_reactive_tree();
  return btree::evaluate_tree(*tree, reg, *data_.eval);
}

template <typename T>
const DrqnRun<T>& Workspace<T>::drqn(std::size_t latent_dim, std::size_t hidden, bool aux, std::size_t replicate) {
  const DrqnKey key{{latent_dim, aux, replicate}, hidden};
  if (auto it = drqns_.find(key); it != drqns_.end()) return it->second;
  const VaeRun<T>& v = vae(latent_dim, aux, replicate);
  drqn::PackagingEnv env(data_.train, v.train_latents, data_.eval, v.eval_latents);
  drqn::QNetConfig qc;
  qc.input_dim = env.observation_dim();
  qc.hidden = hidden;
  note("train-drqn latent=" + std::to_string(latent_dim) + " hidden=" + std::to_string(hidden) + (aux ? " aux" : "") +
       " replicate=" + std::to_string(replicate));
  auto trained = drqn::train_drqn<T>(env, qc, cfg_.drqn, derive_seed(replicate_seed(replicate), "drqn"));
  DrqnRun<T> run;
  run.final_eval = evaluate_rl(trained.net, v);
  run.net = std::make_shared<const drqn::QNet<T>>(std::move(trained.net));
  run.curve = std::move(trained.curve);
  return drqns_.emplace(key, std::move(run)).first->second;
}

template <typename T>
void Workspace<T>::install_drqn(std::size_t latent_dim, std::size_t hidden, bool aux, std::size_t replicate,
                                drqn::QNet<T> net) {
  const VaeRun<T>& v = vae(latent_dim, aux, replicate);
  DrqnRun<T> run;
  run.final_eval = evaluate_rl(net, v);
  run.net = std::make_shared<const drqn::QNet<T>>(std::move(net));
  drqns_[DrqnKey{{latent_dim, aux, replicate}, hidden}] = std::move(run);
}

template <typename T>
const BaselineRun<T>& Workspace<T>::baselines(std::size_t replicate) {
  if (auto it = baselines_.find(replicate); it != baselines_.end()) return it->second;
  const std::vector<sim::Session> subset(data_.train->begin(),
                                         data_.train->begin() + static_cast<std::ptrdiff_t>(cfg_.data.classifier_sessions));
  const auto seqs = baselines::build_phase_sequences<T>(subset, *graph_, normalizer());
  const auto& bc = cfg_.baselines;
  const std::uint64_t rs = replicate_seed(replicate);
  BaselineRun<T> run;
  note("train-classifier replicate=" + std::to_string(replicate));
  run.single = std::make_shared<const baselines::Classifier<T>>(
      baselines::train_classifier(seqs, *graph_, bc.classifier, derive_seed(rs, "classifier")));
  note("train-bootstrap replicate=" + std::to_string(replicate) + " k=" + std::to_string(bc.bootstrap_models));
  for (auto& m : baselines::train_bootstrap(seqs, *graph_, bc.classifier, bc.bootstrap_models, derive_seed(rs, "bootstrap")))
    run.bootstrap.push_back(std::make_shared<const baselines::Classifier<T>>(std::move(m)));

  using baselines::UncertaintyMethod;
  for (auto method : {UncertaintyMethod::Dropout, UncertaintyMethod::Bootstrap, UncertaintyMethod::Both}) {
    auto members = method == UncertaintyMethod::Dropout
                       ? std::vector<std::shared_ptr<const baselines::Classifier<T>>>{run.single}
                       : run.bootstrap;
    auto predictor = std::make_shared<baselines::EnsemblePredictor<T>>(
        std::move(members), baselines::UncertaintySpec{method, bc.dropout_passes}, normalizer(), graph_,
        derive_seed(rs, "mc-dropout"));
    auto rows = baselines::threshold_sweep(predictor, std::span<const double>(bc.taus), *data_.eval);
    run.rows.insert(run.rows.end(), rows.begin(), rows.end());
  }
  return baselines_.emplace(replicate, std::move(run)).first->second;
}

template class Workspace<float>;
template class Workspace<double>;

std::vector<std::string> provenance(const ExperimentConfig& cfg, std::string_view stage) {
  return {"config_hash = " + cfg.hash_hex(), "stage = " + std::string(stage)};
}

void write_table(const fs::path& path, const CsvTable& table) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  if (!os) throw FormatError("cannot write " + path.string());
  table.write(os);
}

CsvTable curve_table(std::span<const drqn::CurvePoint> curve) {
  CsvTable t;
  t.header = {"iteration", "mean_reward", "std_reward", "epsilon", "mean_td_loss"};
  for (const auto& c : curve)
    t.add_row({std::to_string(c.iteration), format_real(c.mean_reward), format_real(c.std_reward),
               format_real(c.epsilon), format_real(c.mean_td_loss)});
  return t;
}

// ---- file stages -------------------------------------------------------------

namespace {

const std::initializer_list<std::string_view> kDataKeys{"seed", "sim.", "data."};
const std::initializer_list<std::string_view> kVaeKeys{"seed", "sim.", "data.", "vae.", "precision"};
const std::initializer_list<std::string_view> kDrqnKeys{"seed", "sim.", "data.", "vae.", "precision", "qnet.", "drqn."};

std::string session_name(std::size_t i) {
  std::string digits = std::to_string(i);
  if (digits.size() < 4) digits.insert(0, 4 - digits.size(), '0');
  return "s" + digits;
}

template <typename T>
repr::Vae<T> load_vae(const ExperimentConfig& cfg, const skeleton::SkeletonGraph& graph, repr::Normalizer* norm) {
  const Checkpoint ck = load_checkpoint(cfg.out_dir / "vae.ckpt");
  check_compatible(ck, "vae", cfg, kVaeKeys);
  repr::Vae<T> vae(cfg.vae, graph, 0);
  get_params(ck, vae.params());
  if (norm) *norm = get_normalizer(ck);
  return vae;
}

template <typename T>
drqn::QNet<T> load_qnet(const ExperimentConfig& cfg) {
  const Checkpoint ck = load_checkpoint(cfg.out_dir / "drqn.ckpt");
  check_compatible(ck, "drqn", cfg, kDrqnKeys);
  drqn::QNetConfig qc;
  qc.input_dim = cfg.vae.latent_dim + btree::kContextDim;
  qc.hidden = cfg.q_hidden;
  drqn::QNet<T> net(qc, 0);
  get_params(ck, net.params());
  return net;
}

template <typename T>
void train_vae_impl(const ExperimentConfig& cfg) {
  Workspace<T> ws(cfg, load_data(cfg));
  const auto& run = ws.vae(cfg.vae.latent_dim, false, 0);
  Checkpoint ck = make_checkpoint("vae", cfg);
  put_params(ck, run.vae->params());
  put_normalizer(ck, ws.normalizer());
  save_checkpoint(cfg.out_dir / "vae.ckpt", ck);
  CsvTable t;
  t.comments = provenance(cfg, "train-vae");
  t.comments.push_back("initial_total = " + format_real(run.trace.initial_total));
  t.header = {"epoch", "total", "recon", "kl", "aux", "aux_accuracy"};
  for (std::size_t e = 0; e < run.trace.epochs.size(); ++e) {
    const auto& s = run.trace.epochs[e];
    t.add_row({std::to_string(e), format_real(s.total), format_real(s.recon), format_real(s.kl), format_real(s.aux),
               format_real(s.aux_accuracy)});
  }
  write_table(cfg.out_dir / "vae_trace.csv", t);
}

template <typename T>
void train_drqn_impl(const ExperimentConfig& cfg) {
  Workspace<T> ws(cfg, load_data(cfg));
  repr::Normalizer norm;
  auto vae = load_vae<T>(cfg, ws.graph(), &norm);
  ws.install_vae(cfg.vae.latent_dim, false, 0, std::move(vae), norm);
  const auto& run = ws.drqn(cfg.vae.latent_dim, cfg.q_hidden, false, 0);
  Checkpoint ck = make_checkpoint("drqn", cfg);
  put_params(ck, run.net->params());
  save_checkpoint(cfg.out_dir / "drqn.ckpt", ck);
  CsvTable t = curve_table(run.curve);
  t.comments = provenance(cfg, "train-drqn");
  write_table(cfg.out_dir / "learning_curve.csv", t);
}

template <typename T>
void evaluate_impl(const ExperimentConfig& cfg) {
  Workspace<T> ws(cfg, load_data(cfg));
  repr::Normalizer norm;
  auto vae = load_vae<T>(cfg, ws.graph(), &norm);
  ws.install_vae(cfg.vae.latent_dim, false, 0, std::move(vae), norm);
  ws.install_drqn(cfg.vae.latent_dim, cfg.q_hidden, false, 0, load_qnet<T>(cfg));
  const auto& run = ws.drqn(cfg.vae.latent_dim, cfg.q_hidden, false, 0);

  // Per-phase detail from the same tree evaluation.
  CsvTable phases;
  phases.comments = provenance(cfg, "evaluate");
  phases.header = {"session", "phase", "kind", "reward"};
  std::size_t row = 0;
  for (std::size_t s = 0; s < ws.data().eval->size(); ++s) {
    const auto& script = (*ws.data().eval)[s].script;
    for (std::size_t p = 0; p < script.phases.size(); ++p)
      phases.add_row({std::to_string(s), std::to_string(p), std::string(sim::phase_type_name(script.phases[p].kind.type)),
                      format_real(run.final_eval.rewards.at(row++))});
  }
  write_table(cfg.out_dir / "evaluation.csv", phases);

  double oracle = 0.0;
  for (const auto& s : *ws.data().eval) oracle += sim::oracle_return(s.script, 1, s.window_seconds());
  oracle /= static_cast<double>(ws.data().eval->size());
  const auto reactive = ws.evaluate_reactive();
  CsvTable sum;
  sum.comments = provenance(cfg, "evaluate");
  sum.header = {"policy", "mean_reward", "std_reward", "act_rate", "error_rate"};
  const auto add = [&](std::string name, const btree::TreeEvaluation& e) {
    sum.add_row({std::move(name), format_real(e.mean_reward), format_real(e.std_reward), format_real(e.act_rate),
                 format_real(e.error_rate)});
  };
  add("drqn", run.final_eval);
  add("reactive", reactive);
  sum.add_row({"oracle_reaction_1", format_real(oracle), "", "", ""});
  write_table(cfg.out_dir / "evaluation_summary.csv", sum);
}

}  // namespace

void stage_gen_data(const ExperimentConfig& cfg) {
  run_stage("gen-data", [&] {
    cfg.validate();
    const DataBundle data = generate_data(cfg);
    const fs::path dir = cfg.out_dir / "data";
    for (const auto& [split, sessions] : {std::pair{"train", data.train}, std::pair{"eval", data.eval}}) {
      fs::create_directories(dir / split);
      for (std::size_t i = 0; i < sessions->size(); ++i) sim::write_session(dir / split, session_name(i), (*sessions)[i]);
    }
    std::ofstream os(dir / "manifest.txt", std::ios::binary);
    for (const auto& c : provenance(cfg, "gen-data")) os << "# " << c << '\n';
    os << cfg.section_text(kDataKeys);
    if (!os) throw FormatError("cannot write manifest");
  });
}

DataBundle load_data(const ExperimentConfig& cfg) {
  return run_stage("load-data", [&] {
    const fs::path dir = cfg.out_dir / "data";
    std::ifstream is(dir / "manifest.txt");
    if (!is) throw FormatError("no data under " + dir.string() + " (run gen-data first)");
    std::string text, line;
    while (std::getline(is, line))
      if (line.rfind("#", 0) != 0) text += line + '\n';
    if (parse_config(text).section_text(kDataKeys) != cfg.section_text(kDataKeys))
      throw FormatError("data under " + dir.string() + " was generated with different sim/data settings");
    const auto read = [&](const char* split, std::size_t n) {
      auto out = std::make_shared<std::vector<sim::Session>>();
      for (std::size_t i = 0; i < n; ++i) out->push_back(sim::read_session(sim::session_files(dir / split, session_name(i))));
      return std::shared_ptr<const std::vector<sim::Session>>(std::move(out));
    };
    return DataBundle{read("train", cfg.data.train_sessions), read("eval", cfg.data.eval_sessions)};
  });
}

void stage_train_vae(const ExperimentConfig& cfg) {
  run_stage("train-vae", [&] { cfg.precision == 64 ? train_vae_impl<double>(cfg) : train_vae_impl<float>(cfg); });
}

void stage_train_drqn(const ExperimentConfig& cfg) {
  run_stage("train-drqn", [&] { cfg.precision == 64 ? train_drqn_impl<double>(cfg) : train_drqn_impl<float>(cfg); });
}

void stage_evaluate(const ExperimentConfig& cfg) {
  run_stage("evaluate", [&] { cfg.precision == 64 ? evaluate_impl<double>(cfg) : evaluate_impl<float>(cfg); });
}

RunRecord run_pipeline(const ExperimentConfig& cfg, const std::function<void(std::string_view)>& log) {
  cfg.validate();
  RunRecord rec;
  rec.config_hash = cfg.hash_hex();
  const std::pair<const char*, void (*)(const ExperimentConfig&)> stages[] = {
      {"gen-data", stage_gen_data}, {"train-vae", stage_train_vae}, {"train-drqn", stage_train_drqn},
      {"evaluate", stage_evaluate}};
  for (const auto& [name, fn] : stages) {
    if (log) log(std::string("stage ") + name);
    const auto t0 = std::chrono::steady_clock::now();
    fn(cfg);
    rec.stages.push_back({name, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()});
  }
  run_stage("report", [&] {
    std::ifstream is(cfg.out_dir / "learning_curve.csv");
    for (const auto& r : read_csv(is).rows)
      rec.curve.push_back({std::stoul(r[0]), std::stod(r[1]), std::stod(r[2]), std::stod(r[3]), std::stod(r[4])});
    std::ifstream ps(cfg.out_dir / "evaluation.csv");
    for (const auto& r : read_csv(ps).rows) rec.final_eval.rewards.push_back(std::stod(r[3]));
    std::ifstream ss(cfg.out_dir / "evaluation_summary.csv");
    const auto sum = read_csv(ss);
    const auto& d = sum.rows.at(0);
    rec.final_eval.mean_reward = std::stod(d[1]);
    rec.final_eval.std_reward = std::stod(d[2]);
    rec.final_eval.act_rate = std::stod(d[3]);
    rec.final_eval.error_rate = std::stod(d[4]);
  });
  return rec;
}

}  // namespace pbt::harness
