#include "pbt/harness/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "pbt/btree/context.hpp"

namespace pbt::harness {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

namespace {

constexpr char kMagic[4] = {'P', 'B', 'T', '1'};
constexpr std::uint64_t kMaxLength = std::uint64_t{1} << 32;

template <typename U>
void put(std::ostream& os, U v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

void put_str(std::ostream& os, std::string_view s) {
  put<std::uint64_t>(os, s.size());
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

template <typename U>
U get(std::istream& is) {
  U v{};
  if (!is.read(reinterpret_cast<char*>(&v), sizeof v)) throw FormatError("checkpoint: truncated");
  return v;
}

std::string get_str(std::istream& is) {
  const auto n = get<std::uint64_t>(is);
  if (n > kMaxLength) throw FormatError("checkpoint: string length out of range");
  std::string s(n, '\0');
  if (!is.read(s.data(), static_cast<std::streamsize>(n))) throw FormatError("checkpoint: truncated");
  return s;
}

}  // namespace

const nn::Tensor<double>& Checkpoint::tensor(std::string_view name) const {
  for (const auto& [n, t] : tensors)
    if (n == name) return t;
  throw FormatError("checkpoint: missing tensor '" + std::string(name) + "'");
}

void Checkpoint::add_tensor(std::string name, nn::Tensor<double> t) {
  for (const auto& [n, _] : tensors) require(n != name, "checkpoint: duplicate tensor '" + name + "'");
  tensors.emplace_back(std::move(name), std::move(t));
}

void write_checkpoint(std::ostream& os, const Checkpoint& ck) {
  os.write(kMagic, 4);
  put<std::uint32_t>(os, kCheckpointVersion);
  put_str(os, ck.kind);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(ck.precision));
  put<std::uint32_t>(os, static_cast<std::uint32_t>(ck.context_version));
  put_str(os, ck.config_text);
  put<std::uint64_t>(os, ck.meta.size());
  for (const auto& [k, v] : ck.meta) {
    put_str(os, k);
    put_str(os, v);
  }
  put<std::uint64_t>(os, ck.tensors.size());
  for (const auto& [name, t] : ck.tensors) {
    put_str(os, name);
    put<std::uint32_t>(os, static_cast<std::uint32_t>(t.rank()));
    for (auto d : t.shape()) put<std::uint64_t>(os, d);
    os.write(reinterpret_cast<const char*>(t.raw()), static_cast<std::streamsize>(t.size() * sizeof(double)));
  }
  if (!os) throw FormatError("checkpoint: write failed");
}

Checkpoint read_checkpoint(std::istream& is) {
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) throw FormatError("checkpoint: bad magic");
  const auto version = get<std::uint32_t>(is);
  if (version != kCheckpointVersion)
    throw FormatError("checkpoint: unsupported format version " + std::to_string(version));
  Checkpoint ck;
  ck.kind = get_str(is);
  ck.precision = static_cast<int>(get<std::uint32_t>(is));
  ck.context_version = static_cast<int>(get<std::uint32_t>(is));
  ck.config_text = get_str(is);
  const auto nmeta = get<std::uint64_t>(is);
  if (nmeta > kMaxLength) throw FormatError("checkpoint: metadata count out of range");
  for (std::uint64_t i = 0; i < nmeta; ++i) {
    auto k = get_str(is);
    ck.meta[k] = get_str(is);
  }
  const auto ntensors = get<std::uint64_t>(is);
  if (ntensors > kMaxLength) throw FormatError("checkpoint: tensor count out of range");
  for (std::uint64_t i = 0; i < ntensors; ++i) {
    auto name = get_str(is);
    const auto rank = get<std::uint32_t>(is);
    if (rank > 8) throw FormatError("checkpoint: tensor rank out of range");
    nn::Shape shape(rank);
    std::uint64_t count = 1;
    for (auto& d : shape) {
      d = get<std::uint64_t>(is);
      count *= d;
      if (count > kMaxLength) throw FormatError("checkpoint: tensor too large");
    }
    nn::Tensor<double> t(shape);
    if (!is.read(reinterpret_cast<char*>(t.raw()), static_cast<std::streamsize>(t.size() * sizeof(double))))
      throw FormatError("checkpoint: truncated");
    ck.tensors.emplace_back(std::move(name), std::move(t));
  }
  if (is.peek() != std::char_traits<char>::eof()) throw FormatError("checkpoint: trailing bytes");
  return ck;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ck) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw FormatError("checkpoint: cannot write " + path.string());
  write_checkpoint(os, ck);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError("checkpoint: cannot open " + path.string());
  return read_checkpoint(is);
}

Checkpoint make_checkpoint(std::string kind, const ExperimentConfig& cfg) {
  Checkpoint ck;
  ck.kind = std::move(kind);
  ck.precision = cfg.precision;
  ck.context_version = btree::kContextVersion;
  ck.config_text = cfg.to_text();
  ck.meta["config_hash"] = cfg.hash_hex();
  return ck;
}

void check_compatible(const Checkpoint& ck, std::string_view kind, const ExperimentConfig& cfg,
                      std::initializer_list<std::string_view> prefixes) {
  if (ck.kind != kind) throw FormatError("checkpoint: expected a " + std::string(kind) + " model, found " + ck.kind);
  if (ck.precision != cfg.precision)
    throw FormatError("checkpoint: stored at " + std::to_string(ck.precision) + "-bit, requested " +
                      std::to_string(cfg.precision) + "-bit");
  if (ck.context_version != btree::kContextVersion)
    throw FormatError("checkpoint: context layout version " + std::to_string(ck.context_version) + " != " +
                      std::to_string(btree::kContextVersion));
  const ExperimentConfig stored = parse_config(ck.config_text);
  const std::string a = stored.section_text(prefixes), b = cfg.section_text(prefixes);
  if (a == b) return;
  std::istringstream sa(a), sb(b);
  std::string la, lb;
  while (std::getline(sa, la) && std::getline(sb, lb))
    if (la != lb) break;
  throw FormatError("checkpoint: configuration mismatch (stored '" + la + "', requested '" + lb + "')");
}

template <typename T>
void put_params(Checkpoint& ck, const nn::ParamSet<T>& params) {
  for (const auto& p : params) ck.add_tensor(p.name, nn::tensor_cast<double>(p.value));
}

template <typename T>
void get_params(const Checkpoint& ck, nn::ParamSet<T>& params) {
  for (auto& p : params) {
    const auto& t = ck.tensor(p.name);
    if (t.shape() != p.value.shape())
      throw FormatError("checkpoint: shape of '" + p.name + "' is " + nn::to_string(t.shape()) + ", model expects " +
                        nn::to_string(p.value.shape()));
    p.value = nn::tensor_cast<T>(t);
  }
}

void put_normalizer(Checkpoint& ck, const repr::Normalizer& n) {
  require(n.fitted(), "put_normalizer: normalizer is not fitted");
  ck.add_tensor("normalizer.mean", nn::Tensor<double>({n.joints, n.channels}, n.mean));
  ck.add_tensor("normalizer.std", nn::Tensor<double>({n.joints, n.channels}, n.stddev));
}

repr::Normalizer get_normalizer(const Checkpoint& ck) {
  const auto& m = ck.tensor("normalizer.mean");
  const auto& s = ck.tensor("normalizer.std");
  if (m.rank() != 2 || s.shape() != m.shape()) throw FormatError("checkpoint: malformed normalizer");
  repr::Normalizer n;
  n.joints = m.dim(0);
  n.channels = m.dim(1);
  n.mean.assign(m.values().begin(), m.values().end());
  n.stddev.assign(s.values().begin(), s.values().end());
  return n;
}

template void put_params(Checkpoint&, const nn::ParamSet<float>&);
template void put_params(Checkpoint&, const nn::ParamSet<double>&);
template void get_params(const Checkpoint&, nn::ParamSet<float>&);
template void get_params(const Checkpoint&, nn::ParamSet<double>&);

}  // namespace pbt::harness
