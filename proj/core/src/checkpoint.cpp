#include "gps/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <map>

#include "gps/error.hpp"

namespace gps {

namespace {

constexpr char kMagic[8] = {'G', 'P', 'S', 'C', 'K', 'P', 'T', '\0'};
constexpr std::uint32_t kVersion = 1;

void write_u32(std::ostream& out, std::uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

void write_u64(std::ostream& out, std::uint64_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

struct Reader {
  std::ifstream in;
  std::string path;

  void read_raw(void* dst, std::size_t len) {
    in.read(reinterpret_cast<char*>(dst), static_cast<std::streamsize>(len));
    if (in.gcount() != static_cast<std::streamsize>(len)) {
      throw FormatError(path + ": truncated checkpoint");
    }
  }
  std::uint32_t read_u32() {
    std::uint32_t v;
    read_raw(&v, sizeof(v));
    return v;
  }
  std::uint64_t read_u64() {
    std::uint64_t v;
    read_raw(&v, sizeof(v));
    return v;
  }
  std::string read_string(std::size_t len) {
    std::string s(len, '\0');
    read_raw(s.data(), len);
    return s;
  }
};

}  // namespace

void save_checkpoint(const TrainState& state, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write checkpoint to " + path);

  out.write(kMagic, sizeof(kMagic));
  write_u32(out, kVersion);

  const std::string config = serialize_config(state.config);
  write_u32(out, static_cast<std::uint32_t>(config.size()));
  out.write(config.data(), static_cast<std::streamsize>(config.size()));

  write_u64(out, static_cast<std::uint64_t>(state.epoch));
  write_u64(out, state.rng.state());

  const NamedTensors named = state.named_tensors();
  write_u32(out, static_cast<std::uint32_t>(named.size()));
  for (const auto& [name, tensor] : named) {
    write_u32(out, static_cast<std::uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    write_u32(out, static_cast<std::uint32_t>(tensor.rows()));
    write_u32(out, static_cast<std::uint32_t>(tensor.cols()));
    const std::uint8_t rq = tensor.requires_grad() ? 1 : 0;
    out.write(reinterpret_cast<const char*>(&rq), 1);
    out.write(reinterpret_cast<const char*>(tensor.values().data()),
              static_cast<std::streamsize>(tensor.values().size() * sizeof(double)));
  }
  if (!out) throw IoError("write failed for checkpoint " + path);
}

namespace {

struct StoredTensor {
  Tensor tensor;
  bool used = false;
};

Tensor take(std::map<std::string, StoredTensor>& stored, const std::string& name) {
  auto it = stored.find(name);
  if (it == stored.end()) {
    throw FormatError("checkpoint: missing tensor '" + name + "'");
  }
  it->second.used = true;
  return it->second.tensor;
}

GinLayerParams take_gin(std::map<std::string, StoredTensor>& stored, const std::string& prefix) {
  GinLayerParams p;
  p.eps = take(stored, prefix + ".eps");
  p.w1 = take(stored, prefix + ".w1");
  p.b1 = take(stored, prefix + ".b1");
  p.w2 = take(stored, prefix + ".w2");
  p.b2 = take(stored, prefix + ".b2");
  return p;
}

void set_grad_flags(GinLayerParams& p, bool on) {
  for (Tensor* t : {&p.eps, &p.w1, &p.b1, &p.w2, &p.b2}) t->set_requires_grad(on);
}

}  // namespace

TrainState load_checkpoint(const std::string& path) {
  Reader reader;
  reader.path = path;
  reader.in.open(path, std::ios::binary);
  if (!reader.in) throw IoError("cannot open checkpoint " + path);

  char magic[sizeof(kMagic)];
  reader.read_raw(magic, sizeof(magic));
  if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw FormatError(path + ": not a checkpoint file");
  }
  const std::uint32_t version = reader.read_u32();
  if (version != kVersion) {
    throw VersionError(path + ": unsupported checkpoint version " + std::to_string(version));
  }

  const std::uint32_t config_len = reader.read_u32();
  const std::string config_text = reader.read_string(config_len);
  TrainConfig config = parse_config_text(config_text);
  config.validate();

  const std::uint64_t epoch = reader.read_u64();
  const std::uint64_t rng_state = reader.read_u64();

  const std::uint32_t count = reader.read_u32();
  std::map<std::string, StoredTensor> stored;
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::uint32_t name_len = reader.read_u32();
    const std::string name = reader.read_string(name_len);
    const std::uint32_t rows = reader.read_u32();
    const std::uint32_t cols = reader.read_u32();
    std::uint8_t rq = 0;
    reader.read_raw(&rq, 1);
    if (rows == 0 || cols == 0 || rows > (1u << 24) || cols > (1u << 24)) {
      throw FormatError(path + ": implausible tensor shape for '" + name + "'");
    }
    std::vector<double> data(static_cast<std::size_t>(rows) * cols);
    reader.read_raw(data.data(), data.size() * sizeof(double));
    StoredTensor st;
    st.tensor = Tensor::from_data(static_cast<int>(rows), static_cast<int>(cols), std::move(data));
    if (rq != 0) st.tensor.set_requires_grad(true);
    stored.emplace(name, std::move(st));
  }

  TrainState state;
  state.config = config;
  state.epoch = static_cast<int>(epoch);
  state.rng.set_state(rng_state);

  for (int k = 0; k < config.num_layers; ++k) {
    state.theta_encoder.layers.push_back(
        take_gin(stored, "theta.encoder.layer" + std::to_string(k)));
    set_grad_flags(state.theta_encoder.layers.back(), true);
    state.phi.layers.push_back(take_gin(stored, "phi.layer" + std::to_string(k)));
    set_grad_flags(state.phi.layers.back(), false);
  }
  state.theta_predictor.w1 = take(stored, "theta.predictor.w1");
  state.theta_predictor.b1 = take(stored, "theta.predictor.b1");
  state.theta_predictor.w2 = take(stored, "theta.predictor.w2");
  state.theta_predictor.b2 = take(stored, "theta.predictor.b2");
  for (Tensor* t : {&state.theta_predictor.w1, &state.theta_predictor.b1,
                    &state.theta_predictor.w2, &state.theta_predictor.b2}) {
    t->set_requires_grad(true);
  }

  auto load_pooler = [&](const std::string& prefix, PoolerFamily family, double rho) {
    PoolerParams p;
    p.family = family;
    p.rho = rho;
    p.gin = take_gin(stored, prefix + ".gin");
    set_grad_flags(p.gin, true);
    p.head_w = take(stored, prefix + ".head_w");
    p.head_b = take(stored, prefix + ".head_b");
    p.head_w.set_requires_grad(true);
    p.head_b.set_requires_grad(true);
    return p;
  };
  if (config.weak_view_active()) {
    state.omega_weak = load_pooler("omega_weak", config.pooler_weak, config.rho_weak);
  }
  if (config.strong_view_active()) {
    state.omega_strong = load_pooler("omega_strong", config.pooler_strong, config.rho_strong);
  }

  for (const auto& [name, st] : stored) {
    if (!st.used) throw FormatError(path + ": unexpected tensor '" + name + "'");
  }
  return state;
}

}  // namespace gps
