#include <charconv>
#include <fstream>
#include <sstream>

#include "evtrace/cli.hpp"
#include "evtrace/errors.hpp"
#include "evtrace/rng.hpp"

namespace evtrace::cli {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace

RunConfig::RunConfig() {
  values_ = {
      {"run.seed", "1"},
      {"run.workers", "1"},
      {"scene.kind", "moving_edge"},
      {"scene.width", "32"},
      {"scene.height", "32"},
      {"scene.fps", "1000"},
      {"scene.duration", "0.513"},
      {"scene.velocity", "40"},
      {"scene.spatial_freq", "0.125"},
      {"scene.flash_period", "0.1"},
      {"scene.contrast", "0.8"},
      {"scene.seed", "auto"},
      {"noise.spp", "64"},
      {"noise.gain", "0.5"},
      {"noise.seed", "auto"},
      {"luminance.rho", "0.02"},
      {"refsim.theta", "0.2"},
      {"refsim.sigma_theta", "0.03"},
      {"refsim.init", "uniform"},
      {"refsim.leak_rate", "0.1"},
      {"refsim.shot_rate", "1.0"},
      {"refsim.seed", "auto"},
      {"net.channels", "32"},
      {"net.kernel", "7"},
      {"net.depth", "3"},
      {"net.tau", "2"},
      {"net.v_th", "1"},
      {"net.alpha", "2"},
      {"net.init", "zero"},
      {"net.window", "512"},
      {"net.seed", "auto"},
      {"loss.lambda", "0.1"},
      {"train.epochs", "20"},
      {"train.batch", "256"},
      {"train.lr", "0.001"},
      {"train.clip", "1.0"},
      {"train.holdout", "0.2"},
      {"train.scenes", "moving_edge,grating,flashing_light"},
      {"train.seed", "auto"},
      {"train.forward", "hard"},
      {"eval.bin_fps", "60"},
      {"eval.buckets", "32"},
      {"eval.fps", "1000"},
      {"eval.ticks", "0"},
  };
}

void RunConfig::load_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  load(in, path.string());
}

void RunConfig::load(std::istream& in, std::string_view origin) {
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    const auto hash = line.find('#');
    const std::string body = trim(std::string_view(line).substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(std::string(origin) + ":" + std::to_string(n) + ": expected \"section.key = value\"");
    }
    set(trim(std::string_view(body).substr(0, eq)), trim(std::string_view(body).substr(eq + 1)));
  }
}

void RunConfig::set(std::string_view key, std::string value) {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("unknown config key \"" + std::string(key) + "\"");
  it->second = std::move(value);
}

const std::string& RunConfig::get(std::string_view key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("unknown config key \"" + std::string(key) + "\"");
  return it->second;
}

double RunConfig::get_double(std::string_view key) const {
  const std::string& v = get(key);
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != v.size()) throw ConfigError(std::string(key) + ": expected a number, got \"" + v + "\"");
  return out;
}

std::uint64_t RunConfig::get_u64(std::string_view key) const {
  const std::string& v = get(key);
  std::uint64_t out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size()) {
    throw ConfigError(std::string(key) + ": expected a non-negative integer, got \"" + v + "\"");
  }
  return out;
}

std::uint64_t RunConfig::seed_for(std::string_view key) const {
  if (get(key) != "auto") return get_u64(key);
  std::uint64_t h = get_u64("run.seed");
  for (char c : key) h = splitmix64(h ^ static_cast<unsigned char>(c));
  return h;
}

std::string RunConfig::dump() const {
  std::ostringstream out;
  for (const auto& [k, v] : values_) out << k << " = " << v << '\n';
  return out.str();
}

unsigned RunConfig::workers() const {
  const auto w = get_u64("run.workers");
  if (w < 1 || w > 1024) throw ConfigError("run.workers must lie in [1, 1024]");
  return static_cast<unsigned>(w);
}

SceneSpec RunConfig::scene() const {
  SceneSpec s;
  s.kind = parse_scene_kind(get("scene.kind"));
  s.width = static_cast<std::uint32_t>(get_u64("scene.width"));
  s.height = static_cast<std::uint32_t>(get_u64("scene.height"));
  s.fps = get_double("scene.fps");
  s.duration = get_double("scene.duration");
  s.velocity = get_double("scene.velocity");
  s.spatial_freq = get_double("scene.spatial_freq");
  s.flash_period = get_double("scene.flash_period");
  s.contrast = get_double("scene.contrast");
  s.seed = seed_for("scene.seed");
  s.validate();
  return s;
}

NoiseModel RunConfig::noise() const {
  NoiseModel m;
  m.spp = static_cast<std::uint32_t>(get_u64("noise.spp"));
  m.gain = get_double("noise.gain");
  m.seed = seed_for("noise.seed");
  m.validate();
  return m;
}

LuminanceConfig RunConfig::luminance() const {
  LuminanceConfig c{get_double("luminance.rho")};
  c.validate();
  return c;
}

RefSimConfig RunConfig::refsim() const {
  RefSimConfig c;
  c.theta = get_double("refsim.theta");
  c.sigma_theta = get_double("refsim.sigma_theta");
  c.init_mode = parse_init_mode(get("refsim.init"));
  c.leak_rate = get_double("refsim.leak_rate");
  c.shot_rate = get_double("refsim.shot_rate");
  c.seed = seed_for("refsim.seed");
  c.validate();
  return c;
}

EvsNetConfig RunConfig::net() const {
  EvsNetConfig c;
  c.channels = get_u64("net.channels");
  c.kernel = get_u64("net.kernel");
  c.depth = get_u64("net.depth");
  c.lif.tau = get_double("net.tau");
  c.lif.v_th = get_double("net.v_th");
  c.surrogate.alpha = get_double("net.alpha");
  c.validate();
  return c;
}

LossConfig RunConfig::loss() const {
  LossConfig c{get_double("loss.lambda")};
  c.validate();
  return c;
}

TrainConfig RunConfig::train() const {
  TrainConfig c;
  c.epochs = get_u64("train.epochs");
  c.batch = get_u64("train.batch");
  c.lr = get_double("train.lr");
  c.loss = loss();
  c.clip = get_double("train.clip");
  c.holdout = get_double("train.holdout");
  c.seed = seed_for("train.seed");
  c.forward = parse_train_forward(get("train.forward"));
  c.workers = workers();
  c.validate();
  return c;
}

InferOptions RunConfig::infer() const {
  InferOptions o;
  o.window = get_u64("net.window");
  o.workers = workers();
  o.init_mode = parse_init_mode(get("net.init"));
  o.seed = seed_for("net.seed");
  if (o.window < 1) throw ConfigError("net.window must be >= 1");
  return o;
}

std::vector<SceneSpec> RunConfig::training_scenes() const {
  const SceneSpec base = scene();
  std::vector<SceneSpec> out;
  std::string_view list = get("train.scenes");
  std::size_t index = 0;
  while (!list.empty()) {
    const auto comma = list.find(',');
    const std::string name = trim(list.substr(0, comma));
    list = comma == std::string_view::npos ? std::string_view{} : list.substr(comma + 1);
    if (name.empty()) continue;
    SceneSpec s = base;
    s.kind = parse_scene_kind(name);
    s.seed = splitmix64(base.seed + index++);
    out.push_back(s);
  }
  if (out.empty()) throw ConfigError("train.scenes lists no scenes");
  return out;
}

}  // namespace evtrace::cli
