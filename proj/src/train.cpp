#include "evtrace/train.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <random>

#include "evtrace/errors.hpp"
#include "evtrace/parallel.hpp"
#include "evtrace/rng.hpp"

namespace evtrace {

std::vector<DatasetPair> make_dataset(std::span<const SceneSpec> scenes, const NoiseModel& noise,
                                      const RefSimConfig& ref, const LuminanceConfig& lum, unsigned workers) {
  noise.validate();
  ref.validate();
  lum.validate();
  std::vector<DatasetPair> out;
  out.reserve(scenes.size());
  for (const SceneSpec& spec : scenes) {
    const FrameSeq clean = gen_scene(spec, workers);
    NoiseModel scene_noise = noise;
    scene_noise.seed = splitmix64(noise.seed ^ splitmix64(spec.seed));
    const FrameSeq noisy = add_render_noise(clean, scene_noise, workers);
    SpikeTrain target = simulate(log_diff_sequence(clean, lum, workers), ref, workers);
    out.push_back({log_diff_sequence(noisy, lum, workers), std::move(target), spec, scene_noise, ref});
  }
  return out;
}

std::string_view train_forward_name(TrainForward f) { return f == TrainForward::hard ? "hard" : "relaxed"; }

TrainForward parse_train_forward(std::string_view name) {
  if (name == "relaxed") return TrainForward::relaxed;
  if (name == "hard") return TrainForward::hard;
  throw ConfigError("unknown training forward \"" + std::string(name) + "\" (expected relaxed or hard)");
}

void TrainConfig::validate() const {
  if (epochs < 1) throw ConfigError("train.epochs must be >= 1");
  if (batch < 1) throw ConfigError("train.batch must be >= 1");
  if (!(lr > 0.0) || !std::isfinite(lr)) throw ConfigError("train.lr must be positive");
  if (!(clip > 0.0)) throw ConfigError("train.clip must be positive");
  if (!(holdout >= 0.0 && holdout <= 0.5)) throw ConfigError("train.holdout must lie in [0, 0.5]");
  loss.validate();
}

bool is_holdout(std::uint64_t seed, std::size_t pair, std::size_t pixel, double fraction) {
  CounterRng rng{seed, 0x401d, pair, pixel};
  return uniform01(rng) < fraction;
}

std::vector<SampleRef> holdout_samples(std::span<const DatasetPair> data, const TrainConfig& cfg) {
  std::vector<SampleRef> out;
  for (std::size_t d = 0; d < data.size(); ++d) {
    for (std::size_t p = 0; p < data[d].x.pixel_count(); ++p) {
      if (is_holdout(cfg.seed, d, p, cfg.holdout)) out.push_back({d, p});
    }
  }
  return out;
}

SpikeTrain gather_rows(std::span<const DatasetPair> data, std::span<const SampleRef> samples,
                       const std::function<std::span<const std::int8_t>(const SampleRef&)>& row) {
  if (data.empty() || samples.empty()) throw ShapeError("gather_rows: nothing to gather");
  const std::size_t K = data.front().x.ticks();
  std::vector<std::int8_t> buf;
  buf.reserve(samples.size() * K);
  for (const SampleRef& s : samples) {
    const auto r = row(s);
    if (r.size() != K) throw ShapeMismatchError("gather_rows: pairs differ in sequence length");
    buf.insert(buf.end(), r.begin(), r.end());
  }
  return SpikeTrain(static_cast<std::uint32_t>(samples.size()), 1, data.front().x.fps(), K, std::move(buf));
}

HoldoutTrains holdout_trains(std::span<const DatasetPair> data, const EvsNetParams& params, const TrainConfig& cfg) {
  const auto samples = holdout_samples(data, cfg);
  const std::size_t K = data.front().x.ticks();
  std::vector<std::vector<std::int8_t>> net(samples.size()), naive(samples.size());
  parallel_chunks(samples.size(), cfg.workers, [&](std::size_t, std::size_t begin, std::size_t end) {
    ForwardCache cache;
    for (std::size_t i = begin; i < end; ++i) {
      const DatasetPair& pair = data[samples[i].pair];
      const auto x = pair.x.row(samples[i].pixel);
      forward<float>(x, params, 0.0f, cache, K);
      net[i] = cache.spikes;
      naive[i].resize(K);
      const double theta = pair.ref.theta;
      for (std::size_t k = 0; k < K; ++k) {
        naive[i][k] = x[k] >= theta ? 1 : (x[k] <= -theta ? -1 : 0);
      }
    }
  });
  auto index_of = [&](const SampleRef& s) {
    return static_cast<std::size_t>(&s - samples.data());
  };
  HoldoutTrains out{
      gather_rows(data, samples, [&](const SampleRef& s) { return data[s.pair].e.row(s.pixel); }),
      gather_rows(data, samples, [&](const SampleRef& s) { return std::span<const std::int8_t>(net[index_of(s)]); }),
      gather_rows(data, samples,
                  [&](const SampleRef& s) { return std::span<const std::int8_t>(naive[index_of(s)]); }),
  };
  return out;
}

void adam_step(std::span<float> params, std::span<const float> grads, AdamState& state, double lr) {
  if (params.size() != grads.size() || params.size() != state.m.size()) {
    throw ShapeMismatchError("adam_step: parameter, gradient and state sizes differ");
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(state.beta1, t);
  const double c2 = 1.0 - std::pow(state.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * g;
    state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * g * g;
    const double m_hat = state.m[i] / c1;
    const double v_hat = state.v[i] / c2;
    params[i] = static_cast<float>(params[i] - lr * m_hat / (std::sqrt(v_hat) + state.eps));
  }
}

double clip_grad_norm(std::span<float> grads, double max_norm) {
  double sq = 0.0;
  for (float g : grads) sq += static_cast<double>(g) * g;
  const double norm = std::sqrt(sq);
  if (norm > max_norm) {
    const double scale = max_norm / norm;
    for (float& g : grads) g = static_cast<float>(g * scale);
  }
  return norm;
}

namespace {

// Per-worker scratch for one update.
struct Worker {
  explicit Worker(const EvsNetConfig& cfg) : grads(cfg) {}
  EvsNetParams grads;
  ForwardCache cache;
  std::vector<double> e, s, g;
  std::vector<float> g_out;
  double loss = 0.0;
};

// Sums worker partials pairwise in a fixed tree so the result depends only
// on the worker count.
void tree_reduce(std::vector<Worker>& workers) {
  for (std::size_t step = 1; step < workers.size(); step *= 2) {
    for (std::size_t i = 0; i + step < workers.size(); i += 2 * step) {
      auto dst = workers[i].grads.flat();
      auto src = workers[i + step].grads.flat();
      for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += src[j];
      workers[i].loss += workers[i + step].loss;
    }
  }
}

}  // namespace

TrainResult train(std::span<const DatasetPair> data, const EvsNetConfig& net_cfg, const TrainConfig& cfg,
                  const TrainHooks& hooks) {
  cfg.validate();
  net_cfg.validate();
  if (data.empty()) throw ConfigError("train: empty dataset");
  const std::size_t K = data.front().x.ticks();
  for (const DatasetPair& d : data) {
    if (!d.x.same_shape(d.e)) throw ShapeMismatchError("train: input and target shapes differ");
    if (d.x.ticks() != K) throw ShapeMismatchError("train: pairs differ in sequence length");
  }

  std::vector<SampleRef> train_set;
  for (std::size_t d = 0; d < data.size(); ++d) {
    for (std::size_t p = 0; p < data[d].x.pixel_count(); ++p) {
      if (!is_holdout(cfg.seed, d, p, cfg.holdout)) train_set.push_back({d, p});
    }
  }
  if (train_set.empty()) throw ConfigError("train: holdout leaves no training pixels");

  TrainResult result{init_params(net_cfg, cfg.seed), {}};
  EvsNetParams& params = result.params;
  AdamState adam(params.size());
  const unsigned n_workers = std::max(1u, cfg.workers);
  std::vector<Worker> workers(n_workers, Worker(net_cfg));
  std::mt19937_64 shuffler(cfg.seed);

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(train_set.begin(), train_set.end(), shuffler);
    double epoch_loss = 0.0;
    std::size_t epoch_samples = 0;

    for (std::size_t b0 = 0; b0 < train_set.size(); b0 += cfg.batch) {
      const std::size_t b1 = std::min(train_set.size(), b0 + cfg.batch);
      const std::size_t B = b1 - b0;
      const TransposedWeights<float> wt(params);
      for (Worker& w : workers) {
        w.grads.fill_zero();
        w.loss = 0.0;
      }

      parallel_chunks(B, n_workers, [&](std::size_t chunk, std::size_t begin, std::size_t end) {
        Worker& w = workers[chunk];
        for (std::size_t i = begin; i < end; ++i) {
          const SampleRef& ref = train_set[b0 + i];
          const DatasetPair& pair = data[ref.pair];
          forward<float>(pair.x.row(ref.pixel), params, 0.0f, w.cache, K);
          const auto target = pair.e.row(ref.pixel);
          w.e.assign(target.begin(), target.end());
          if (cfg.forward == TrainForward::hard) {
            w.s.assign(w.cache.spikes.begin(), w.cache.spikes.end());
          } else {
            w.s.assign(w.cache.soft.begin(), w.cache.soft.end());
          }
          w.g.resize(K);
          const PixelLoss l = pixel_loss(w.e, w.s);
          w.loss += l.total(cfg.loss.lambda);
          pixel_loss_grad(w.e, w.s, cfg.loss.lambda, w.g);
          w.g_out.resize(K);
          for (std::size_t k = 0; k < K; ++k) w.g_out[k] = static_cast<float>(w.g[k] / static_cast<double>(B));
          backward<float>(w.g_out, w.cache, params, wt, w.grads);
        }
      });
      if (hooks.on_gradient_sample) {
        for (std::size_t i = b0; i < b1; ++i) hooks.on_gradient_sample(train_set[i].pair, train_set[i].pixel);
      }
      tree_reduce(workers);

      const double batch_loss = workers[0].loss;
      if (!std::isfinite(batch_loss)) throw DivergenceError("training loss became non-finite");
      epoch_loss += batch_loss;
      epoch_samples += B;

      auto grads = workers[0].grads.flat();
      const double norm = clip_grad_norm(grads, cfg.clip);
      if (!std::isfinite(norm)) throw DivergenceError("gradient norm became non-finite");
      adam_step(params.flat(), grads, adam, cfg.lr);
    }

    EpochRecord rec{epoch + 1, epoch_loss / static_cast<double>(epoch_samples), 0.0};
    if (cfg.holdout > 0.0 && !holdout_samples(data, cfg).empty()) {
      const HoldoutTrains h = holdout_trains(data, params, cfg);
      rec.holdout_loss = total_loss(h.target, h.network, cfg.loss).total;
    }
    if (!std::isfinite(rec.train_loss) || !std::isfinite(rec.holdout_loss)) {
      throw DivergenceError("training loss became non-finite");
    }
    result.history.push_back(rec);
    if (cfg.checkpoint) write_checkpoint(*cfg.checkpoint, params);
    if (hooks.on_epoch) hooks.on_epoch(rec);
  }
  return result;
}

void write_history_csv(const std::filesystem::path& path, std::span<const EpochRecord> history) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  out << "epoch,train_loss,holdout_loss\n" << std::setprecision(9);
  for (const EpochRecord& r : history) out << r.epoch << ',' << r.train_loss << ',' << r.holdout_loss << '\n';
}

}  // namespace evtrace
