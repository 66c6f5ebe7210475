#include "evtrace/refsim.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "evtrace/errors.hpp"
#include "evtrace/parallel.hpp"
#include "evtrace/rng.hpp"

namespace evtrace {

std::string_view init_mode_name(InitMode mode) { return mode == InitMode::zero ? "zero" : "uniform"; }

InitMode parse_init_mode(std::string_view name) {
  if (name == "zero") return InitMode::zero;
  if (name == "uniform") return InitMode::uniform;
  throw ConfigError("unknown init mode \"" + std::string(name) + "\"");
}

void RefSimConfig::validate() const {
  if (!(theta > 0.0) || !std::isfinite(theta)) throw ConfigError("refsim.theta must be positive");
  if (!(sigma_theta >= 0.0) || !std::isfinite(sigma_theta)) throw ConfigError("refsim.sigma_theta must be >= 0");
  if (!(leak_rate >= 0.0) || !(shot_rate >= 0.0)) throw ConfigError("refsim noise rates must be >= 0");
}

RefSimConfig RefSimConfig::noiseless() const {
  RefSimConfig c = *this;
  c.sigma_theta = 0.0;
  c.leak_rate = 0.0;
  c.shot_rate = 0.0;
  return c;
}

namespace {

PixelSimResult simulate_impl(std::span<const float> x, const RefSimConfig& cfg, double fps, std::uint32_t px,
                             std::uint32_t py) {
  CounterRng rng{cfg.seed, px, py};
  PixelSimResult r;
  r.spikes.resize(x.size());

  double theta = cfg.theta;
  if (cfg.sigma_theta > 0.0) {
    std::normal_distribution<double> mismatch(0.0, cfg.sigma_theta * cfg.theta);
    theta = std::max(cfg.theta + mismatch(rng), cfg.theta / 4.0);
  }
  r.threshold = theta;
  if (cfg.init_mode == InitMode::uniform) r.v_initial = (2.0 * uniform01(rng) - 1.0) * theta;

  const double leak_p = cfg.leak_rate / fps;
  const double shot_p = cfg.shot_rate / fps;
  double v = r.v_initial;
  for (std::size_t k = 0; k < x.size(); ++k) {
    v += static_cast<double>(x[k]);
    if (leak_p > 0.0 && uniform01(rng) < leak_p) {
      v += theta;
      ++r.injections;
    }
    if (shot_p > 0.0 && uniform01(rng) < shot_p) {
      v += (rng() & 1) ? theta : -theta;
      ++r.injections;
    }
    std::int8_t s = 0;
    if (v >= theta) {
      s = 1;
    } else if (v <= -theta) {
      s = -1;
    }
    v -= s * theta;
    r.spikes[k] = s;
  }
  r.v_final = v;
  return r;
}

}  // namespace

PixelSimResult simulate_pixel(std::span<const float> x, const RefSimConfig& cfg, std::uint32_t px,
                              std::uint32_t py, double fps) {
  cfg.validate();
  return simulate_impl(x, cfg, fps, px, py);
}

SpikeTrain simulate(const LogDiffSeq& x, const RefSimConfig& cfg, unsigned workers) {
  cfg.validate();
  SpikeTrain out(x.width(), x.height(), x.fps(), x.ticks());
  parallel_for(x.pixel_count(), workers, [&](std::size_t p) {
    const auto px = static_cast<std::uint32_t>(p % x.width());
    const auto py = static_cast<std::uint32_t>(p / x.width());
    const PixelSimResult r = simulate_impl(x.row(p), cfg, x.fps(), px, py);
    std::copy(r.spikes.begin(), r.spikes.end(), out.row(p).begin());
  });
  return out;
}

SpikeTrain naive_baseline(const LogDiffSeq& x, double theta) {
  if (!(theta > 0.0)) throw ConfigError("naive baseline theta must be positive");
  SpikeTrain out(x.width(), x.height(), x.fps(), x.ticks());
  auto src = x.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < src.size(); ++i) {
    const double v = src[i];
    dst[i] = v >= theta ? 1 : (v <= -theta ? -1 : 0);
  }
  return out;
}

}  // namespace evtrace
