#include "evtrace/scenegen.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "evtrace/errors.hpp"
#include "evtrace/parallel.hpp"
#include "evtrace/rng.hpp"

namespace evtrace {

namespace {

constexpr double kMean = 0.5;
constexpr double kBackground = 0.2;
constexpr std::array<double, 3> kLightTint{1.0, 0.85, 0.6};

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

// Fraction of the unit interval [a, a + 1) lying left of `edge`.
double left_coverage(double a, double edge) { return std::clamp(edge - a, 0.0, 1.0); }

// Length of [a, a + 1) intersected with [lo, hi).
double overlap(double a, double lo, double hi) { return std::max(0.0, std::min(a + 1.0, hi) - std::max(a, lo)); }

struct SceneGeometry {
  double grating_phase;
  double light_x;
  double light_y;
  double light_size;
};

SceneGeometry geometry(const SceneSpec& spec) {
  CounterRng rng{spec.seed, 0x5ce11e};
  SceneGeometry g;
  g.grating_phase = 2.0 * std::numbers::pi * uniform01(rng);
  g.light_size = std::max(2.0, std::min(spec.width, spec.height) / 4.0);
  g.light_x = uniform01(rng) * (spec.width - g.light_size);
  g.light_y = uniform01(rng) * (spec.height - g.light_size);
  return g;
}

double edge_luma(const SceneSpec& spec, double x, double t) {
  const double w = spec.width;
  double pos = std::fmod(edge_position(spec, t), w);
  if (pos < 0) pos += w;
  const double hi = kMean * (1.0 + spec.contrast);
  const double lo = kMean * (1.0 - spec.contrast);
  return lo + (hi - lo) * left_coverage(x, pos);
}

// Pixel-averaged sinusoid: the mean of sin over [x, x + 1) is closed form.
double grating_luma(const SceneSpec& spec, const SceneGeometry& g, double x, double t, double contrast) {
  const double f = spec.spatial_freq;
  const double a = 2.0 * std::numbers::pi * f * (x - spec.velocity * t) + g.grating_phase;
  double mean_sin;
  if (f == 0.0) {
    mean_sin = std::sin(a);
  } else {
    mean_sin = (std::cos(a) - std::cos(a + 2.0 * std::numbers::pi * f)) / (2.0 * std::numbers::pi * f);
  }
  return kMean * (1.0 + contrast * mean_sin);
}

bool light_on(const SceneSpec& spec, double t) {
  const double phase = std::fmod(t, spec.flash_period) / spec.flash_period;
  return phase < 0.5;
}

double light_coverage(const SceneGeometry& g, double x, double y) {
  return overlap(x, g.light_x, g.light_x + g.light_size) * overlap(y, g.light_y, g.light_y + g.light_size);
}

void shade_pixel(const SceneSpec& spec, const SceneGeometry& g, double x, double y, double t, float* rgb) {
  std::array<double, 3> c{};
  switch (spec.kind) {
    case SceneKind::moving_edge: {
      const double l = edge_luma(spec, x, t);
      c = {l, l, l};
      break;
    }
    case SceneKind::grating: {
      const double l = grating_luma(spec, g, x, t, spec.contrast);
      c = {l, l, l};
      break;
    }
    case SceneKind::flashing_light: {
      const double cov = light_on(spec, t) ? light_coverage(g, x, y) : 0.0;
      const double peak = kBackground + spec.contrast * (1.0 - kBackground);
      for (int ch = 0; ch < 3; ++ch) c[ch] = kBackground + cov * (peak * kLightTint[ch] - kBackground);
      break;
    }
    case SceneKind::mixed: {
      // Half-contrast grating averaged with the moving edge, light on top.
      const double l =
          0.5 * grating_luma(spec, g, x, t, 0.5 * spec.contrast) + 0.5 * edge_luma(spec, x, t);
      const double cov = light_on(spec, t) ? light_coverage(g, x, y) : 0.0;
      for (int ch = 0; ch < 3; ++ch) c[ch] = l + cov * (kLightTint[ch] - l);
      break;
    }
  }
  for (int ch = 0; ch < 3; ++ch) rgb[ch] = static_cast<float>(clamp01(c[ch]));
}

}  // namespace

std::string_view scene_kind_name(SceneKind kind) {
  switch (kind) {
    case SceneKind::moving_edge:
      return "moving_edge";
    case SceneKind::grating:
      return "grating";
    case SceneKind::flashing_light:
      return "flashing_light";
    case SceneKind::mixed:
      return "mixed";
  }
  return "unknown";
}

SceneKind parse_scene_kind(std::string_view name) {
  for (SceneKind k : {SceneKind::moving_edge, SceneKind::grating, SceneKind::flashing_light, SceneKind::mixed}) {
    if (scene_kind_name(k) == name) return k;
  }
  throw ConfigError("unknown scene kind \"" + std::string(name) + "\"");
}

void SceneSpec::validate() const {
  if (width == 0 || height == 0) throw ConfigError("scene width and height must be positive");
  if (width > 65535 || height > 65535) throw ConfigError("scene extent exceeds 65535");
  if (!(fps > 0.0) || !std::isfinite(fps)) throw ConfigError("scene fps must be positive");
  if (!(duration > 0.0) || !std::isfinite(duration)) throw ConfigError("scene duration must be positive");
  if (frame_count() < 2) throw ConfigError("scene must span at least two frames (duration * fps >= 2)");
  if (!(contrast >= 0.0 && contrast <= 1.0)) throw ConfigError("scene contrast must lie in [0, 1]");
  if (!std::isfinite(velocity)) throw ConfigError("scene velocity must be finite");
  if (!(spatial_freq >= 0.0) || !std::isfinite(spatial_freq)) throw ConfigError("spatial frequency must be >= 0");
  if (!(flash_period > 0.0) || !std::isfinite(flash_period)) throw ConfigError("flash period must be positive");
}

std::size_t SceneSpec::frame_count() const {
  const double n = std::round(duration * fps);
  return n < 0 ? 0 : static_cast<std::size_t>(n);
}

void NoiseModel::validate() const {
  if (spp < 1) throw ConfigError("noise.spp must be >= 1");
  if (!(gain >= 0.0) || !std::isfinite(gain)) throw ConfigError("noise.gain must be >= 0");
}

double NoiseModel::sigma() const { return gain / std::sqrt(static_cast<double>(spp)); }

double edge_position(const SceneSpec& spec, double t) {
  CounterRng rng{spec.seed, 0xed6e};
  const double start = spec.width / 4.0 + uniform01(rng);
  return start + spec.velocity * t;
}

FrameSeq gen_scene(const SceneSpec& spec, unsigned workers) {
  spec.validate();
  const std::size_t frames = spec.frame_count();
  const std::size_t stride = std::size_t{spec.width} * spec.height * 3;
  std::vector<float> data(frames * stride);
  const SceneGeometry g = geometry(spec);

  parallel_for(frames, workers, [&](std::size_t k) {
    const double t = static_cast<double>(k) / spec.fps;
    float* frame = data.data() + k * stride;
    for (std::uint32_t y = 0; y < spec.height; ++y) {
      for (std::uint32_t x = 0; x < spec.width; ++x) {
        shade_pixel(spec, g, x, y, t, frame + (std::size_t{y} * spec.width + x) * 3);
      }
    }
  });
  return FrameSeq(spec.width, spec.height, static_cast<float>(spec.fps), std::move(data));
}

FrameSeq add_render_noise(const FrameSeq& frames, const NoiseModel& model, unsigned workers) {
  model.validate();
  if (model.gain == 0.0) return frames;
  const double sigma = model.sigma();
  const std::size_t stride = frames.frame_stride();
  std::vector<float> data(frames.data().begin(), frames.data().end());

  parallel_for(frames.frame_count(), workers, [&](std::size_t k) {
    float* frame = data.data() + k * stride;
    for (std::uint32_t y = 0; y < frames.height(); ++y) {
      for (std::uint32_t x = 0; x < frames.width(); ++x) {
        for (std::uint32_t ch = 0; ch < 3; ++ch) {
          CounterRng rng{model.seed, k, x, y, ch};
          std::normal_distribution<double> normal(0.0, 1.0);
          float& v = frame[(std::size_t{y} * frames.width() + x) * 3 + ch];
          v = static_cast<float>(std::max(0.0, static_cast<double>(v) * (1.0 + sigma * normal(rng))));
        }
      }
    }
  });
  return FrameSeq(frames.width(), frames.height(), frames.fps(), std::move(data));
}

}  // namespace evtrace
