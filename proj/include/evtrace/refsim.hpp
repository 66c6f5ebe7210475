#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "evtrace/core.hpp"

namespace evtrace {

enum class InitMode { zero, uniform };

std::string_view init_mode_name(InitMode mode);
InitMode parse_init_mode(std::string_view name);

/// Reference sensor model.
struct RefSimConfig {
  double theta = 0.2;         // contrast threshold, log-luminance units
  double sigma_theta = 0.03;  // per-pixel threshold mismatch, relative to theta
  InitMode init_mode = InitMode::uniform;
  double leak_rate = 0.1;  // spurious positive events per second per pixel
  double shot_rate = 1.0;  // random-sign noise events per second per pixel
  std::uint64_t seed = 3;

  void validate() const;
  /// Copy with mismatch, leak and shot noise disabled.
  RefSimConfig noiseless() const;
};

struct PixelSimResult {
  std::vector<std::int8_t> spikes;
  double threshold = 0.0;  // per-pixel theta after mismatch
  double v_initial = 0.0;
  double v_final = 0.0;
  std::size_t injections = 0;  // leak + shot noise units added
};

/// Simulates one pixel. Contrast is integrated without decay; at most one
/// event fires per tick and each event subtracts one threshold, so a jump of
/// n thresholds drains over n consecutive ticks.
PixelSimResult simulate_pixel(std::span<const float> x, const RefSimConfig& cfg, std::uint32_t px, std::uint32_t py,
                              double fps = 1000.0);

/// simulate_pixel over every pixel; output does not depend on `workers`.
SpikeTrain simulate(const LogDiffSeq& x, const RefSimConfig& cfg, unsigned workers = 1);

/// Frame-difference strawman: S_k = sgn(X_k) * [|X_k| >= theta], no memory.
SpikeTrain naive_baseline(const LogDiffSeq& x, double theta);

}  // namespace evtrace
