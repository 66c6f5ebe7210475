#pragma once

#include <span>
#include <vector>

#include "evtrace/core.hpp"

namespace evtrace {

struct LossConfig {
  double lambda = 0.1;  // weight of the spike-count term

  void validate() const;
};

struct LossReport {
  double emd = 0.0;
  double count = 0.0;
  double total = 0.0;
  std::vector<double> per_pixel;  // emd_polar + lambda * count_loss, when requested
};

/// Mean absolute difference of prefix sums: (1/K) sum_i |S_i(s) - S_i(e)|.
double emd(std::span<const double> e, std::span<const double> s);

/// d emd(e, s) / d s_j = (1/K) sum_{i >= j} sign(S_i(s) - S_i(e)).
void emd_grad(std::span<const double> e, std::span<const double> s, std::span<double> grad);

/// Average of the forward EMD and the EMD of both sequences reversed.
double emd_bidir(std::span<const double> e, std::span<const double> s);

/// emd_bidir applied separately to the positive and negative parts, so
/// events of opposite polarity never cancel.
double emd_polar(std::span<const double> e, std::span<const double> s);

/// | sum |s| - sum |e| |
double count_loss(std::span<const double> e, std::span<const double> s);

struct PixelLoss {
  double emd = 0.0;
  double count = 0.0;
  double total(double lambda) const { return emd + lambda * count; }
};

PixelLoss pixel_loss(std::span<const double> e, std::span<const double> s);

/// Subgradient of emd_polar + lambda * count_loss with respect to s, written
/// to grad (same length). sign(0) is taken as 0 for cumulative differences
/// and the count term; the channel split pos/neg uses slopes 1 / -1 at s = 0.
void pixel_loss_grad(std::span<const double> e, std::span<const double> s, double lambda, std::span<double> grad);

/// Mean over pixels of emd_polar + lambda * count_loss.
LossReport total_loss(const SpikeTrain& e, const SpikeTrain& s, const LossConfig& cfg, bool per_pixel = false);

/// Gradient of total_loss with respect to every entry of s, in the SpikeTrain
/// layout (pixel-major).
std::vector<double> loss_grad(const SpikeTrain& e, const SpikeTrain& s, const LossConfig& cfg);

}  // namespace evtrace
