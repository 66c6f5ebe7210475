#pragma once

#include "evtrace/core.hpp"

namespace evtrace {

struct LuminanceConfig {
  /// Knee of the lin-log map; below it the curve is linear through the origin.
  double rho_log = 0.02;

  void validate() const;
};

/// Rec. 709 luma: 0.2126 R + 0.7152 G + 0.0722 B.
double luma(const Rgb& rgb);

/// ln L above the knee, (ln rho / rho) L below it. Continuous at rho and 0 at 0.
double lin_log(double luminance, const LuminanceConfig& cfg);

/// X_k = lin_log(luma(I_k)) - lin_log(luma(I_{k-1})) for k = 1..K, per pixel.
/// Computed in double, stored as float.
LogDiffSeq log_diff_sequence(const FrameSeq& frames, const LuminanceConfig& cfg, unsigned workers = 1);

}  // namespace evtrace
