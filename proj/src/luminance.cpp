#include "evtrace/luminance.hpp"

#include <cmath>
#include <vector>

#include "evtrace/errors.hpp"
#include "evtrace/parallel.hpp"
#include "evtrace/simd/kernels.hpp"

namespace evtrace {

void LuminanceConfig::validate() const {
  if (!(rho_log > 0.0 && rho_log < 1.0)) throw ConfigError("luminance.rho must lie in (0, 1)");
}

double luma(const Rgb& rgb) {
  return 0.2126 * static_cast<double>(rgb.r) + 0.7152 * static_cast<double>(rgb.g) +
         0.0722 * static_cast<double>(rgb.b);
}

double lin_log(double luminance, const LuminanceConfig& cfg) {
  if (luminance >= cfg.rho_log) return std::log(luminance);
  return std::log(cfg.rho_log) / cfg.rho_log * luminance;
}

LogDiffSeq log_diff_sequence(const FrameSeq& frames, const LuminanceConfig& cfg, unsigned workers) {
  cfg.validate();
  const std::size_t pixels = frames.pixel_count();
  const std::size_t ticks = frames.frame_count() - 1;
  std::vector<float> data(pixels * ticks);
  const auto& kern = simd::kernels();

  parallel_chunks(pixels, workers, [&](std::size_t, std::size_t begin, std::size_t end) {
    const std::size_t count = end - begin;
    std::vector<double> prev(count);
    std::vector<double> cur(count);
    kern.luma(frames.frame(0).data() + 3 * begin, prev.data(), count);
    for (double& v : prev) v = lin_log(v, cfg);
    for (std::size_t k = 1; k <= ticks; ++k) {
      kern.luma(frames.frame(k).data() + 3 * begin, cur.data(), count);
      for (std::size_t i = 0; i < count; ++i) {
        cur[i] = lin_log(cur[i], cfg);
        data[(begin + i) * ticks + (k - 1)] = static_cast<float>(cur[i] - prev[i]);
      }
      std::swap(prev, cur);
    }
  });
  return LogDiffSeq(frames.width(), frames.height(), frames.fps(), ticks, std::move(data));
}

}  // namespace evtrace
