#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "evtrace/core.hpp"

namespace evtrace {

struct IntensityHistogram {
  double bin_fps = 60.0;
  std::size_t bins = 0;    // temporal bins of the voxel grid
  std::size_t pixels = 0;
  /// counts[i] = number of (pixel, bin) cells holding exactly i events; the
  /// last bucket collects everything at or above buckets - 1.
  std::vector<std::uint64_t> counts;
};

/// Voxelizes at bin_fps and histograms per-cell unsigned event counts.
IntensityHistogram intensity_histogram(const EventList& e, double bin_fps = 60.0, std::size_t buckets = 32,
                                       std::optional<std::int64_t> duration_us = std::nullopt);

/// "bucket,count" rows; the overflow bucket is labelled ">=N".
void write_histogram_csv(const std::filesystem::path& path, const IntensityHistogram& h);

struct StreamDistanceReport {
  double mean_emd = 0.0;  // mean per-pixel bidirectional polar EMD
  double count_ratio = 0.0;
  double pos_count_ratio = 0.0;
  double neg_count_ratio = 0.0;
  std::size_t pixels = 0;
};

/// Ratios are sum|a| / sum|b| (overall and per polarity); 1 when both sums
/// are zero, +inf when only the denominator is.
StreamDistanceReport stream_distance(const SpikeTrain& a, const SpikeTrain& b);

/// "pixels,mean_emd,count_ratio,pos_count_ratio,neg_count_ratio" header plus one row.
void write_distance_csv(const std::filesystem::path& path, const StreamDistanceReport& r);

}  // namespace evtrace
