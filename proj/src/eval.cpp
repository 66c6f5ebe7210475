#include "evtrace/eval.hpp"

#include <fstream>
#include <iomanip>
#include <limits>

#include "evtrace/errors.hpp"
#include "evtrace/loss.hpp"

namespace evtrace {

IntensityHistogram intensity_histogram(const EventList& e, double bin_fps, std::size_t buckets,
                                       std::optional<std::int64_t> duration_us) {
  if (buckets < 2) throw ConfigError("histogram needs at least two buckets");
  const VoxelGrid grid = voxelize(e, bin_fps, duration_us);
  IntensityHistogram h;
  h.bin_fps = bin_fps;
  h.bins = grid.bins();
  h.pixels = grid.pixel_count();
  h.counts.assign(buckets, 0);
  for (std::int32_t c : grid.unsigned_counts()) {
    h.counts[std::min<std::size_t>(static_cast<std::size_t>(c), buckets - 1)] += 1;
  }
  return h;
}

void write_histogram_csv(const std::filesystem::path& path, const IntensityHistogram& h) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  out << "bucket,count\n";
  for (std::size_t i = 0; i < h.counts.size(); ++i) {
    if (i + 1 == h.counts.size()) {
      out << ">=" << i;
    } else {
      out << i;
    }
    out << ',' << h.counts[i] << '\n';
  }
}

namespace {

double ratio(double num, double den) {
  if (den == 0.0) return num == 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
  return num / den;
}

}  // namespace

StreamDistanceReport stream_distance(const SpikeTrain& a, const SpikeTrain& b) {
  if (!a.same_shape(b)) throw ShapeMismatchError("stream_distance: trains differ in shape");
  StreamDistanceReport r;
  r.pixels = a.pixel_count();
  double pos_a = 0, neg_a = 0, pos_b = 0, neg_b = 0;
  std::vector<double> ra(a.ticks()), rb(a.ticks());
  for (std::size_t p = 0; p < r.pixels; ++p) {
    const auto ar = a.row(p);
    const auto br = b.row(p);
    for (std::size_t k = 0; k < ar.size(); ++k) {
      ra[k] = ar[k];
      rb[k] = br[k];
      pos_a += ar[k] > 0;
      neg_a += ar[k] < 0;
      pos_b += br[k] > 0;
      neg_b += br[k] < 0;
    }
    r.mean_emd += emd_polar(rb, ra);
  }
  if (r.pixels > 0) r.mean_emd /= static_cast<double>(r.pixels);
  r.count_ratio = ratio(pos_a + neg_a, pos_b + neg_b);
  r.pos_count_ratio = ratio(pos_a, pos_b);
  r.neg_count_ratio = ratio(neg_a, neg_b);
  return r;
}

void write_distance_csv(const std::filesystem::path& path, const StreamDistanceReport& r) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  out << "pixels,mean_emd,count_ratio,pos_count_ratio,neg_count_ratio\n" << std::setprecision(10);
  out << r.pixels << ',' << r.mean_emd << ',' << r.count_ratio << ',' << r.pos_count_ratio << ','
      << r.neg_count_ratio << '\n';
}

}  // namespace evtrace
