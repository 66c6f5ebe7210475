#include <algorithm>
#include <cmath>
#include <string>

#include "evtrace/core.hpp"
#include "evtrace/errors.hpp"

namespace evtrace {

std::int64_t tick_to_us(std::size_t k, double fps) {
  return std::llround(static_cast<double>(k) * 1e6 / fps);
}

EventList dense_to_sparse(const SpikeTrain& s) {
  std::vector<Event> records;
  const std::size_t ticks = s.ticks();
  // Walking tick-major then row-major yields (t, y, x) order directly.
  for (std::size_t k = 0; k < ticks; ++k) {
    const std::int64_t t = tick_to_us(k, s.fps());
    for (std::uint32_t y = 0; y < s.height(); ++y) {
      for (std::uint32_t x = 0; x < s.width(); ++x) {
        const std::int8_t v = s.row(x, y)[k];
        if (v != 0) {
          records.push_back({t, static_cast<std::uint16_t>(x), static_cast<std::uint16_t>(y), v});
        }
      }
    }
  }
  return EventList(s.width(), s.height(), std::move(records));
}

SpikeTrain sparse_to_dense(const EventList& e, double fps, std::size_t ticks) {
  SpikeTrain out(e.width(), e.height(), fps, ticks);
  for (const Event& ev : e.records()) {
    const long long k = std::llround(static_cast<double>(ev.t_us) * fps / 1e6);
    if (k < 0 || static_cast<std::size_t>(k) >= ticks) {
      throw RangeError("timestamp " + std::to_string(ev.t_us) + "us maps to tick " + std::to_string(k) +
                       ", outside [0, " + std::to_string(ticks) + ")");
    }
    std::int8_t& slot = out.row(std::size_t{ev.y} * e.width() + ev.x)[static_cast<std::size_t>(k)];
    if (slot != 0) {
      throw CollisionError("two events at pixel (" + std::to_string(ev.x) + ", " + std::to_string(ev.y) +
                           ") map to tick " + std::to_string(k));
    }
    slot = ev.p;
  }
  return out;
}

VoxelGrid voxelize(const EventList& e, double bin_fps, std::optional<std::int64_t> duration_us) {
  if (!(bin_fps > 0.0)) throw ConfigError("voxelize: bin_fps must be positive");
  std::int64_t duration = duration_us.value_or(e.empty() ? 0 : e.records().back().t_us + 1);
  auto bins = static_cast<std::size_t>(std::ceil(static_cast<double>(duration) * bin_fps / 1e6));
  bins = std::max<std::size_t>(bins, 1);

  VoxelGrid grid(e.width(), e.height(), bin_fps, bins);
  const std::size_t pixels = grid.pixel_count();
  for (const Event& ev : e.records()) {
    auto b = static_cast<std::size_t>(std::floor(static_cast<double>(ev.t_us) * bin_fps / 1e6));
    // Events past an explicit duration fold into the last bin so counts are conserved.
    b = std::min(b, bins - 1);
    const std::size_t idx = b * pixels + std::size_t{ev.y} * e.width() + ev.x;
    grid.signed_[idx] += ev.p;
    grid.unsigned_[idx] += 1;
  }
  return grid;
}

}  // namespace evtrace
