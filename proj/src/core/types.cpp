#include <cmath>
#include <string>
#include <type_traits>

#include "evtrace/core.hpp"
#include "evtrace/errors.hpp"

namespace evtrace {

FrameSeq::FrameSeq(std::uint32_t width, std::uint32_t height, float fps, std::vector<float> data)
    : width_(width), height_(height), fps_(fps), data_(std::move(data)) {
  if (width == 0 || height == 0) throw ValueError("FrameSeq: empty frame extent");
  if (!(fps > 0.0f) || !std::isfinite(fps)) throw ValueError("FrameSeq: fps must be positive");
  if (data_.size() % frame_stride() != 0) throw ValueError("FrameSeq: data is not a whole number of frames");
  if (frame_count() < 2) throw ValueError("FrameSeq: need at least two frames");
  for (float v : data_) {
    if (!(v >= 0.0f) || !std::isfinite(v)) throw ValueError("FrameSeq: radiance must be finite and non-negative");
  }
}

template <typename T>
PixelSeq<T>::PixelSeq(std::uint32_t width, std::uint32_t height, double fps, std::size_t ticks, std::vector<T> data)
    : width_(width), height_(height), fps_(fps), ticks_(ticks), data_(std::move(data)) {
  if (!(fps > 0.0) || !std::isfinite(fps)) throw ValueError("sequence fps must be positive");
  if (data_.size() != pixel_count() * ticks_) {
    throw ShapeError("sequence data has " + std::to_string(data_.size()) + " entries, expected " +
                     std::to_string(pixel_count() * ticks_));
  }
  if constexpr (std::is_floating_point_v<T>) {
    for (T v : data_) {
      if (!std::isfinite(v)) throw ValueError("LogDiffSeq entries must be finite");
    }
  } else {
    for (T v : data_) {
      if (v < -1 || v > 1) throw ValueError("SpikeTrain entries must be in {-1, 0, +1}");
    }
  }
}

template class PixelSeq<float>;
template class PixelSeq<std::int8_t>;

EventList::EventList(std::uint32_t width, std::uint32_t height, std::vector<Event> records)
    : width_(width), height_(height), records_(std::move(records)) {
  for (std::size_t i = 0; i < records_.size(); ++i) {
    const Event& ev = records_[i];
    if (ev.x >= width_ || ev.y >= height_) {
      throw RangeError("event at (" + std::to_string(ev.x) + ", " + std::to_string(ev.y) + ") outside " +
                       std::to_string(width_) + "x" + std::to_string(height_));
    }
    if (ev.t_us < 0) throw RangeError("negative event timestamp");
    if (ev.p != 1 && ev.p != -1) throw ValueError("event polarity must be +1 or -1");
    if (i > 0 && !event_before(records_[i - 1], ev)) {
      throw ValueError("events must be strictly ordered by (t, y, x)");
    }
  }
}

VoxelGrid::VoxelGrid(std::uint32_t width, std::uint32_t height, double bin_fps, std::size_t bins)
    : width_(width),
      height_(height),
      bin_fps_(bin_fps),
      bins_(bins),
      signed_(bins * std::size_t{width} * height, 0),
      unsigned_(bins * std::size_t{width} * height, 0) {}

}  // namespace evtrace
