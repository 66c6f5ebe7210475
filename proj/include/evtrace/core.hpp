#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace evtrace {

struct Rgb {
  float r = 0.0f;
  float g = 0.0f;
  float b = 0.0f;
};

/// A (K+1)-frame RGB sequence of linear radiance, row-major and
/// channel-interleaved: frame k, pixel (x, y), channel c lives at
/// ((k * height + y) * width + x) * 3 + c.
class FrameSeq {
 public:
  FrameSeq(std::uint32_t width, std::uint32_t height, float fps, std::vector<float> data);

  std::uint32_t width() const { return width_; }
  std::uint32_t height() const { return height_; }
  float fps() const { return fps_; }
  std::size_t frame_count() const { return data_.size() / frame_stride(); }
  std::size_t pixel_count() const { return std::size_t{width_} * height_; }
  std::size_t frame_stride() const { return pixel_count() * 3; }

  std::span<const float> frame(std::size_t k) const {
    return std::span<const float>(data_).subspan(k * frame_stride(), frame_stride());
  }
  Rgb pixel(std::size_t k, std::uint32_t x, std::uint32_t y) const {
    const float* p = data_.data() + k * frame_stride() + (std::size_t{y} * width_ + x) * 3;
    return {p[0], p[1], p[2]};
  }
  std::span<const float> data() const { return data_; }

  friend bool operator==(const FrameSeq&, const FrameSeq&) = default;

 private:
  std::uint32_t width_;
  std::uint32_t height_;
  float fps_;
  std::vector<float> data_;
};

/// Dense per-pixel sequences of length K, pixel-major: pixel p = y * width + x
/// occupies [p * K, (p + 1) * K). Shared layout of LogDiffSeq and SpikeTrain.
template <typename T>
class PixelSeq {
 public:
  PixelSeq(std::uint32_t width, std::uint32_t height, double fps, std::size_t ticks, std::vector<T> data);
  PixelSeq(std::uint32_t width, std::uint32_t height, double fps, std::size_t ticks)
      : PixelSeq(width, height, fps, ticks, std::vector<T>(std::size_t{width} * height * ticks)) {}

  std::uint32_t width() const { return width_; }
  std::uint32_t height() const { return height_; }
  double fps() const { return fps_; }
  std::size_t ticks() const { return ticks_; }
  std::size_t pixel_count() const { return std::size_t{width_} * height_; }

  std::span<const T> row(std::size_t pixel) const {
    return std::span<const T>(data_).subspan(pixel * ticks_, ticks_);
  }
  std::span<T> row(std::size_t pixel) { return std::span<T>(data_).subspan(pixel * ticks_, ticks_); }
  std::span<const T> row(std::uint32_t x, std::uint32_t y) const { return row(std::size_t{y} * width_ + x); }
  std::span<const T> data() const { return data_; }
  std::span<T> data() { return data_; }

  template <typename U>
  bool same_shape(const PixelSeq<U>& o) const {
    return width_ == o.width() && height_ == o.height() && ticks_ == o.ticks();
  }

  friend bool operator==(const PixelSeq&, const PixelSeq&) = default;

 private:
  std::uint32_t width_;
  std::uint32_t height_;
  double fps_;
  std::size_t ticks_;
  std::vector<T> data_;
};

/// Per-pixel log-luminance differences X_1..X_K.
using LogDiffSeq = PixelSeq<float>;
/// Dense event stream; every entry is -1, 0 or +1.
using SpikeTrain = PixelSeq<std::int8_t>;

struct Event {
  std::int64_t t_us = 0;
  std::uint16_t x = 0;
  std::uint16_t y = 0;
  std::int8_t p = 1;

  friend bool operator==(const Event&, const Event&) = default;
};

/// Canonical event order: time, then row, then column.
inline bool event_before(const Event& a, const Event& b) {
  if (a.t_us != b.t_us) return a.t_us < b.t_us;
  if (a.y != b.y) return a.y < b.y;
  return a.x < b.x;
}

/// Sorted sparse event stream. The constructor validates ordering, bounds
/// and polarity.
class EventList {
 public:
  EventList(std::uint32_t width, std::uint32_t height, std::vector<Event> records = {});

  std::uint32_t width() const { return width_; }
  std::uint32_t height() const { return height_; }
  std::span<const Event> records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }

  friend bool operator==(const EventList&, const EventList&) = default;

 private:
  std::uint32_t width_;
  std::uint32_t height_;
  std::vector<Event> records_;
};

/// Events integrated into fixed-rate temporal bins. Counts for bin b, pixel p
/// live at b * pixel_count + p.
class VoxelGrid {
 public:
  VoxelGrid(std::uint32_t width, std::uint32_t height, double bin_fps, std::size_t bins);

  std::uint32_t width() const { return width_; }
  std::uint32_t height() const { return height_; }
  double bin_fps() const { return bin_fps_; }
  std::size_t bins() const { return bins_; }
  std::size_t pixel_count() const { return std::size_t{width_} * height_; }

  std::int32_t signed_count(std::size_t bin, std::size_t pixel) const { return signed_[bin * pixel_count() + pixel]; }
  std::int32_t unsigned_count(std::size_t bin, std::size_t pixel) const {
    return unsigned_[bin * pixel_count() + pixel];
  }
  std::span<const std::int32_t> unsigned_counts() const { return unsigned_; }
  std::span<const std::int32_t> signed_counts() const { return signed_; }

 private:
  friend VoxelGrid voxelize(const EventList&, double, std::optional<std::int64_t>);

  std::uint32_t width_;
  std::uint32_t height_;
  double bin_fps_;
  std::size_t bins_;
  std::vector<std::int32_t> signed_;
  std::vector<std::int32_t> unsigned_;
};

/// Microsecond timestamp of tick k at the given rate: round(k * 1e6 / fps).
std::int64_t tick_to_us(std::size_t k, double fps);

EventList dense_to_sparse(const SpikeTrain& s);

/// Inverse of dense_to_sparse. Each timestamp must map onto an integer tick
/// in [0, ticks); throws RangeError otherwise and CollisionError when two
/// records share a (pixel, tick).
SpikeTrain sparse_to_dense(const EventList& e, double fps, std::size_t ticks);

/// Bin index = floor(t * bin_fps / 1e6). Bin count is ceil(duration * bin_fps)
/// with duration defaulting to (last timestamp + 1us); at least one bin.
VoxelGrid voxelize(const EventList& e, double bin_fps, std::optional<std::int64_t> duration_us = std::nullopt);

}  // namespace evtrace
