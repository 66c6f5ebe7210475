#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "evtrace/core.hpp"

namespace evtrace {

enum class SceneKind { moving_edge, grating, flashing_light, mixed };

std::string_view scene_kind_name(SceneKind kind);
SceneKind parse_scene_kind(std::string_view name);

/// Procedural stand-in for a rendered high-frame-rate video.
struct SceneSpec {
  SceneKind kind = SceneKind::moving_edge;
  std::uint32_t width = 32;
  std::uint32_t height = 32;
  double fps = 1000.0;
  double duration = 0.513;  // seconds
  double velocity = 40.0;   // px/s; edge and grating drift along +x
  double spatial_freq = 0.125;  // grating cycles/px
  double flash_period = 0.1;    // seconds; light is on during the first half
  double contrast = 0.8;
  std::uint64_t seed = 1;

  void validate() const;
  /// round(duration * fps)
  std::size_t frame_count() const;
};

/// Shot-noise stand-in for low sample-count rendering.
struct NoiseModel {
  std::uint32_t spp = 64;
  double gain = 0.5;
  std::uint64_t seed = 2;

  void validate() const;
  double sigma() const;
};

/// Left edge of the bright half-plane of a moving_edge scene at time t
/// (seconds), in pixels, before wrapping to [0, width).
double edge_position(const SceneSpec& spec, double t);

/// Renders the scene. Radiances lie in [0, 1]; edges are anti-aliased with
/// exact pixel coverage so sub-pixel motion changes luminance smoothly.
FrameSeq gen_scene(const SceneSpec& spec, unsigned workers = 1);

/// Multiplicative Gaussian noise with std gain / sqrt(spp), clamped at 0.
/// Each (frame, x, y, channel) draws from its own counter-based stream.
FrameSeq add_render_noise(const FrameSeq& frames, const NoiseModel& model, unsigned workers = 1);

}  // namespace evtrace
