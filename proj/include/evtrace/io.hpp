#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>

#include "evtrace/core.hpp"

namespace evtrace {

// EVT1: "EVT1", u16 version=1, u16 width, u16 height, u32 count, then packed
// {u32 t_us, u16 x, u16 y, i8 p} records. Little-endian throughout.
void write_evt1(std::ostream& out, const EventList& e);
EventList read_evt1(std::istream& in);
void write_evt1(const std::filesystem::path& path, const EventList& e);
EventList read_evt1(const std::filesystem::path& path);

// CSV: header "t_us,x,y,p", one decimal record per line. The format carries
// no extent, so readers take it from the caller or infer max coordinate + 1.
struct CsvExtent {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
};
void write_csv(std::ostream& out, const EventList& e);
EventList read_csv(std::istream& in, std::optional<CsvExtent> extent = std::nullopt);
void write_csv(const std::filesystem::path& path, const EventList& e);
EventList read_csv(const std::filesystem::path& path, std::optional<CsvExtent> extent = std::nullopt);

// FSEQ: "FSEQ", u16 version=1, u16 width, u16 height, u32 frame_count,
// f32 fps, u8 channels=3, then f32 frames row-major, channel-interleaved.
void write_fseq(std::ostream& out, const FrameSeq& f);
FrameSeq read_fseq(std::istream& in);
void write_fseq(const std::filesystem::path& path, const FrameSeq& f);
FrameSeq read_fseq(const std::filesystem::path& path);

/// Picks CSV for a ".csv" extension and EVT1 otherwise.
void write_events(const std::filesystem::path& path, const EventList& e);
EventList read_events(const std::filesystem::path& path, std::optional<CsvExtent> extent = std::nullopt);

}  // namespace evtrace
