#include "evtrace/io.hpp"

#include <charconv>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

#include "evtrace/binio.hpp"
#include "evtrace/errors.hpp"

namespace evtrace {

namespace {

constexpr std::uint16_t kVersion = 1;

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  return in;
}

void check_version(std::uint16_t v, std::string_view format) {
  if (v != kVersion) throw FormatError("unsupported " + std::string(format) + " version " + std::to_string(v));
}

std::uint16_t narrow_extent(std::uint32_t v, std::string_view what) {
  if (v > std::numeric_limits<std::uint16_t>::max()) throw RangeError(std::string(what) + " exceeds 65535");
  return static_cast<std::uint16_t>(v);
}

template <typename T>
T parse_int(std::string_view field, std::size_t line) {
  T value{};
  const auto* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (ec != std::errc{} || ptr != end) {
    throw FormatError("line " + std::to_string(line) + ": bad integer \"" + std::string(field) + "\"");
  }
  return value;
}

}  // namespace

void write_evt1(std::ostream& out, const EventList& e) {
  if (e.size() > std::numeric_limits<std::uint32_t>::max()) throw RangeError("too many events for EVT1");
  binio::put_magic(out, "EVT1");
  binio::put<std::uint16_t>(out, kVersion);
  binio::put<std::uint16_t>(out, narrow_extent(e.width(), "width"));
  binio::put<std::uint16_t>(out, narrow_extent(e.height(), "height"));
  binio::put<std::uint32_t>(out, static_cast<std::uint32_t>(e.size()));
  for (const Event& ev : e.records()) {
    if (ev.t_us > std::numeric_limits<std::uint32_t>::max()) throw RangeError("timestamp exceeds u32 microseconds");
    binio::put<std::uint32_t>(out, static_cast<std::uint32_t>(ev.t_us));
    binio::put<std::uint16_t>(out, ev.x);
    binio::put<std::uint16_t>(out, ev.y);
    binio::put<std::int8_t>(out, ev.p);
  }
  if (!out) throw FormatError("write failed");
}

EventList read_evt1(std::istream& in) {
  binio::expect_magic(in, "EVT1");
  check_version(binio::get<std::uint16_t>(in, "version"), "EVT1");
  const auto width = binio::get<std::uint16_t>(in, "width");
  const auto height = binio::get<std::uint16_t>(in, "height");
  const auto count = binio::get<std::uint32_t>(in, "record count");
  std::vector<Event> records;
  records.reserve(std::min<std::uint32_t>(count, 1u << 24));
  for (std::uint32_t i = 0; i < count; ++i) {
    Event ev;
    ev.t_us = binio::get<std::uint32_t>(in, "record");
    ev.x = binio::get<std::uint16_t>(in, "record");
    ev.y = binio::get<std::uint16_t>(in, "record");
    ev.p = binio::get<std::int8_t>(in, "record");
    if (ev.x >= width || ev.y >= height) throw RangeError("EVT1 record outside header extent");
    if (ev.p != 1 && ev.p != -1) throw FormatError("EVT1 record with polarity " + std::to_string(ev.p));
    records.push_back(ev);
  }
  binio::expect_eof(in, "EVT1 records");
  try {
    return EventList(width, height, std::move(records));
  } catch (const ValueError& err) {
    throw FormatError(std::string("EVT1: ") + err.what());
  }
}

void write_csv(std::ostream& out, const EventList& e) {
  out << "t_us,x,y,p\n";
  for (const Event& ev : e.records()) {
    out << ev.t_us << ',' << ev.x << ',' << ev.y << ',' << static_cast<int>(ev.p) << '\n';
  }
  if (!out) throw FormatError("write failed");
}

EventList read_csv(std::istream& in, std::optional<CsvExtent> extent) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError("empty CSV");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "t_us,x,y,p") throw FormatError("CSV header must be \"t_us,x,y,p\"");

  std::vector<Event> records;
  std::uint32_t max_x = 0;
  std::uint32_t max_y = 0;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::string_view rest(line);
    std::string_view fields[4];
    for (int f = 0; f < 4; ++f) {
      const auto comma = rest.find(',');
      if ((f < 3) == (comma == std::string_view::npos)) {
        throw FormatError("line " + std::to_string(line_no) + ": expected 4 fields");
      }
      fields[f] = rest.substr(0, comma);
      rest = f < 3 ? rest.substr(comma + 1) : std::string_view{};
    }
    Event ev;
    ev.t_us = parse_int<std::int64_t>(fields[0], line_no);
    ev.x = parse_int<std::uint16_t>(fields[1], line_no);
    ev.y = parse_int<std::uint16_t>(fields[2], line_no);
    const int p = parse_int<int>(fields[3], line_no);
    if (p != 1 && p != -1) throw FormatError("line " + std::to_string(line_no) + ": polarity must be 1 or -1");
    ev.p = static_cast<std::int8_t>(p);
    max_x = std::max<std::uint32_t>(max_x, ev.x);
    max_y = std::max<std::uint32_t>(max_y, ev.y);
    records.push_back(ev);
  }
  CsvExtent ext = extent.value_or(CsvExtent{records.empty() ? 1 : max_x + 1, records.empty() ? 1 : max_y + 1});
  try {
    return EventList(ext.width, ext.height, std::move(records));
  } catch (const ValueError& err) {
    throw FormatError(std::string("CSV: ") + err.what());
  }
}

void write_fseq(std::ostream& out, const FrameSeq& f) {
  if (f.frame_count() > std::numeric_limits<std::uint32_t>::max()) throw RangeError("too many frames for FSEQ");
  binio::put_magic(out, "FSEQ");
  binio::put<std::uint16_t>(out, kVersion);
  binio::put<std::uint16_t>(out, narrow_extent(f.width(), "width"));
  binio::put<std::uint16_t>(out, narrow_extent(f.height(), "height"));
  binio::put<std::uint32_t>(out, static_cast<std::uint32_t>(f.frame_count()));
  binio::put<float>(out, f.fps());
  binio::put<std::uint8_t>(out, 3);
  for (float v : f.data()) binio::put<float>(out, v);
  if (!out) throw FormatError("write failed");
}

FrameSeq read_fseq(std::istream& in) {
  binio::expect_magic(in, "FSEQ");
  check_version(binio::get<std::uint16_t>(in, "version"), "FSEQ");
  const auto width = binio::get<std::uint16_t>(in, "width");
  const auto height = binio::get<std::uint16_t>(in, "height");
  const auto frames = binio::get<std::uint32_t>(in, "frame count");
  const auto fps = binio::get<float>(in, "fps");
  const auto channels = binio::get<std::uint8_t>(in, "channels");
  if (channels != 3) throw FormatError("FSEQ must have 3 channels, got " + std::to_string(channels));
  const std::size_t n = std::size_t{frames} * width * height * 3;
  std::vector<float> data(n);
  for (std::size_t i = 0; i < n; ++i) data[i] = binio::get<float>(in, "frame data");
  binio::expect_eof(in, "FSEQ frames");
  try {
    return FrameSeq(width, height, fps, std::move(data));
  } catch (const ValueError& err) {
    throw FormatError(std::string("FSEQ: ") + err.what());
  }
}

void write_evt1(const std::filesystem::path& path, const EventList& e) {
  auto out = open_out(path);
  write_evt1(out, e);
}
EventList read_evt1(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_evt1(in);
}
void write_csv(const std::filesystem::path& path, const EventList& e) {
  auto out = open_out(path);
  write_csv(out, e);
}
EventList read_csv(const std::filesystem::path& path, std::optional<CsvExtent> extent) {
  auto in = open_in(path);
  return read_csv(in, extent);
}
void write_fseq(const std::filesystem::path& path, const FrameSeq& f) {
  auto out = open_out(path);
  write_fseq(out, f);
}
FrameSeq read_fseq(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_fseq(in);
}

void write_events(const std::filesystem::path& path, const EventList& e) {
  if (path.extension() == ".csv") {
    write_csv(path, e);
  } else {
    write_evt1(path, e);
  }
}

EventList read_events(const std::filesystem::path& path, std::optional<CsvExtent> extent) {
  if (path.extension() == ".csv") return read_csv(path, extent);
  return read_evt1(path);
}

}  // namespace evtrace
