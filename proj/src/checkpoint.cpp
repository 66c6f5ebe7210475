#include <cmath>
#include <fstream>

#include "evtrace/binio.hpp"
#include "evtrace/errors.hpp"
#include "evtrace/evsnet.hpp"

namespace evtrace {

namespace {
constexpr std::uint16_t kVersion = 1;

std::size_t as_count(float v, const char* what) {
  if (!(v >= 1.0f) || v != std::floor(v) || v > 1e6f) {
    throw FormatError(std::string("EVSN: bad ") + what + " in config block");
  }
  return static_cast<std::size_t>(v);
}
}  // namespace

void write_checkpoint(std::ostream& out, const EvsNetParams& params) {
  const auto& cfg = params.config();
  binio::put_magic(out, "EVSN");
  binio::put<std::uint16_t>(out, kVersion);
  binio::put<float>(out, static_cast<float>(cfg.channels));
  binio::put<float>(out, static_cast<float>(cfg.kernel));
  binio::put<float>(out, static_cast<float>(cfg.depth));
  binio::put<float>(out, static_cast<float>(cfg.lif.tau));
  binio::put<float>(out, static_cast<float>(cfg.lif.v_th));
  binio::put<float>(out, static_cast<float>(cfg.surrogate.alpha));
  for (const TensorSlot& slot : params.layout()) {
    binio::put<std::uint32_t>(out, static_cast<std::uint32_t>(slot.dims.size()));
    for (auto d : slot.dims) binio::put<std::uint32_t>(out, d);
    for (std::size_t i = 0; i < slot.size; ++i) binio::put<float>(out, params.flat()[slot.offset + i]);
  }
  if (!out) throw FormatError("checkpoint write failed");
}

EvsNetParams read_checkpoint(std::istream& in) {
  binio::expect_magic(in, "EVSN");
  const auto version = binio::get<std::uint16_t>(in, "version");
  if (version != kVersion) throw FormatError("unsupported EVSN version " + std::to_string(version));
  EvsNetConfig cfg;
  cfg.channels = as_count(binio::get<float>(in, "config"), "channel count");
  cfg.kernel = as_count(binio::get<float>(in, "config"), "kernel size");
  cfg.depth = as_count(binio::get<float>(in, "config"), "depth");
  cfg.lif.tau = binio::get<float>(in, "config");
  cfg.lif.v_th = binio::get<float>(in, "config");
  cfg.surrogate.alpha = binio::get<float>(in, "config");
  try {
    cfg.validate();
  } catch (const ConfigError& err) {
    throw FormatError(std::string("EVSN: ") + err.what());
  }

  EvsNetParams params(cfg);
  for (const TensorSlot& slot : params.layout()) {
    const auto rank = binio::get<std::uint32_t>(in, "tensor rank");
    if (rank != slot.dims.size()) throw FormatError("EVSN: tensor " + slot.name + " has wrong rank");
    for (auto d : slot.dims) {
      if (binio::get<std::uint32_t>(in, "tensor dims") != d) {
        throw FormatError("EVSN: tensor " + slot.name + " has wrong shape");
      }
    }
    for (std::size_t i = 0; i < slot.size; ++i) {
      const float v = binio::get<float>(in, "tensor data");
      if (!std::isfinite(v)) throw FormatError("EVSN: non-finite value in " + slot.name);
      params.flat()[slot.offset + i] = v;
    }
  }
  binio::expect_eof(in, "EVSN tensors");
  return params;
}

void write_checkpoint(const std::filesystem::path& path, const EvsNetParams& params) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  write_checkpoint(out, params);
}

EvsNetParams read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  return read_checkpoint(in);
}

}  // namespace evtrace
