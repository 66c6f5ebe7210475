#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "evtrace/evsnet.hpp"
#include "evtrace/loss.hpp"
#include "evtrace/luminance.hpp"
#include "evtrace/refsim.hpp"
#include "evtrace/scenegen.hpp"
#include "evtrace/train.hpp"

namespace evtrace::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kDataError = 2, kDiverged = 3 };

/// Flat "section.key = value" configuration. Every key has a default; unknown
/// keys are rejected. Seeds set to "auto" derive from run.seed.
class RunConfig {
 public:
  RunConfig();

  /// Parses a config file: one "section.key = value" per line, '#' comments.
  void load_file(const std::filesystem::path& path);
  void load(std::istream& in, std::string_view origin = "<config>");
  void set(std::string_view key, std::string value);

  const std::string& get(std::string_view key) const;
  double get_double(std::string_view key) const;
  std::uint64_t get_u64(std::string_view key) const;
  /// Module seed: the explicit value, or one derived from run.seed when "auto".
  std::uint64_t seed_for(std::string_view key) const;

  /// Sorted "key = value" lines.
  std::string dump() const;

  unsigned workers() const;
  SceneSpec scene() const;
  NoiseModel noise() const;
  LuminanceConfig luminance() const;
  RefSimConfig refsim() const;
  EvsNetConfig net() const;
  LossConfig loss() const;
  TrainConfig train() const;
  InferOptions infer() const;
  std::vector<SceneSpec> training_scenes() const;

 private:
  std::map<std::string, std::string, std::less<>> values_;
};

/// Runs the command line; returns the process exit code. Diagnostics go to err.
int run(const std::vector<std::string>& args, std::ostream& err);

}  // namespace evtrace::cli
