#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <optional>
#include <ostream>

#include "evtrace/cli.hpp"
#include "evtrace/errors.hpp"
#include "evtrace/eval.hpp"
#include "evtrace/io.hpp"

namespace evtrace::cli {

namespace {

namespace fs = std::filesystem;

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> workers;
  std::optional<double> theta;
  std::optional<double> lambda;
  std::optional<std::uint64_t> epochs;
  std::vector<std::string> overrides;
};

RunConfig resolve(const CommonFlags& flags) {
  RunConfig cfg;
  if (!flags.config.empty()) cfg.load_file(flags.config);
  for (const std::string& kv : flags.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got \"" + kv + "\"");
    cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (flags.seed) cfg.set("run.seed", std::to_string(*flags.seed));
  if (flags.workers) cfg.set("run.workers", std::to_string(*flags.workers));
  if (flags.theta) cfg.set("refsim.theta", std::to_string(*flags.theta));
  if (flags.lambda) cfg.set("loss.lambda", std::to_string(*flags.lambda));
  if (flags.epochs) cfg.set("train.epochs", std::to_string(*flags.epochs));
  return cfg;
}

void echo_config(const RunConfig& cfg, const fs::path& out, std::string_view command, std::ostream& err) {
  const std::string text = "# evtrace " + std::string(command) + "\n" + cfg.dump();
  err << text;
  const fs::path dir = out.has_parent_path() ? out.parent_path() : fs::path(".");
  std::ofstream f(dir / "run.cfg", std::ios::trunc);
  if (f) f << text;
}

SpikeTrain to_dense(const EventList& e, double fps, std::size_t ticks) { return sparse_to_dense(e, fps, ticks); }

std::size_t ticks_covering(const EventList& e, double fps) {
  if (e.empty()) return 1;
  return static_cast<std::size_t>(std::llround(static_cast<double>(e.records().back().t_us) * fps / 1e6)) + 1;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& err) {
  CLI::App app{"Event-stream synthesis from high-frame-rate video"};
  app.require_subcommand(1);
  CommonFlags flags;
  app.add_option("--config", flags.config, "Key-value config file (section.key = value)");
  app.add_option("--seed", flags.seed, "Global seed (run.seed)");
  app.add_option("--workers", flags.workers, "Worker threads (run.workers)");
  app.add_option("--theta", flags.theta, "Reference contrast threshold (refsim.theta)");
  app.add_option("--lambda", flags.lambda, "Count-loss weight (loss.lambda)");
  app.add_option("--epochs", flags.epochs, "Training epochs (train.epochs)");
  app.add_option("--set", flags.overrides, "Override any config key: section.key=value");

  std::string out, noisy_out, input, input_b, checkpoint, history;
  std::optional<std::int64_t> duration_us;
  std::optional<std::uint32_t> width, height;

  auto* gen = app.add_subcommand("gen", "Render a procedural scene to FSEQ");
  gen->add_option("--out", out, "Clean FSEQ output")->required();
  gen->add_option("--noisy-out", noisy_out, "Also write a noise-corrupted FSEQ");

  auto* simulate_cmd = app.add_subcommand("simulate", "Reference event simulation of an FSEQ");
  simulate_cmd->add_option("input", input, "Input FSEQ")->required();
  simulate_cmd->add_option("--out", out, "Events (.csv or EVT1)")->required();

  auto* train_cmd = app.add_subcommand("train", "Train the spiking network on generated scenes");
  train_cmd->add_option("--out", out, "EVSN checkpoint")->required();
  train_cmd->add_option("--history", history, "History CSV (default: <out>.history.csv)");

  auto* infer_cmd = app.add_subcommand("infer", "Network inference on an FSEQ");
  infer_cmd->add_option("input", input, "Input FSEQ")->required();
  infer_cmd->add_option("--checkpoint", checkpoint, "EVSN checkpoint")->required();
  infer_cmd->add_option("--out", out, "Events (.csv or EVT1)")->required();

  auto* eval_cmd = app.add_subcommand("eval", "Compare two event streams");
  eval_cmd->add_option("events_a", input, "Events under test")->required();
  eval_cmd->add_option("events_b", input_b, "Reference events")->required();
  eval_cmd->add_option("--out", out, "Distance report CSV")->required();
  eval_cmd->add_option("--width", width, "Extent for CSV inputs");
  eval_cmd->add_option("--height", height, "Extent for CSV inputs");
  eval_cmd->add_option("--duration-us", duration_us, "Stream duration for the histograms");

  auto* hist_cmd = app.add_subcommand("hist", "Event-intensity histogram");
  hist_cmd->add_option("input", input, "Events")->required();
  hist_cmd->add_option("--out", out, "Histogram CSV")->required();
  hist_cmd->add_option("--duration-us", duration_us, "Stream duration (default: last event + 1us)");
  hist_cmd->add_option("--width", width, "Extent for CSV inputs");
  hist_cmd->add_option("--height", height, "Extent for CSV inputs");

  for (auto* sub : {gen, simulate_cmd, train_cmd, infer_cmd, eval_cmd, hist_cmd}) sub->fallthrough();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    std::ostringstream msg;
    const int code = app.exit(e, msg, msg);
    err << msg.str();
    return code == 0 ? kOk : kUsage;
  }

  auto extent = [&]() -> std::optional<CsvExtent> {
    if (width && height) return CsvExtent{*width, *height};
    return std::nullopt;
  };

  try {
    const RunConfig cfg = resolve(flags);
    const unsigned workers = cfg.workers();

    if (*gen) {
      const SceneSpec spec = cfg.scene();
      echo_config(cfg, out, "gen", err);
      const FrameSeq clean = gen_scene(spec, workers);
      write_fseq(out, clean);
      if (!noisy_out.empty()) write_fseq(noisy_out, add_render_noise(clean, cfg.noise(), workers));
    } else if (*simulate_cmd) {
      const RefSimConfig ref = cfg.refsim();
      const LuminanceConfig lum = cfg.luminance();
      echo_config(cfg, out, "simulate", err);
      const FrameSeq frames = read_fseq(input);
      const SpikeTrain s = simulate(log_diff_sequence(frames, lum, workers), ref, workers);
      write_events(out, dense_to_sparse(s));
    } else if (*train_cmd) {
      const auto scenes = cfg.training_scenes();
      const EvsNetConfig net = cfg.net();
      TrainConfig tc = cfg.train();
      tc.checkpoint = out;
      echo_config(cfg, out, "train", err);
      const auto data = make_dataset(scenes, cfg.noise(), cfg.refsim(), cfg.luminance(), workers);
      TrainHooks hooks;
      hooks.on_epoch = [&](const EpochRecord& r) {
        err << "epoch " << r.epoch << " train_loss " << r.train_loss << " holdout_loss " << r.holdout_loss << '\n';
      };
      const TrainResult result = train(data, net, tc, hooks);
      write_checkpoint(out, result.params);
      write_history_csv(history.empty() ? fs::path(out + ".history.csv") : fs::path(history), result.history);
    } else if (*infer_cmd) {
      const LuminanceConfig lum = cfg.luminance();
      const InferOptions opts = cfg.infer();
      echo_config(cfg, out, "infer", err);
      const EvsNetParams params = read_checkpoint(checkpoint);
      const FrameSeq frames = read_fseq(input);
      const SpikeTrain s = infer_stream(log_diff_sequence(frames, lum, workers), params, opts);
      write_events(out, dense_to_sparse(s));
    } else if (*eval_cmd) {
      const double fps = cfg.get_double("eval.fps");
      const double bin_fps = cfg.get_double("eval.bin_fps");
      const std::size_t buckets = cfg.get_u64("eval.buckets");
      echo_config(cfg, out, "eval", err);
      const EventList a = read_events(input, extent());
      const EventList b = read_events(input_b, extent());
      if (a.width() != b.width() || a.height() != b.height()) {
        throw ShapeMismatchError("event streams differ in extent");
      }
      std::size_t ticks = cfg.get_u64("eval.ticks");
      if (ticks == 0) ticks = std::max(ticks_covering(a, fps), ticks_covering(b, fps));
      const StreamDistanceReport r = stream_distance(to_dense(a, fps, ticks), to_dense(b, fps, ticks));
      write_distance_csv(out, r);
      const auto duration = duration_us.value_or(tick_to_us(ticks, fps));
      const fs::path stem = fs::path(out).replace_extension();
      write_histogram_csv(stem.string() + ".hist_a.csv", intensity_histogram(a, bin_fps, buckets, duration));
      write_histogram_csv(stem.string() + ".hist_b.csv", intensity_histogram(b, bin_fps, buckets, duration));
    } else if (*hist_cmd) {
      const double bin_fps = cfg.get_double("eval.bin_fps");
      const std::size_t buckets = cfg.get_u64("eval.buckets");
      echo_config(cfg, out, "hist", err);
      const EventList e = read_events(input, extent());
      write_histogram_csv(out, intensity_histogram(e, bin_fps, buckets, duration_us));
    }
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const DivergenceError& e) {
    err << "error: " << e.what() << '\n';
    return kDiverged;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  }
  return kOk;
}

}  // namespace evtrace::cli
