// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

#include "evtrace/cli.hpp"
#include "evtrace/eval.hpp"
#include "evtrace/evsnet.hpp"
#include "evtrace/io.hpp"
#include "evtrace/loss.hpp"
#include "evtrace/refsim.hpp"
#include "evtrace/train.hpp"

using namespace evtrace;
namespace fs = std::filesystem;
using Vec = std::vector<double>;

namespace {

struct Outcome {
  bool ok = true;
  std::ostringstream detail;

  void require(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      detail << " [failed: " << what << "]";
    }
  }
};

int failures = 0;

void criterion(int id, const char* title, double max_seconds, const std::function<void(Outcome&)>& body) {
  Outcome out;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    body(out);
  } catch (const std::exception& e) {
    out.ok = false;
    out.detail << " [exception: " << e.what() << "]";
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (max_seconds > 0) out.require(secs < max_seconds, "runtime < " + std::to_string(max_seconds) + " s");
  if (!out.ok) ++failures;
  std::printf("%s criterion %d: %s (%.2f s)%s\n", out.ok ? "PASS" : "FAIL", id, title, secs, out.detail.str().c_str());
  std::fflush(stdout);
}

std::vector<float> gauss(std::size_t n, std::uint64_t seed, float sd) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> d(0.0f, sd);
  std::vector<float> v(n);
  for (float& x : v) x = d(rng);
  return v;
}

double rel_err(const Vec& a, const Vec& b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += (a[i] - b[i]) * (a[i] - b[i]);
    den += b[i] * b[i];
  }
  return std::sqrt(num) / std::max(std::sqrt(den), 1e-300);
}

// Brute-force EMD: every prefix recomputed from scratch.
double emd_brute(const Vec& e, const Vec& s) {
  double total = 0.0;
  for (std::size_t i = 0; i < e.size(); ++i) {
    double d = 0.0;
    for (std::size_t j = 0; j <= i; ++j) d += s[j] - e[j];
    total += std::abs(d);
  }
  return total / static_cast<double>(e.size());
}
Vec rev(Vec v) {
  std::reverse(v.begin(), v.end());
  return v;
}
Vec channel(const Vec& v, int sign) {
  Vec o(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) o[i] = std::max(sign * v[i], 0.0);
  return o;
}
double bidir_brute(const Vec& e, const Vec& s) { return 0.5 * (emd_brute(e, s) + emd_brute(rev(e), rev(s))); }
double polar_brute(const Vec& e, const Vec& s) {
  return bidir_brute(channel(e, 1), channel(s, 1)) + bidir_brute(channel(e, -1), channel(s, -1));
}

Vec spikes(std::size_t K, std::mt19937_64& rng, double density = 0.2) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Vec v(K);
  for (double& x : v) {
    const double r = u(rng);
    x = r < density / 2 ? 1.0 : (r < density ? -1.0 : 0.0);
  }
  return v;
}

// Integrate-and-drain oracle for one pixel, noise off, zero init.
std::vector<std::int8_t> integrator(const std::vector<float>& x, double theta, double& residual) {
  std::vector<std::int8_t> out;
  double v = 0.0;
  for (float xi : x) {
    v += double{xi};
    const int s = v >= theta ? 1 : (v <= -theta ? -1 : 0);
    out.push_back(static_cast<std::int8_t>(s));
    v -= s * theta;
  }
  residual = v;
  return out;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

unsigned hw_workers() { return std::max(1u, std::thread::hardware_concurrency()); }

// --- criteria -------------------------------------------------------------

void receptive_field_check(Outcome& o) {
  const EvsNetConfig cfg;  // k = 7, M = 3
  const std::size_t W = receptive_field(cfg);
  o.detail << " W=" << W;
  o.require(W == 43, "receptive_field == 43");
  const std::size_t half = (W - 1) / 2, K = 200, k0 = 100;

  auto span_of = [&](const EvsNetParams& p, std::vector<float> x, float bump) {
    const ForwardCache base = forward<float>(x, p);
    x[k0] += bump;
    const ForwardCache pert = forward<float>(x, p);
    std::size_t lo = K, hi = 0;
    for (std::size_t k = 0; k < K; ++k) {
      if (base.logits[k] != pert.logits[k]) {
        lo = std::min(lo, k);
        hi = std::max(hi, k);
      }
    }
    return std::pair{lo, hi};
  };
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const auto [lo, hi] = span_of(init_params(cfg, seed), gauss(K, seed + 10, 0.3f), 1.0f);
    o.require(lo <= hi, "impulse changes some logit");
    o.require(lo + half >= k0 && hi <= k0 + half, "impulse confined to the window");
  }
  // With every ReLU active the perturbation reaches the outermost taps.
  EvsNetParams p(cfg);
  for (float& v : p.flat()) v = 1.0f / static_cast<float>(cfg.channels * cfg.kernel);
  for (std::size_t c = 0; c < cfg.channels; ++c) p.head_w()[c] = 1.0f / static_cast<float>(cfg.channels);
  const auto [lo, hi] = span_of(p, std::vector<float>(K, 0.1f), 10.0f);
  o.detail << " impulse span=" << hi - lo + 1;
  o.require(hi - lo + 1 == W, "all-positive impulse span == 43");
}

void saturation_check(Outcome& o) {
  RefSimConfig cfg;
  cfg.init_mode = InitMode::zero;
  cfg = cfg.noiseless();
  std::vector<float> x(8, 0.0f);
  x[0] = 0.65f;
  const PixelSimResult r = simulate_pixel(x, cfg, 0, 0);
  o.require(r.spikes == std::vector<std::int8_t>{1, 1, 1, 0, 0, 0, 0, 0}, "0.65 -> three +1 spikes");
  o.require(std::abs(r.v_final - 0.05) < 1e-7, "residual 0.05");

  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> th(0.05, 0.5), dl(-3.0, 3.0);
  int exact = 0;
  for (int i = 0; i < 100; ++i) {
    RefSimConfig c = cfg;
    c.theta = th(rng);
    std::vector<float> xi(64, 0.0f);
    xi[5] = static_cast<float>(dl(rng));
    double residual = 0.0;
    const auto want = integrator(xi, c.theta, residual);
    const PixelSimResult got = simulate_pixel(xi, c, 0, 0);
    exact += got.spikes == want && got.v_final == residual;
  }
  o.detail << " oracle matches=" << exact << "/100";
  o.require(exact == 100, "all random pairs match");
}

void emd_check(Outcome& o) {
  o.require(emd(Vec{1, 0, 0}, Vec{0, 0, 1}) == 2.0 / 3.0, "emd 2/3");
  o.require(emd_bidir(Vec{1, 0, 0}, Vec{0, 0, 1}) == 2.0 / 3.0, "bidir 2/3");
  o.require(emd_bidir(Vec{1, 0, 0, 0}, Vec{0, 0, 0, 0}) == 5.0 / 8.0, "bidir 5/8");
  o.require(emd_polar(Vec{1, 0, -1}, Vec{0, 1, -1}) == 1.0 / 3.0, "polar 1/3");
  o.require(emd_polar(Vec{1}, Vec{-1}) == 2.0, "polar 2");
  std::mt19937_64 rng(99);
  std::normal_distribution<double> n(0.0, 0.7);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const std::size_t K = 1 + rng() % 128;
    const Vec e = spikes(K, rng);
    Vec s = spikes(K, rng);
    if (i % 2) {
      for (double& v : s) v = n(rng);
    }
    worst = std::max({worst, std::abs(emd(e, s) - emd_brute(e, s)), std::abs(emd_bidir(e, s) - bidir_brute(e, s)),
                      std::abs(emd_polar(e, s) - polar_brute(e, s))});
  }
  o.detail << " max oracle err=" << worst;
  o.require(worst <= 1e-12, "oracle error <= 1e-12");
}

EvsNetParamsT<double> random_params(const EvsNetConfig& cfg, std::uint64_t seed) {
  EvsNetParamsT<double> p = init_params(cfg, seed).cast<double>();
  std::mt19937_64 rng(seed + 100);
  std::normal_distribution<double> n(0.0, 0.1);
  for (const TensorSlot& s : p.layout()) {
    if (s.dims.size() == 1) {
      for (std::size_t i = 0; i < s.size; ++i) p.flat()[s.offset + i] = n(rng);
    }
  }
  return p;
}

template <class F>
Vec central_diff(EvsNetParamsT<double>& p, F&& f, double eps = 1e-6) {
  Vec fd(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double keep = p.flat()[i];
    p.flat()[i] = keep + eps;
    const double up = f(p);
    p.flat()[i] = keep - eps;
    const double dn = f(p);
    p.flat()[i] = keep;
    fd[i] = (up - dn) / (2 * eps);
  }
  return fd;
}

void gradient_check(Outcome& o) {
  {
    EvsNetConfig cfg;
    cfg.channels = 4;
    const std::size_t K = 32;
    EvsNetParamsT<double> p = random_params(cfg, 21);
    const auto xf = gauss(K, 22, 1.0f), rf = gauss(K, 23, 1.0f);
    const Vec x(xf.begin(), xf.end()), r(rf.begin(), rf.end());
    auto loss = [&](const EvsNetParamsT<double>& q) {
      const auto c = forward<double>(x, q);
      double l = 0.0;
      for (std::size_t k = 0; k < K; ++k) l += r[k] * c.logits[k];
      return l;
    };
    const auto cache = forward<double>(x, p);
    EvsNetParamsT<double> g(cfg);
    Vec gx(K);
    backward_from_logits<double>(r, cache, p, TransposedWeights<double>(p), g, gx);
    const double err = rel_err(Vec(g.flat().begin(), g.flat().end()), central_diff(p, loss));
    o.detail << " conv=" << err;
    o.require(err < 1e-5, "conv-stack rel err < 1e-5");
  }
  {
    EvsNetConfig cfg;
    cfg.channels = 4;
    cfg.depth = 2;
    const std::size_t K = 48;
    EvsNetParamsT<double> p = random_params(cfg, 31);
    const auto xf = gauss(K, 32, 1.5f), wf = gauss(K, 33, 1.0f);
    const Vec x(xf.begin(), xf.end()), w(wf.begin(), wf.end());
    const auto cache = forward<double>(x, p, 0.1);
    auto relaxed = [&](const EvsNetParamsT<double>& q) {
      const auto c = forward<double>(x, q, 0.1);
      double v = 0.1, l = 0.0;
      for (std::size_t k = 0; k < K; ++k) {
        const double charged = cfg.lif.decay() * v + c.logits[k];
        l += w[k] * relaxed_bilif(charged, cfg.lif.v_th, cfg.surrogate.alpha);
        v = charged - cache.spikes[k] * cfg.lif.v_th;
      }
      return l;
    };
    EvsNetParamsT<double> g(cfg);
    backward<double>(w, cache, p, TransposedWeights<double>(p), g);
    const double err = rel_err(Vec(g.flat().begin(), g.flat().end()), central_diff(p, relaxed));
    o.detail << " surrogate=" << err;
    o.require(err < 1e-3, "surrogate path rel err < 1e-3");
  }
  {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.05, 0.45);
    double worst = 0.0;
    int checked = 0;
    for (int trial = 0; trial < 2000 && checked < 100; ++trial) {
      const std::size_t K = 4 + rng() % 20;
      const Vec e = spikes(K, rng, 0.4);
      Vec s(K);
      for (double& v : s) v = (rng() % 2 ? 1.0 : -1.0) * u(rng);
      // Skip draws near a kink of |cumulative difference| or of the count term.
      double margin = 1e300;
      for (int sign : {1, -1}) {
        const Vec pe = channel(e, sign), ps = channel(s, sign);
        for (const bool backward_dir : {false, true}) {
          double ce = 0.0, cs = 0.0;
          for (std::size_t n = 0; n < K; ++n) {
            const std::size_t i = backward_dir ? K - 1 - n : n;
            ce += pe[i];
            cs += ps[i];
            if (ce != 0.0 || cs != 0.0) margin = std::min(margin, std::abs(ce - cs));
          }
        }
      }
      double ne = 0.0, ns = 0.0;
      for (std::size_t i = 0; i < K; ++i) {
        ne += std::abs(e[i]);
        ns += std::abs(s[i]);
      }
      margin = std::min(margin, std::abs(ne - ns));
      if (margin < 1e-3) continue;
      ++checked;
      const double lambda = 0.1;
      auto L = [&](const Vec& v) { return emd_polar(e, v) + lambda * count_loss(e, v); };
      Vec g(K), fd(K);
      pixel_loss_grad(e, s, lambda, g);
      for (std::size_t j = 0; j < K; ++j) {
        Vec up = s, dn = s;
        up[j] += 1e-7;
        dn[j] -= 1e-7;
        fd[j] = (L(up) - L(dn)) / 2e-7;
      }
      worst = std::max(worst, rel_err(g, fd));
    }
    o.detail << " loss=" << worst << " over " << checked << " points";
    o.require(checked == 100, "100 non-kink points checked");
    o.require(worst < 1e-4, "loss subgradient rel err < 1e-4");
  }
}

void conservation_check(Outcome& o) {
  RefSimConfig cfg;
  cfg.init_mode = InitMode::zero;
  cfg = cfg.noiseless();
  std::mt19937_64 rng(17);
  double worst = 0.0;
  for (int trial = 0; trial < 500; ++trial) {
    cfg.theta = 0.05 + 0.45 * std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    const auto x = gauss(256, rng(), 0.05f + 0.1f * static_cast<float>(trial % 5));
    const PixelSimResult r = simulate_pixel(x, cfg, 0, 0);
    double sx = 0.0, ss = 0.0;
    for (float v : x) sx += v;
    for (auto s : r.spikes) ss += s;
    worst = std::max(worst, std::abs(cfg.theta * ss + r.v_final - sx));
  }
  o.detail << " max |theta*sum S + V - sum X|=" << worst;
  o.require(worst <= 1e-6, "refsim conservation to 1e-6");

  std::size_t mismatched = 0;
  for (int trial = 0; trial < 50; ++trial) {
    std::uniform_int_distribution<int> t(0, 300000), xy(0, 7), pol(0, 1);
    std::vector<Event> ev;
    for (int i = 0; i < 2000; ++i) {
      ev.push_back({t(rng), static_cast<std::uint16_t>(xy(rng)), static_cast<std::uint16_t>(xy(rng)),
                    static_cast<std::int8_t>(pol(rng) ? 1 : -1)});
    }
    std::sort(ev.begin(), ev.end(), event_before);
    ev.erase(std::unique(ev.begin(), ev.end(),
                         [](const Event& a, const Event& b) { return a.t_us == b.t_us && a.x == b.x && a.y == b.y; }),
             ev.end());
    std::int64_t net = 0;
    for (const Event& e : ev) net += e.p;
    const VoxelGrid g = voxelize(EventList(8, 8, ev), 30.0 + trial * 7.0);
    std::int64_t su = 0, ss = 0;
    for (auto c : g.unsigned_counts()) su += c;
    for (auto c : g.signed_counts()) ss += c;
    mismatched += su != static_cast<std::int64_t>(ev.size()) || ss != net;
  }
  o.detail << " voxelize mismatches=" << mismatched;
  o.require(mismatched == 0, "voxelize conserves counts");
}

void determinism_check(Outcome& o) {
  const fs::path dir = fs::temp_directory_path() / "evtrace_acceptance_det";
  fs::create_directories(dir);
  std::ostringstream sink;
  const std::string frames = (dir / "n.fseq").string(), net = (dir / "net.evsn").string();
  o.require(cli::run({"gen", "--out", (dir / "c.fseq").string(), "--noisy-out", frames}, sink) == 0, "gen");
  write_checkpoint(net, init_params(EvsNetConfig{}, 11));
  for (const char* cmd : {"simulate", "infer"}) {
    std::string first;
    bool same = true;
    for (const char* w : {"1", "4", "8"}) {
      const std::string out = (dir / (std::string(cmd) + w + ".evt")).string();
      std::vector<std::string> args = {cmd, frames, "--out", out, "--workers", w, "--set", "net.init=uniform"};
      if (std::string(cmd) == "infer") args.insert(args.end(), {"--checkpoint", net});
      o.require(cli::run(args, sink) == 0, std::string(cmd) + " runs");
      const std::string bytes = slurp(out);
      if (first.empty()) first = bytes;
      same &= bytes == first;
    }
    o.detail << ' ' << cmd << (same ? " identical" : " DIFFER") << " (" << first.size() << " B)";
    o.require(same, std::string(cmd) + " byte-identical across workers");
  }
  fs::remove_all(dir);
}

void training_check(Outcome& o) {
  std::vector<SceneSpec> scenes;
  std::uint64_t seed = 1;
  for (SceneKind k : {SceneKind::moving_edge, SceneKind::grating, SceneKind::flashing_light}) {
    SceneSpec s;  // 32x32, 513 frames -> K = 512
    s.kind = k;
    s.seed = seed++;
    scenes.push_back(s);
  }
  const unsigned workers = hw_workers();
  const auto data = make_dataset(scenes, NoiseModel{}, RefSimConfig{}, LuminanceConfig{}, workers);
  TrainConfig tc;  // 20 epochs
  tc.workers = workers;
  TrainHooks hooks;
  hooks.on_epoch = [](const EpochRecord& r) {
    std::fprintf(stderr, "  epoch %zu train %.4f holdout %.4f\n", r.epoch, r.train_loss, r.holdout_loss);
  };
  const TrainResult r = train(data, EvsNetConfig{}, tc, hooks);
  const HoldoutTrains h = holdout_trains(data, r.params, tc);
  const double net = total_loss(h.target, h.network, tc.loss).total;
  const double naive = total_loss(h.target, h.naive, tc.loss).total;
  const double emd_net = stream_distance(h.network, h.target).mean_emd;
  const double emd_naive = stream_distance(h.naive, h.target).mean_emd;
  o.detail << " K=" << data[0].x.ticks() << " holdout loss " << net << " vs naive " << naive << " (ratio "
           << net / naive << "), EMD " << emd_net << " vs " << emd_naive;
  o.require(data[0].x.ticks() == 512, "K = 512");
  o.require(net <= 0.6 * naive, "holdout loss <= 0.60 x naive");
  o.require(emd_net < emd_naive, "EMD below naive");
}

void state_bias_check(Outcome& o) {
  RefSimConfig cfg;
  cfg.init_mode = InitMode::uniform;
  cfg = cfg.noiseless();  // no mismatch: every pixel shares theta
  const std::uint32_t W = 100, H = 100;
  const std::size_t K = 30, bins = 20;
  const float step = static_cast<float>(2.0 * cfg.theta / bins);
  const SpikeTrain s = simulate(LogDiffSeq(W, H, 1000.0, K, std::vector<float>(std::size_t{W} * H * K, step)), cfg);
  // V0 ~ U(-theta, theta) and theta / 10 per tick: the first fire is uniform over 20 ticks.
  std::vector<double> counts(bins, 0.0);
  std::size_t silent = 0, distinct = 0;
  for (std::size_t p = 0; p < s.pixel_count(); ++p) {
    const auto row = s.row(p);
    const auto it = std::find_if(row.begin(), row.end(), [](std::int8_t v) { return v != 0; });
    if (it == row.end()) {
      ++silent;
      continue;
    }
    counts[std::min<std::size_t>(static_cast<std::size_t>(it - row.begin()), bins - 1)] += 1;
  }
  const double n = static_cast<double>(s.pixel_count() - silent), expect = n / bins;
  double chi2 = 0.0;
  for (double c : counts) {
    distinct += c > 0;
    chi2 += (c - expect) * (c - expect) / expect;
  }
  const double pval = boost::math::cdf(boost::math::complement(boost::math::chi_squared(bins - 1), chi2));
  o.detail << " distinct first-fire ticks=" << distinct << " chi2=" << chi2 << " p=" << pval;
  o.require(silent == 0, "every pixel fires");
  o.require(distinct >= 10, ">= 10 distinct first-fire ticks");
  o.require(pval > 0.01, "chi-square p > 0.01");
}

void round_trip_check(Outcome& o) {
  std::mt19937_64 rng(31);
  int trials = 0, good = 0;
  for (int trial = 0; trial < 20; ++trial, ++trials) {
    const std::uint32_t w = 1 + rng() % 300, h = 1 + rng() % 200;
    std::vector<Event> ev;
    std::int64_t t = 0;
    for (int i = 0; i < 2000; ++i) {
      t += rng() % 3;
      ev.push_back({t, static_cast<std::uint16_t>(rng() % w), static_cast<std::uint16_t>(rng() % h),
                    static_cast<std::int8_t>(rng() % 2 ? 1 : -1)});
    }
    std::sort(ev.begin(), ev.end(), event_before);
    ev.erase(std::unique(ev.begin(), ev.end(),
                         [](const Event& a, const Event& b) { return a.t_us == b.t_us && a.x == b.x && a.y == b.y; }),
             ev.end());
    const EventList e(w, h, ev);
    std::stringstream evt, csv;
    write_evt1(evt, e);
    write_csv(csv, e);
    bool ok = read_evt1(evt) == e && read_csv(csv, CsvExtent{w, h}) == e;

    const std::uint32_t fw = 1 + rng() % 16, fh = 1 + rng() % 16;
    const std::size_t frames = 2 + rng() % 8;
    std::vector<float> px(std::size_t{fw} * fh * 3 * frames);
    std::uniform_real_distribution<float> u(0.0f, 4.0f);
    for (float& v : px) v = u(rng);
    const FrameSeq f(fw, fh, static_cast<float>(30 + rng() % 2000), px);
    std::stringstream fseq;
    write_fseq(fseq, f);
    ok &= read_fseq(fseq) == f;

    EvsNetConfig cfg;
    cfg.channels = 1 + rng() % 8;
    cfg.kernel = 1 + 2 * (rng() % 4);
    cfg.depth = 1 + rng() % 3;
    cfg.lif.tau = 1.5 + static_cast<double>(rng() % 10);
    cfg.lif.v_th = 0.25 * static_cast<double>(1 + rng() % 8);
    EvsNetParams p = init_params(cfg, rng());
    const auto extra = gauss(p.size(), rng(), 0.5f);
    for (std::size_t i = 0; i < p.size(); ++i) p.flat()[i] += extra[i];
    std::stringstream evsn;
    write_checkpoint(evsn, p);
    ok &= read_checkpoint(evsn) == p;
    good += ok;
  }
  o.detail << " identical " << good << "/" << trials;
  o.require(good == trials, "all fixtures round-trip bit-exactly");
}

}  // namespace

int main() {
  criterion(1, "receptive field 43 and confined impulse response", 1.0, receptive_field_check);
  criterion(2, "saturation oracle", 1.0, saturation_check);
  criterion(3, "EMD hand values and brute-force oracle", 5.0, emd_check);
  criterion(4, "gradient checks", 30.0, gradient_check);
  criterion(5, "conservation", 0.0, conservation_check);
  criterion(6, "determinism across worker counts", 0.0, determinism_check);
  criterion(7, "desk-scale training beats the naive baseline", 1800.0, training_check);
  criterion(8, "internal-state bias statistic", 0.0, state_bias_check);
  criterion(9, "format round trips", 0.0, round_trip_check);
  std::printf("%s: %d criteria failed\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
