#include "evtrace/loss.hpp"

#include <cmath>
#include <string>

#include "evtrace/errors.hpp"

namespace evtrace {

namespace {

void check_lengths(std::span<const double> e, std::span<const double> s) {
  if (e.size() != s.size()) {
    throw LengthMismatchError("sequence lengths differ: " + std::to_string(e.size()) + " vs " +
                              std::to_string(s.size()));
  }
}

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

double pos(double v) { return v > 0.0 ? v : 0.0; }
double neg(double v) { return v < 0.0 ? -v : 0.0; }

// Transform-then-EMD helpers that avoid materialising channel copies.
template <typename F>
double emd_forward(std::span<const double> e, std::span<const double> s, F f) {
  double ce = 0.0, cs = 0.0, acc = 0.0;
  for (std::size_t i = 0; i < e.size(); ++i) {
    ce += f(e[i]);
    cs += f(s[i]);
    acc += std::abs(cs - ce);
  }
  return e.empty() ? 0.0 : acc / static_cast<double>(e.size());
}

template <typename F>
double emd_reverse(std::span<const double> e, std::span<const double> s, F f) {
  double ce = 0.0, cs = 0.0, acc = 0.0;
  for (std::size_t i = e.size(); i-- > 0;) {
    ce += f(e[i]);
    cs += f(s[i]);
    acc += std::abs(cs - ce);
  }
  return e.empty() ? 0.0 : acc / static_cast<double>(e.size());
}

template <typename F>
double emd_bidir_with(std::span<const double> e, std::span<const double> s, F f) {
  return 0.5 * (emd_forward(e, s, f) + emd_reverse(e, s, f));
}

// Adds d/d(channel value at j) of emd_bidir to out, scaled by `scale`.
template <typename F>
void emd_bidir_grad(std::span<const double> e, std::span<const double> s, F f, double scale,
                    std::vector<double>& out) {
  const std::size_t K = e.size();
  const double w = 0.5 * scale / static_cast<double>(K);
  // Forward term: d/ds_j = sum_{i >= j} sign(prefix diff at i).
  std::vector<double> signs(K);
  double ce = 0.0, cs = 0.0;
  for (std::size_t i = 0; i < K; ++i) {
    ce += f(e[i]);
    cs += f(s[i]);
    signs[i] = sign(cs - ce);
  }
  double tail = 0.0;
  for (std::size_t j = K; j-- > 0;) {
    tail += signs[j];
    out[j] += w * tail;
  }
  // Reverse term: d/ds_j = sum_{i <= j} sign(suffix diff at i).
  ce = cs = 0.0;
  for (std::size_t i = K; i-- > 0;) {
    ce += f(e[i]);
    cs += f(s[i]);
    signs[i] = sign(cs - ce);
  }
  double head = 0.0;
  for (std::size_t j = 0; j < K; ++j) {
    head += signs[j];
    out[j] += w * head;
  }
}

double identity(double v) { return v; }

}  // namespace

void LossConfig::validate() const {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ConfigError("loss lambda must be >= 0");
}

double emd(std::span<const double> e, std::span<const double> s) {
  check_lengths(e, s);
  return emd_forward(e, s, identity);
}

void emd_grad(std::span<const double> e, std::span<const double> s, std::span<double> grad) {
  check_lengths(e, s);
  if (grad.size() != s.size()) throw LengthMismatchError("gradient buffer length differs from sequence");
  const std::size_t K = s.size();
  double ce = 0.0, cs = 0.0;
  std::vector<double> signs(K);
  for (std::size_t i = 0; i < K; ++i) {
    ce += e[i];
    cs += s[i];
    signs[i] = sign(cs - ce);
  }
  double tail = 0.0;
  for (std::size_t j = K; j-- > 0;) {
    tail += signs[j];
    grad[j] = tail / static_cast<double>(K);
  }
}

double emd_bidir(std::span<const double> e, std::span<const double> s) {
  check_lengths(e, s);
  return emd_bidir_with(e, s, identity);
}

double emd_polar(std::span<const double> e, std::span<const double> s) {
  check_lengths(e, s);
  return emd_bidir_with(e, s, pos) + emd_bidir_with(e, s, neg);
}

double count_loss(std::span<const double> e, std::span<const double> s) {
  check_lengths(e, s);
  double ne = 0.0, ns = 0.0;
  for (std::size_t i = 0; i < e.size(); ++i) {
    ne += std::abs(e[i]);
    ns += std::abs(s[i]);
  }
  return std::abs(ns - ne);
}

PixelLoss pixel_loss(std::span<const double> e, std::span<const double> s) {
  return {emd_polar(e, s), count_loss(e, s)};
}

void pixel_loss_grad(std::span<const double> e, std::span<const double> s, double lambda, std::span<double> grad) {
  check_lengths(e, s);
  if (grad.size() != s.size()) throw LengthMismatchError("gradient buffer length differs from sequence");
  const std::size_t K = s.size();
  std::vector<double> g_pos(K, 0.0);
  std::vector<double> g_neg(K, 0.0);
  emd_bidir_grad(e, s, pos, 1.0, g_pos);
  emd_bidir_grad(e, s, neg, 1.0, g_neg);

  double ne = 0.0, ns = 0.0;
  for (std::size_t i = 0; i < K; ++i) {
    ne += std::abs(e[i]);
    ns += std::abs(s[i]);
  }
  const double count_sign = lambda * sign(ns - ne);
  for (std::size_t j = 0; j < K; ++j) {
    // pos(s) has slope 1 for s > 0 and neg(s) slope -1 for s < 0. At s = 0
    // both take their outer one-sided slope, a valid subgradient of each
    // channel that keeps silent outputs trainable.
    double g = 0.0;
    if (s[j] >= 0.0) g += g_pos[j];
    if (s[j] <= 0.0) g -= g_neg[j];
    g += count_sign * sign(s[j]);
    grad[j] = g;
  }
}

namespace {

void check_trains(const SpikeTrain& e, const SpikeTrain& s) {
  if (!e.same_shape(s)) throw ShapeMismatchError("spike trains differ in shape");
}

std::vector<double> to_double(std::span<const std::int8_t> row) { return {row.begin(), row.end()}; }

}  // namespace

LossReport total_loss(const SpikeTrain& e, const SpikeTrain& s, const LossConfig& cfg, bool per_pixel) {
  cfg.validate();
  check_trains(e, s);
  LossReport report;
  const std::size_t P = e.pixel_count();
  if (per_pixel) report.per_pixel.resize(P);
  for (std::size_t p = 0; p < P; ++p) {
    const auto ev = to_double(e.row(p));
    const auto sv = to_double(s.row(p));
    const PixelLoss l = pixel_loss(ev, sv);
    report.emd += l.emd;
    report.count += l.count;
    if (per_pixel) report.per_pixel[p] = l.total(cfg.lambda);
  }
  if (P > 0) {
    report.emd /= static_cast<double>(P);
    report.count /= static_cast<double>(P);
  }
  report.total = report.emd + cfg.lambda * report.count;
  return report;
}

std::vector<double> loss_grad(const SpikeTrain& e, const SpikeTrain& s, const LossConfig& cfg) {
  cfg.validate();
  check_trains(e, s);
  const std::size_t P = e.pixel_count();
  const std::size_t K = e.ticks();
  std::vector<double> grad(P * K);
  for (std::size_t p = 0; p < P; ++p) {
    const auto ev = to_double(e.row(p));
    const auto sv = to_double(s.row(p));
    std::span<double> g(grad.data() + p * K, K);
    pixel_loss_grad(ev, sv, cfg.lambda, g);
    for (double& v : g) v /= static_cast<double>(P);
  }
  return grad;
}

}  // namespace evtrace
