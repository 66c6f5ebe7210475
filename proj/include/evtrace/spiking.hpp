#pragma once

#include <cmath>
#include <concepts>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

namespace evtrace {

struct LifParams {
  double tau = 2.0;   // decay constant in ticks; +inf gives a perfect integrator
  double v_th = 1.0;  // firing threshold

  void validate() const;
  double decay() const { return 1.0 - 1.0 / tau; }

  static LifParams no_leak(double v_th) { return {std::numeric_limits<double>::infinity(), v_th}; }
};

struct NeuronState {
  double v = 0.0;
};

struct SurrogateConfig {
  double alpha = 2.0;

  void validate() const;
};

template <typename Spike>
struct StepResult {
  NeuronState state;
  Spike spike;
};

// Charge / fire / reset on the post-charge potential:
//   V' = decay * V + I,  S = fire(V'),  V <- V' - S * v_th.
// The templated forms let 32- and 64-bit callers share one definition.

template <std::floating_point T>
struct BilifTick {
  T charged;  // V'
  T v;        // after reset
  std::int8_t spike;
};

template <std::floating_point T>
inline BilifTick<T> bilif_tick(T v, T input, T decay, T v_th) {
  const T charged = decay * v + input;
  std::int8_t s = 0;
  if (charged >= v_th) {
    s = 1;
  } else if (charged <= -v_th) {
    s = -1;
  }
  return {charged, charged - static_cast<T>(s) * v_th, s};
}

StepResult<std::uint8_t> lif_step(NeuronState state, double input, const LifParams& p);
StepResult<std::int8_t> bilif_step(NeuronState state, double input, const LifParams& p);

struct BilifRun {
  std::vector<std::int8_t> spikes;
  NeuronState final_state;
};

BilifRun bilif_sequence(std::span<const double> x, const LifParams& p, double v0);
BilifRun bilif_sequence(std::span<const float> x, const LifParams& p, double v0);

/// Arctangent sigmoid sigma(u) = 1/2 + atan(pi alpha u / 2) / pi.
template <std::floating_point T>
inline T atan_sigmoid(T u, T alpha) {
  return T(0.5) + std::atan(std::numbers::pi_v<T> * alpha * u / T(2)) / std::numbers::pi_v<T>;
}

/// sigma'(u) = (alpha / 2) / (1 + (pi alpha u / 2)^2).
template <std::floating_point T>
inline T atan_sigmoid_grad(T u, T alpha) {
  const T z = std::numbers::pi_v<T> * alpha * u / T(2);
  return (alpha / T(2)) / (T(1) + z * z);
}

/// Smooth stand-in for the bipolar spike: sigma(v - v_th) - sigma(-v - v_th).
template <std::floating_point T>
inline T relaxed_bilif(T v, T v_th, T alpha) {
  return atan_sigmoid(v - v_th, alpha) - atan_sigmoid(-v - v_th, alpha);
}

/// d(relaxed_bilif)/dv, the surrogate derivative of the bipolar spike:
/// two positive bumps centred on +v_th and -v_th.
template <std::floating_point T>
inline T bipolar_surrogate(T v, T v_th, T alpha) {
  return atan_sigmoid_grad(v - v_th, alpha) + atan_sigmoid_grad(-v - v_th, alpha);
}

double surrogate_grad(double v, const LifParams& p, const SurrogateConfig& s);

}  // namespace evtrace
