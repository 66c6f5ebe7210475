#include "evtrace/spiking.hpp"

#include "evtrace/errors.hpp"

namespace evtrace {

void LifParams::validate() const {
  if (!(tau > 1.0)) throw ConfigError("lif tau must exceed 1");
  if (!(v_th > 0.0) || !std::isfinite(v_th)) throw ConfigError("lif threshold must be positive");
}

void SurrogateConfig::validate() const {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw ConfigError("surrogate alpha must be positive");
}

StepResult<std::uint8_t> lif_step(NeuronState state, double input, const LifParams& p) {
  const double charged = p.decay() * state.v + input;
  const std::uint8_t s = charged >= p.v_th ? 1 : 0;
  return {{charged - s * p.v_th}, s};
}

StepResult<std::int8_t> bilif_step(NeuronState state, double input, const LifParams& p) {
  const auto tick = bilif_tick(state.v, input, p.decay(), p.v_th);
  return {{tick.v}, tick.spike};
}

namespace {

template <typename T>
BilifRun run(std::span<const T> x, const LifParams& p, double v0) {
  BilifRun out;
  out.spikes.resize(x.size());
  double v = v0;
  const double decay = p.decay();
  for (std::size_t k = 0; k < x.size(); ++k) {
    const auto tick = bilif_tick(v, static_cast<double>(x[k]), decay, p.v_th);
    v = tick.v;
    out.spikes[k] = tick.spike;
  }
  out.final_state.v = v;
  return out;
}

}  // namespace

BilifRun bilif_sequence(std::span<const double> x, const LifParams& p, double v0) { return run(x, p, v0); }
BilifRun bilif_sequence(std::span<const float> x, const LifParams& p, double v0) { return run(x, p, v0); }

double surrogate_grad(double v, const LifParams& p, const SurrogateConfig& s) {
  return bipolar_surrogate(v, p.v_th, s.alpha);
}

}  // namespace evtrace
