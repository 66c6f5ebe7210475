#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "evtrace/errors.hpp"
#include "evtrace/spiking.hpp"

using namespace evtrace;

TEST_CASE("bilif_step hand examples") {
  const LifParams p{2.0, 1.0};
  auto r = bilif_step({0.0}, 1.5, p);
  CHECK(r.spike == 1);
  CHECK(r.state.v == 0.5);
  r = bilif_step({0.8}, 0.0, p);
  CHECK(r.spike == 0);
  CHECK(r.state.v == doctest::Approx(0.4));
  r = bilif_step({0.0}, -1.0, p);
  CHECK(r.spike == -1);  // fires at exactly -V_th
  CHECK(r.state.v == 0.0);

  NeuronState s{0.0};
  for (int k = 0; k < 100; ++k) {
    const auto q = bilif_step(s, 0.0, p);
    CHECK(q.spike == 0);
    s = q.state;
  }
  CHECK(s.v == 0.0);
}

TEST_CASE("lif_step is the unipolar neuron") {
  const LifParams p{2.0, 1.0};
  CHECK(lif_step({0.0}, 1.5, p).spike == 1);
  CHECK(lif_step({0.0}, -5.0, p).spike == 0);
  CHECK(lif_step({0.0}, -5.0, p).state.v == -5.0);
}

TEST_CASE("trailing-pulse saturation") {
  const LifParams p{100.0, 1.0};
  const std::vector<double> x = {-3.0, 0.0, 0.0, 0.0};
  const BilifRun run = bilif_sequence(x, p, 0.0);
  CHECK(run.spikes == std::vector<std::int8_t>{-1, -1, 0, 0});
  // Oracle: step the recurrence by hand.
  double v = 0.0;
  v = 0.99 * v - 3.0;
  CHECK(v == -3.0);
  v += 1.0;
  v = 0.99 * v;
  CHECK(v == doctest::Approx(-1.98));
  v += 1.0;
  v = 0.99 * v;
  CHECK(v == doctest::Approx(-0.9702));
  CHECK(run.final_state.v == doctest::Approx(0.99 * v));
}

TEST_CASE("odd symmetry from a zero state") {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n(0.0, 0.8);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> x(200), neg(200);
    for (std::size_t i = 0; i < x.size(); ++i) {
      x[i] = n(rng);
      neg[i] = -x[i];
    }
    const LifParams p{1.0 + 10.0 * trial / 50.0 + 0.5, 0.5 + trial * 0.01};
    const auto a = bilif_sequence(x, p, 0.0), b = bilif_sequence(neg, p, 0.0);
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(a.spikes[i] == -b.spikes[i]);
    CHECK(a.final_state.v == -b.final_state.v);
  }
}

TEST_CASE("sub-threshold constant drive converges below threshold") {
  const LifParams p{2.0, 1.0};
  const std::vector<double> x(1000, 0.4);
  const BilifRun run = bilif_sequence(x, p, 0.0);
  for (auto s : run.spikes) CHECK(s == 0);
  CHECK(run.final_state.v == doctest::Approx(0.4 / (1.0 / p.tau)));
}

TEST_CASE("initial potential shifts the first-fire tick") {
  const LifParams p = LifParams::no_leak(1.0);
  CHECK(p.decay() == 1.0);
  const std::vector<double> x(20, 0.2);
  auto first_fire = [&](double v0) {
    const auto run = bilif_sequence(x, p, v0);
    for (std::size_t i = 0; i < run.spikes.size(); ++i) {
      if (run.spikes[i] != 0) return static_cast<int>(i);
    }
    return -1;
  };
  CHECK(first_fire(0.9) == 0);
  CHECK(first_fire(-0.9) == 9);
  const std::vector<float> xf(x.begin(), x.end());
  CHECK(bilif_sequence(std::span<const float>(xf), LifParams{2.0, 1.0}, 0.3).spikes ==
        bilif_sequence(std::span<const double>(x), LifParams{2.0, 1.0}, 0.3).spikes);
}

TEST_CASE("surrogate") {
  const LifParams p{2.0, 1.0};
  const SurrogateConfig s{2.0};
  SUBCASE("value at threshold") {
    const double z = std::numbers::pi * 2.0 * (-2.0) / 2.0;
    CHECK(surrogate_grad(1.0, p, s) == doctest::Approx(1.0 + 1.0 / (1.0 + z * z)).epsilon(1e-14));
  }
  SUBCASE("even function") {
    for (double v = -4.0; v <= 4.0; v += 0.173) CHECK(surrogate_grad(v, p, s) == surrogate_grad(-v, p, s));
  }
  SUBCASE("sigmoid derivative integrates to one") {
    const double lo = -5000.0, hi = 5000.0;
    const int n = 2000000;
    const double h = (hi - lo) / n;
    double sum = 0.5 * (atan_sigmoid_grad(lo - 1.0, 2.0) + atan_sigmoid_grad(hi - 1.0, 2.0));
    for (int i = 1; i < n; ++i) sum += atan_sigmoid_grad(lo + i * h - 1.0, 2.0);
    CHECK(sum * h == doctest::Approx(1.0).epsilon(1e-3));
  }
  SUBCASE("surrogate is the derivative of the relaxed spike") {
    for (double v = -3.0; v <= 3.0; v += 0.25) {
      const double eps = 1e-6;
      const double fd = (relaxed_bilif(v + eps, 1.0, 2.0) - relaxed_bilif(v - eps, 1.0, 2.0)) / (2 * eps);
      CHECK(bipolar_surrogate(v, 1.0, 2.0) == doctest::Approx(fd).epsilon(1e-7));
    }
    CHECK(relaxed_bilif(0.0, 1.0, 2.0) == 0.0);
    CHECK(relaxed_bilif(40.0, 1.0, 2.0) == doctest::Approx(1.0).epsilon(1e-2));
    CHECK(relaxed_bilif(-40.0, 1.0, 2.0) == doctest::Approx(-1.0).epsilon(1e-2));
  }
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS(LifParams(1.0, 1.0).validate(), ConfigError);
  CHECK_THROWS_AS(LifParams(2.0, 0.0).validate(), ConfigError);
  CHECK_NOTHROW(LifParams::no_leak(0.3).validate());
  CHECK_THROWS_AS(SurrogateConfig{0.0}.validate(), ConfigError);
}
