#include <doctest.h>

#include <cmath>
#include <random>

#include "evtrace/errors.hpp"
#include "evtrace/luminance.hpp"

using namespace evtrace;

TEST_CASE("luma coefficients") {
  CHECK(luma({1, 1, 1}) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(luma({1, 0, 0}) == 0.2126);
  CHECK(luma({0, 1, 0}) == 0.7152);
  CHECK(luma({0, 0, 1}) == 0.0722);
}

TEST_CASE("lin_log") {
  const LuminanceConfig cfg;
  CHECK(lin_log(1.0, cfg) == 0.0);
  CHECK(lin_log(0.0, cfg) == 0.0);
  // Both branches meet at the knee.
  CHECK(lin_log(0.02, cfg) == doctest::Approx(std::log(0.02)));
  CHECK(std::log(0.02) / 0.02 * 0.02 == doctest::Approx(std::log(0.02)));
  CHECK(lin_log(0.02, cfg) == doctest::Approx(-3.9120).epsilon(1e-4));
  CHECK(lin_log(0.01, cfg) == doctest::Approx(0.5 * std::log(0.02)));
  CHECK(lin_log(0.01, cfg) == doctest::Approx(-1.9560).epsilon(1e-4));
  CHECK(lin_log(0.02 - 1e-12, cfg) == doctest::Approx(lin_log(0.02, cfg)).epsilon(1e-9));
}

TEST_CASE("log_diff_sequence") {
  SUBCASE("constant video gives zeros") {
    const FrameSeq f(3, 2, 100.0f, std::vector<float>(3 * 2 * 3 * 5, 0.37f));
    const LogDiffSeq x = log_diff_sequence(f, {});
    CHECK(x.ticks() == 4);
    CHECK(x.fps() == 100.0);
    for (float v : x.data()) CHECK(v == 0.0f);
  }
  SUBCASE("doubling luminance gives ln 2") {
    const FrameSeq f(1, 1, 1000.0f, {0.2f, 0.2f, 0.2f, 0.4f, 0.4f, 0.4f});
    const LogDiffSeq x = log_diff_sequence(f, {});
    REQUIRE(x.ticks() == 1);
    CHECK(x.data()[0] == doctest::Approx(std::log(2.0)).epsilon(1e-6));
  }
  SUBCASE("telescoping sum on a random video, any worker count") {
    const std::uint32_t w = 7, h = 5;
    const std::size_t frames = 40;
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<float> u(0.0f, 1.0f);
    std::vector<float> data(std::size_t{w} * h * 3 * frames);
    for (float& v : data) v = u(rng) < 0.1f ? 0.0f : u(rng);
    const FrameSeq f(w, h, 60.0f, std::move(data));
    const LuminanceConfig cfg;
    const LogDiffSeq x = log_diff_sequence(f, cfg, 1);
    CHECK(x == log_diff_sequence(f, cfg, 4));
    for (std::uint32_t y = 0; y < h; ++y) {
      for (std::uint32_t xx = 0; xx < w; ++xx) {
        double sum = 0.0;
        for (float v : x.row(xx, y)) sum += v;
        const double expect = lin_log(luma(f.pixel(frames - 1, xx, y)), cfg) - lin_log(luma(f.pixel(0, xx, y)), cfg);
        CHECK(sum == doctest::Approx(expect).epsilon(1e-4).scale(1.0));
      }
    }
  }
  SUBCASE("bad knee") {
    const FrameSeq f(1, 1, 1.0f, {0, 0, 0, 0, 0, 0});
    CHECK_THROWS_AS(log_diff_sequence(f, LuminanceConfig{0.0}), ConfigError);
    CHECK_THROWS_AS(log_diff_sequence(f, LuminanceConfig{1.0}), ConfigError);
  }
}
