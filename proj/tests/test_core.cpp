#include <doctest.h>

#include <cmath>
#include <random>

#include "evtrace/core.hpp"
#include "evtrace/errors.hpp"

using namespace evtrace;

namespace {

SpikeTrain random_train(std::uint32_t w, std::uint32_t h, std::size_t K, std::uint64_t seed, double density = 0.1) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  SpikeTrain s(w, h, 1000.0, K);
  for (auto& v : s.data()) {
    const double r = u(rng);
    v = r < density / 2 ? 1 : (r < density ? -1 : 0);
  }
  return s;
}

}  // namespace

TEST_CASE("tick_to_us rounds to the nearest microsecond") {
  CHECK(tick_to_us(0, 1000.0) == 0);
  CHECK(tick_to_us(2, 1000.0) == 2000);
  CHECK(tick_to_us(1, 3.0) == 333333);
  CHECK(tick_to_us(2, 3.0) == 666667);
}

TEST_CASE("dense_to_sparse") {
  SUBCASE("all-zero train gives no records") {
    const SpikeTrain s(4, 3, 1000.0, 10);
    const EventList e = dense_to_sparse(s);
    CHECK(e.empty());
    CHECK(e.width() == 4);
    CHECK(e.height() == 3);
  }
  SUBCASE("hand example") {
    const SpikeTrain s(1, 1, 1000.0, 3, {1, 0, -1});
    const EventList e = dense_to_sparse(s);
    REQUIRE(e.size() == 2);
    CHECK(e.records()[0] == Event{0, 0, 0, 1});
    CHECK(e.records()[1] == Event{2000, 0, 0, -1});
  }
  SUBCASE("records come out in (t, y, x) order") {
    const SpikeTrain s = random_train(7, 5, 40, 11, 0.3);
    const EventList e = dense_to_sparse(s);
    for (std::size_t i = 1; i < e.size(); ++i) CHECK(event_before(e.records()[i - 1], e.records()[i]));
  }
}

TEST_CASE("sparse_to_dense") {
  SUBCASE("empty list gives a zero train") {
    const SpikeTrain s = sparse_to_dense(EventList(2, 2), 1000.0, 5);
    for (auto v : s.data()) CHECK(v == 0);
  }
  SUBCASE("inverse of the hand example") {
    const EventList e(1, 1, {{0, 0, 0, 1}, {2000, 0, 0, -1}});
    CHECK(sparse_to_dense(e, 1000.0, 3) == SpikeTrain(1, 1, 1000.0, 3, {1, 0, -1}));
  }
  SUBCASE("round trip on random trains") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const SpikeTrain s = random_train(9, 4, 33, seed);
      CHECK(sparse_to_dense(dense_to_sparse(s), s.fps(), s.ticks()) == s);
    }
  }
  SUBCASE("round trip at a rate that does not divide 1e6") {
    SpikeTrain s(3, 2, 240.0, 50);
    std::mt19937 rng(3);
    for (auto& v : s.data()) v = static_cast<std::int8_t>(static_cast<int>(rng() % 3) - 1);
    CHECK(sparse_to_dense(dense_to_sparse(s), 240.0, 50) == s);
  }
  SUBCASE("collision") {
    // Distinct timestamps that round onto the same tick.
    const EventList e(1, 1, {{4900, 0, 0, 1}, {5200, 0, 0, -1}});
    CHECK_THROWS_AS(sparse_to_dense(e, 1000.0, 10), CollisionError);
  }
  SUBCASE("timestamp beyond the last tick") {
    const EventList e(1, 1, {{10000, 0, 0, 1}});
    CHECK_THROWS_AS(sparse_to_dense(e, 1000.0, 10), RangeError);
    CHECK_NOTHROW(sparse_to_dense(e, 1000.0, 11));
  }
}

TEST_CASE("EventList validation") {
  CHECK_THROWS_AS(EventList(2, 2, {{0, 2, 0, 1}}), RangeError);
  CHECK_THROWS_AS(EventList(2, 2, {{0, 0, 2, 1}}), RangeError);
  CHECK_THROWS_AS(EventList(2, 2, {{-1, 0, 0, 1}}), RangeError);
  CHECK_THROWS_AS(EventList(2, 2, {{0, 0, 0, 0}}), ValueError);
  CHECK_THROWS_AS(EventList(2, 2, {{5, 0, 0, 1}, {4, 0, 0, 1}}), ValueError);
  CHECK_THROWS_AS(EventList(2, 2, {{5, 1, 0, 1}, {5, 0, 0, 1}}), ValueError);
  CHECK_THROWS_AS(EventList(2, 2, {{5, 0, 0, 1}, {5, 0, 0, -1}}), ValueError);
  CHECK_NOTHROW(EventList(2, 2, {{5, 1, 0, 1}, {5, 0, 1, 1}}));
}

TEST_CASE("sequence validation") {
  CHECK_THROWS_AS(SpikeTrain(1, 1, 1000.0, 2, {1, 2}), ValueError);
  CHECK_THROWS_AS(SpikeTrain(1, 1, 1000.0, 3, {1, 0}), ShapeError);
  CHECK_THROWS_AS(LogDiffSeq(1, 1, 1000.0, 1, {std::nanf("")}), ValueError);
  CHECK_THROWS_AS(LogDiffSeq(1, 1, 0.0, 1, {0.0f}), ValueError);
  CHECK_THROWS_AS(FrameSeq(1, 1, 30.0f, {0, 0, 0}), ValueError);  // one frame
  CHECK_THROWS_AS(FrameSeq(1, 1, 30.0f, {0, 0, 0, 0, -1, 0}), ValueError);
  CHECK_THROWS_AS(FrameSeq(1, 1, 30.0f, {0, 0, 0, 0, 0}), ValueError);
  CHECK_THROWS_AS(FrameSeq(0, 1, 30.0f, {}), ValueError);
  const FrameSeq f(2, 1, 30.0f, {0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11});
  CHECK(f.frame_count() == 2);
  CHECK(f.pixel(1, 1, 0).r == 9.0f);
  CHECK(f.pixel(1, 1, 0).b == 11.0f);
}

TEST_CASE("voxelize") {
  SUBCASE("empty list") {
    const VoxelGrid g = voxelize(EventList(3, 2), 60.0);
    CHECK(g.bins() == 1);
    for (auto c : g.unsigned_counts()) CHECK(c == 0);
  }
  SUBCASE("hand binning") {
    const VoxelGrid g = voxelize(EventList(1, 1, {{0, 0, 0, 1}, {500, 0, 0, -1}}), 1000.0);
    REQUIRE(g.bins() == 1);
    CHECK(g.signed_count(0, 0) == 0);
    CHECK(g.unsigned_count(0, 0) == 2);
  }
  SUBCASE("bin count follows the duration") {
    const EventList e(1, 1, {{0, 0, 0, 1}, {1000, 0, 0, 1}});
    CHECK(voxelize(e, 1000.0).bins() == 2);
    CHECK(voxelize(e, 1000.0, 5000).bins() == 5);
    const VoxelGrid clipped = voxelize(e, 1000.0, 1000);
    CHECK(clipped.bins() == 1);
    CHECK(clipped.unsigned_count(0, 0) == 2);
  }
  SUBCASE("counts are conserved") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const EventList e = dense_to_sparse(random_train(6, 5, 200, seed, 0.4));
      for (double fps : {60.0, 250.0, 1000.0}) {
        const VoxelGrid g = voxelize(e, fps);
        std::int64_t n = 0, signed_sum = 0, expect_signed = 0;
        for (auto c : g.unsigned_counts()) n += c;
        for (auto c : g.signed_counts()) signed_sum += c;
        for (const Event& ev : e.records()) expect_signed += ev.p;
        CHECK(n == static_cast<std::int64_t>(e.size()));
        CHECK(signed_sum == expect_signed);
      }
    }
  }
  SUBCASE("bad rate") { CHECK_THROWS_AS(voxelize(EventList(1, 1), 0.0), ConfigError); }
}
