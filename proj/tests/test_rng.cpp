#include <doctest.h>

#include <oqw/rng.hpp>

using namespace oqw;

TEST_CASE("philox known-answer: zero counter and key") {
  const auto out = philox4x32({0u, 0u, 0u, 0u}, {0u, 0u});
  CHECK(out[0] == 0x6627e8d5u);
  CHECK(out[1] == 0xe169c58du);
  CHECK(out[2] == 0xbc57ac4cu);
  CHECK(out[3] == 0x9b00dbd8u);
}

TEST_CASE("philox known-answer: all-ones counter and key") {
  const auto out = philox4x32({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                              {0xffffffffu, 0xffffffffu});
  CHECK(out[0] == 0x408f276du);
  CHECK(out[1] == 0x41c83b0eu);
  CHECK(out[2] == 0xa20bc7c6u);
  CHECK(out[3] == 0x6d5451fdu);
}

TEST_CASE("philox known-answer: pi-digit counter and key") {
  const auto out = philox4x32({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                              {0xa4093822u, 0x299f31d0u});
  CHECK(out[0] == 0xd16cfe09u);
  CHECK(out[1] == 0x94fdccebu);
  CHECK(out[2] == 0x5001e420u);
  CHECK(out[3] == 0x24126ea1u);
}

TEST_CASE("trajectory stream uniforms are reproducible") {
  TrajectoryRng rng(42, 0);
  CHECK(rng.uniform() == doctest::Approx(0.61295988118941591).epsilon(1e-15));
  CHECK(rng.uniform() == doctest::Approx(0.0732317374415839).epsilon(1e-15));
  CHECK(rng.uniform() == doctest::Approx(0.98771865091451061).epsilon(1e-15));
  CHECK(rng.uniform() == doctest::Approx(0.51390614697111658).epsilon(1e-15));
  CHECK(rng.uniform() == doctest::Approx(0.82586682719604942).epsilon(1e-15));
  CHECK(rng.uniform() == doctest::Approx(0.60274395946729564).epsilon(1e-15));

  TrajectoryRng other(42, 1);
  CHECK(other.uniform() == doctest::Approx(0.010058844724262606).epsilon(1e-15));
  CHECK(other.uniform() == doctest::Approx(0.23206616768418181).epsilon(1e-15));
}

TEST_CASE("streams are pure functions of (seed, index)") {
  TrajectoryRng a(123456789ull, 7ull), b(123456789ull, 7ull);
  for (int i = 0; i < 1000; ++i) CHECK(a.uniform() == b.uniform());

  TrajectoryRng c(123456789ull, 8ull);
  bool differs = false;
  TrajectoryRng a2(123456789ull, 7ull);
  for (int i = 0; i < 16; ++i) differs = differs || (a2.uniform() != c.uniform());
  CHECK(differs);
}

TEST_CASE("uniforms stay strictly inside (0,1)") {
  TrajectoryRng rng(0, 0);
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.uniform();
    CHECK(u > 0.0);
    CHECK(u < 1.0);
  }
}
