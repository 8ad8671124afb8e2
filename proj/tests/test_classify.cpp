#include <doctest.h>

#include <oqw/classify.hpp>
#include <oqw/io.hpp>
#include <oqw/registry.hpp>
#include <oqw/spectral.hpp>

#include "helpers.hpp"

using namespace oqw;
using namespace oqw::testutil;

namespace {

const RegistryCase& find_case(const std::string& id, const std::string& variant = "") {
  for (const RegistryCase* c : registry_find(id))
    if (c->variant == variant) return *c;
  REQUIRE(false);
  static RegistryCase dummy;
  return dummy;
}

CMat basis_projector(Eigen::Index d, std::initializer_list<Eigen::Index> idx) {
  CMat P = CMat::Zero(d, d);
  for (Eigen::Index i : idx) P(i, i) = 1.0;
  return P;
}

double direction_trace(const CMat& K, const CMat& tau) {
  return (K * tau * K.adjoint()).trace().real();
}

}  // namespace

TEST_CASE("registry verdicts and transient projectors match expectations") {
  for (const RegistryCase& c : registry()) {
    CAPTURE(c.fixture_name());
    const Verdict v = classify_case(c);
    CHECK(v.kind == c.expected);
    if (c.expected_transient) CHECK(frob(v.transient_projector - *c.expected_transient) <= 1e-8);
    if (v.kind == VerdictKind::Recurrent) CHECK(frob(v.transient_projector) <= 1e-8);
    if (v.kind == VerdictKind::Transient) {
      const Eigen::Index d = v.transient_projector.rows();
      CHECK(frob(v.transient_projector - CMat::Identity(d, d)) <= 1e-8);
    }
  }
}

TEST_CASE("criterion dispatch tags") {
  CHECK(classify_case(find_case("ex5_1a")).criterion == "ergodic");
  CHECK(classify_case(find_case("ex5_1a", "m0")).criterion == "dim2");
  CHECK(classify_case(find_case("ex5_1b", "case3")).criterion == "dim2");
  CHECK(classify_case(find_case("ex5_4")).criterion == "general");
  CHECK(classify_case(find_case("ex7_2")).criterion == "general-2d");
  CHECK(classify_case(find_case("ex7_1", "h0")).criterion == "general-2d-ct");
}

TEST_CASE("directional traces of the ergodic examples") {
  SUBCASE("pure-difference invariant state balances both sides") {
    const Coin1D coin = to_coin_1d(find_case("ex5_2").spec);
    const CMat rho = invariant_state_maximal(superoperator(coin.kraus()));
    CHECK(direction_trace(coin.L, rho) == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(direction_trace(coin.R, rho) == doctest::Approx(0.5).epsilon(1e-10));
  }
  SUBCASE("mixing stay operator tilts the side masses") {
    const Coin1D coin = to_coin_1d(find_case("ex5_3", "B").spec);
    const CMat rho = invariant_state_maximal(superoperator(coin.kraus()));
    CHECK(direction_trace(coin.L, rho) == doctest::Approx(3.0 / 7.0).epsilon(1e-9));
    CHECK(direction_trace(coin.R, rho) == doctest::Approx(5.0 / 21.0).epsilon(1e-9));
  }
  SUBCASE("triangular stay operator balances them") {
    const Coin1D coin = to_coin_1d(find_case("ex5_3", "Bprime").spec);
    const CMat rho = invariant_state_maximal(superoperator(coin.kraus()));
    CHECK(direction_trace(coin.L, rho) == doctest::Approx(1.0 / 7.0).epsilon(1e-9));
    CHECK(direction_trace(coin.R, rho) == doctest::Approx(1.0 / 7.0).epsilon(1e-9));
  }
}

TEST_CASE("split verdict details of the three-enclosure coin") {
  const Verdict v = classify_case(find_case("ex5_4"));
  REQUIRE(v.enclosures.size() == 3);
  CHECK(v.enclosures[0].m.size() == 1);
  CHECK(v.enclosures[0].m[0] == doctest::Approx(-1.0 / 3.0).epsilon(1e-10));
  CHECK_FALSE(v.enclosures[0].recurrent);
  CHECK(std::abs(v.enclosures[1].m[0]) <= 1e-10);
  CHECK(std::abs(v.enclosures[2].m[0]) <= 1e-10);
  CHECK(v.enclosures[1].recurrent);
  CHECK(v.enclosures[2].recurrent);
  CHECK(frob(v.transient_projector - basis_projector(4, {3})) <= 1e-8);
  CHECK(frob(v.residual_projector - basis_projector(4, {0})) <= 1e-8);

  // The general-coin traces behind those drifts.
  const Coin1D coin = to_coin_1d(find_case("ex5_4").spec);
  const ChannelDecomposition dec = decompose(superoperator(coin.kraus()));
  CHECK(direction_trace(coin.L, dec.enclosures[0].tau) == doctest::Approx(2.0 / 3.0).epsilon(1e-10));
  CHECK(direction_trace(coin.L, dec.enclosures[1].tau) == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(direction_trace(coin.L, dec.enclosures[2].tau) == doctest::Approx(0.5).epsilon(1e-10));
}

TEST_CASE("both enclosures of the drifting pair are transient") {
  const Verdict v = classify_case(find_case("ex5_5"));
  REQUIRE(v.enclosures.size() == 2);
  CHECK(v.enclosures[0].m[0] == doctest::Approx(-0.6).epsilon(1e-10));
  CHECK(v.enclosures[1].m[0] == doctest::Approx(0.6).epsilon(1e-10));
  CHECK(v.kind == VerdictKind::Transient);
  // Transient verdict covers the whole space, residual included.
  CHECK(frob(v.transient_projector - CMat::Identity(3, 3)) <= 1e-8);
}

TEST_CASE("balanced pair is recurrent with zero drifts") {
  const Verdict v = classify_case(find_case("ex5_6"));
  REQUIRE(v.enclosures.size() == 2);
  CHECK(std::abs(v.enclosures[0].m[0]) <= 1e-10);
  CHECK(std::abs(v.enclosures[1].m[0]) <= 1e-10);
  CHECK(v.kind == VerdictKind::Recurrent);
}

TEST_CASE("planar coin drift vectors") {
  const Verdict v = classify_case(find_case("ex7_2"));
  REQUIRE(v.enclosures.size() == 2);
  REQUIRE(v.enclosures[0].m.size() == 2);
  CHECK(v.enclosures[0].m[0] == doctest::Approx(0.1).epsilon(1e-10));
  CHECK(v.enclosures[0].m[1] == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(v.enclosures[1].m[0] == doctest::Approx(-0.1).epsilon(1e-10));
  CHECK(v.enclosures[1].m[1] == doctest::Approx(-0.5).epsilon(1e-10));
}

TEST_CASE("continuous-time stationary state and drift at zero coupling") {
  const CoinCT coin = to_coin_ct(find_case("ex7_1", "h0").spec);
  const ChannelDecomposition dec = decompose_ct(coin);
  REQUIRE(dec.enclosures.size() == 1);
  const CMat& tau = dec.enclosures[0].tau;
  CHECK(std::abs(tau(0, 0).real() - 0.426735218508998) <= 1e-9);
  CHECK(std::abs(tau(0, 1).real() - 0.299485861182507) <= 1e-9);
  CHECK(std::abs(tau(0, 1).imag() - 0.0794344473007702) <= 1e-9);

  const DriftVector m = drift_2d(coin, tau);
  CHECK(std::abs(m.m1 - (-0.586118251928020)) <= 1e-9);
  CHECK(std::abs(m.m2 - (-0.146529562982005)) <= 1e-9);
  CHECK(m.m1 / m.m2 == doctest::Approx(4.0).epsilon(1e-9));
}

TEST_CASE("tuned coupling cancels the continuous-time drift") {
  const CoinCT coin = to_coin_ct(find_case("ex7_1", "hneg19_2").spec);
  const ChannelDecomposition dec = decompose_ct(coin);
  REQUIRE(dec.enclosures.size() == 1);
  const CMat& tau = dec.enclosures[0].tau;
  CHECK(std::abs(tau(0, 1).real() - 5.0 / 18.0) <= 1e-9);
  CHECK(std::abs(std::abs(tau(0, 1).imag()) - 1.0 / 18.0) <= 1e-9);
  const DriftVector m = drift_2d(coin, tau);
  CHECK(m.norm() <= 1e-9);
}

TEST_CASE("classify_state distinguishes densities under a split verdict") {
  const Coin1D coin = to_coin_1d(find_case("ex5_4").spec);
  CHECK(classify_state_1d(coin, basis_projector(4, {0})) == StateClass::Recurrent);
  CHECK(classify_state_1d(coin, basis_projector(4, {1})) == StateClass::Recurrent);
  CHECK(classify_state_1d(coin, basis_projector(4, {3})) == StateClass::Transient);
  CHECK(classify_state_1d(coin, CMat(CMat::Identity(4, 4) / 4.0)) == StateClass::Recurrent);

  const Coin1D diag = to_coin_1d(find_case("ex5_1b", "case3").spec);
  CHECK(classify_state_1d(diag, basis_projector(2, {0})) == StateClass::Recurrent);
  CHECK(classify_state_1d(diag, basis_projector(2, {1})) == StateClass::Transient);

  // Kind shortcuts: globally recurrent / transient coins ignore the state.
  const Coin1D rec = to_coin_1d(find_case("ex5_6").spec);
  CHECK(classify_state_1d(rec, basis_projector(4, {1})) == StateClass::Recurrent);
  const Coin1D tra = to_coin_1d(find_case("ex5_5").spec);
  CHECK(classify_state_1d(tra, CMat(CMat::Identity(3, 3) / 3.0)) == StateClass::Transient);
}

TEST_CASE("dim-2 and general criteria agree on diagonal non-lazy coins") {
  std::mt19937_64 g(31);
  std::uniform_real_distribution<double> ang(0.1, 1.4);
  for (int rep = 0; rep < 25; ++rep) {
    const double t1 = ang(g), t2 = ang(g);
    Coin1D coin;
    coin.L = CMat::Zero(2, 2);
    coin.R = CMat::Zero(2, 2);
    coin.B = CMat::Zero(2, 2);
    coin.lazy = false;
    coin.L(0, 0) = std::cos(t1);
    coin.L(1, 1) = std::cos(t2);
    coin.R(0, 0) = std::sin(t1);
    coin.R(1, 1) = std::sin(t2);
    const Verdict a = classify_dim2_lazy(coin);
    const Verdict b = classify_general_1d(coin);
    CHECK(a.kind == b.kind);
    CHECK(frob(a.transient_projector - b.transient_projector) <= 1e-8);
  }
}

TEST_CASE("degenerate coins are refused rather than misclassified") {
  Coin1D frozen;
  frozen.L = CMat::Zero(2, 2);
  frozen.R = CMat::Zero(2, 2);
  frozen.B = CMat::Zero(2, 2);
  frozen.lazy = false;
  frozen.L(0, 0) = 1.0;
  frozen.R(1, 1) = 1.0;
  CHECK_THROWS_AS((void)classify_1d(frozen), NoCriterionError);
}

TEST_CASE("lazy non-ergodic coins beyond dimension two are refused") {
  // Direct sum of the mixing dim-2 lazy coin and a scalar lazy walk: at least
  // two invariant states, dimension three, stay operator nonzero.
  const Coin1D two = to_coin_1d(find_case("ex5_1a").spec);
  Coin1D coin;
  coin.L = CMat::Zero(3, 3);
  coin.B = CMat::Zero(3, 3);
  coin.R = CMat::Zero(3, 3);
  coin.lazy = true;
  coin.L.topLeftCorner(2, 2) = two.L;
  coin.B.topLeftCorner(2, 2) = two.B;
  coin.R.topLeftCorner(2, 2) = two.R;
  coin.L(2, 2) = 0.6;
  coin.R(2, 2) = 0.6;
  coin.B(2, 2) = std::sqrt(1.0 - 0.72);
  REQUIRE(validate_coin(coin).ok);
  CHECK_THROWS_AS((void)classify_1d(coin), NoCriterionError);
}

TEST_CASE("jump-chain lift preserves the planar verdict") {
  const Coin2D coin = to_coin_2d(find_case("ex7_2").spec);
  const Verdict disc = classify_2d_discrete(coin);
  const Verdict ct = classify_2d_ct(jump_chain_lift(coin));
  CHECK(disc.kind == ct.kind);
  CHECK(frob(disc.transient_projector - ct.transient_projector) <= 1e-8);
  REQUIRE(disc.enclosures.size() == ct.enclosures.size());
}

TEST_CASE("drift is affine in the state") {
  std::mt19937_64 g(32);
  const Coin1D coin = random_coin_1d(g, 3, true);
  const CMat t1 = random_density(g, 3), t2 = random_density(g, 3);
  const double lam = 0.3;
  const CMat mix = lam * t1 + (1.0 - lam) * t2;
  CHECK(drift_1d(coin, mix) ==
        doctest::Approx(lam * drift_1d(coin, t1) + (1.0 - lam) * drift_1d(coin, t2))
            .epsilon(1e-12));

  const Coin2D c2 = random_coin_2d(g, 3);
  const DriftVector da = drift_2d(c2, t1), db = drift_2d(c2, t2), dm = drift_2d(c2, mix);
  CHECK(dm.m1 == doctest::Approx(lam * da.m1 + (1.0 - lam) * db.m1).epsilon(1e-12));
  CHECK(dm.m2 == doctest::Approx(lam * da.m2 + (1.0 - lam) * db.m2).epsilon(1e-12));
}
