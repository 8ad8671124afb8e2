#include <doctest.h>

#include <oqw/io.hpp>
#include <oqw/registry.hpp>
#include <oqw/spectral.hpp>

#include "helpers.hpp"

using namespace oqw;
using namespace oqw::testutil;

namespace {

Coin1D registry_coin_1d(const std::string& id, const std::string& variant = "") {
  for (const RegistryCase* c : registry_find(id))
    if (c->variant == variant) return to_coin_1d(c->spec);
  REQUIRE(false);
  return {};
}

CoinCT registry_coin_ct(const std::string& id, const std::string& variant) {
  for (const RegistryCase* c : registry_find(id))
    if (c->variant == variant) return to_coin_ct(c->spec);
  REQUIRE(false);
  return {};
}

CMat basis_projector(Eigen::Index d, std::initializer_list<Eigen::Index> idx) {
  CMat P = CMat::Zero(d, d);
  for (Eigen::Index i : idx) P(i, i) = 1.0;
  return P;
}

}  // namespace

TEST_CASE("superoperator matrix realizes the Kraus map") {
  std::mt19937_64 g(21);
  for (int d = 1; d <= 4; ++d) {
    const Coin1D coin = random_coin_1d(g, d, true);
    const Superoperator S = superoperator(coin.kraus());
    CHECK(S.dim == d);
    for (int rep = 0; rep < 3; ++rep) {
      const CMat X = randn(g, d, d);
      CHECK(frob(S.apply(X) - apply_channel(coin.kraus(), X)) <= 1e-12);
    }
  }
}

TEST_CASE("lindblad superoperator realizes the generator") {
  std::mt19937_64 g(22);
  const CoinCT coin = random_coin_ct(g, 3);
  const Superoperator S = lindblad_superoperator(coin);
  const CMat X = randn(g, 3, 3);
  CMat expect = coin.G * X + X * coin.G.adjoint();
  for (const CMat& A : coin.jumps()) expect += A * X * A.adjoint();
  CHECK(frob(S.apply(X) - expect) <= 1e-12);
}

TEST_CASE("maximal invariant state: mixing lazy coin reaches I/2") {
  const Coin1D coin = registry_coin_1d("ex5_1a");
  const Superoperator S = superoperator(coin.kraus());
  const CMat rho = invariant_state_maximal(S);
  CHECK(frob(rho - CMat::Identity(2, 2) / 2.0) <= 1e-10);
  CHECK(frob(S.apply(rho) - rho) <= 1e-10);
  CHECK(is_ergodic(S));
}

TEST_CASE("maximal invariant state: pure-difference fixed point") {
  const Coin1D coin = registry_coin_1d("ex5_2");
  const Superoperator S = superoperator(coin.kraus());
  const CMat rho = invariant_state_maximal(S);
  CMat expect(3, 3);
  expect << 1, 0, -1, 0, 0, 0, -1, 0, 1;
  expect *= 0.5;
  CHECK(frob(rho - expect) <= 1e-10);
  CHECK(frob(S.apply(rho) - rho) <= 1e-10);
}

TEST_CASE("decomposition of the three-enclosure coin") {
  const Coin1D coin = registry_coin_1d("ex5_4");
  const Superoperator S = superoperator(coin.kraus());
  const ChannelDecomposition dec = decompose(S);
  REQUIRE(dec.enclosures.size() == 3);
  // Deterministic order: the drifting direction first, then the two balanced
  // ones in descending basis index.
  CHECK(frob(dec.enclosures[0].projector - basis_projector(4, {3})) <= 1e-8);
  CHECK(frob(dec.enclosures[1].projector - basis_projector(4, {2})) <= 1e-8);
  CHECK(frob(dec.enclosures[2].projector - basis_projector(4, {1})) <= 1e-8);
  CHECK(frob(dec.transient_projector - basis_projector(4, {0})) <= 1e-8);
  CMat sum = dec.transient_projector;
  for (const Enclosure& e : dec.enclosures) {
    sum += e.projector;
    CHECK(frob(S.apply(e.tau) - e.tau) <= 1e-10);
    CHECK(frob(e.projector * e.tau - e.tau) <= 1e-9);  // supported inside
  }
  CHECK(frob(sum - CMat::Identity(4, 4)) <= 1e-9);
  CHECK_FALSE(is_ergodic(S));
}

TEST_CASE("decomposition of the drifting pair") {
  const Coin1D coin = registry_coin_1d("ex5_5");
  const Superoperator S = superoperator(coin.kraus());
  const ChannelDecomposition dec = decompose(S);
  REQUIRE(dec.enclosures.size() == 2);
  CHECK(frob(dec.enclosures[0].projector - basis_projector(3, {1})) <= 1e-8);
  CHECK(frob(dec.enclosures[1].projector - basis_projector(3, {0})) <= 1e-8);
  CHECK(frob(dec.transient_projector - basis_projector(3, {2})) <= 1e-8);
}

TEST_CASE("decomposition of the balanced pair with a feeding remainder") {
  const Coin1D coin = registry_coin_1d("ex5_6");
  const Superoperator S = superoperator(coin.kraus());
  const ChannelDecomposition dec = decompose(S);
  REQUIRE(dec.enclosures.size() == 2);
  CHECK(frob(dec.enclosures[0].projector - basis_projector(4, {2})) <= 1e-8);
  CHECK(frob(dec.enclosures[1].projector - basis_projector(4, {0})) <= 1e-8);
  CHECK(frob(dec.transient_projector - basis_projector(4, {1, 3})) <= 1e-8);
}

TEST_CASE("continuous-time decomposition with a Hamiltonian-collapsed state") {
  const CoinCT coin = registry_coin_ct("ex7_3", "H2");
  const ChannelDecomposition dec = decompose_ct(coin);
  const Superoperator L = lindblad_superoperator(coin);
  REQUIRE(dec.enclosures.size() == 1);
  CHECK(dec.enclosures[0].projector.trace().real() == doctest::Approx(2.0).epsilon(1e-9));
  CMat expect = CMat::Zero(3, 3);
  expect(0, 0) = expect(1, 1) = 0.5;
  CHECK(frob(dec.enclosures[0].tau - expect) <= 1e-8);
  CHECK(frob(L.apply(dec.enclosures[0].tau)) <= 1e-9);
}

TEST_CASE("reachable support expands transient directions") {
  const Coin1D coin = registry_coin_1d("ex5_4");
  const Superoperator S = superoperator(coin.kraus());
  const CMat from_e1 = reachable_support(S, basis_projector(4, {0}));
  CHECK(from_e1.trace().real() == doctest::Approx(3.0).epsilon(1e-9));
  const CMat from_e4 = reachable_support(S, basis_projector(4, {3}));
  CHECK(from_e4.trace().real() == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("absorption operators across enclosures sum to the identity") {
  const Coin1D coin = registry_coin_1d("ex5_4");
  const Superoperator S = superoperator(coin.kraus());
  const ChannelDecomposition dec = decompose(S);
  CMat sum = CMat::Zero(4, 4);
  for (const Enclosure& e : dec.enclosures) {
    const CMat A = absorption_operator(S, e.projector);
    sum += A;
    // A(Y) restricted to Y itself is the identity there.
    CHECK(frob(e.projector * A * e.projector - e.projector) <= 1e-9);
  }
  CHECK(frob(sum - CMat::Identity(4, 4)) <= 1e-9);
}

TEST_CASE("projector isometry spans the projector deterministically") {
  std::mt19937_64 g(23);
  for (int rep = 0; rep < 10; ++rep) {
    const CMat X = randn(g, 4, 2);
    Eigen::HouseholderQR<CMat> qr(X);
    const CMat Q = qr.householderQ() * CMat::Identity(4, 2);
    const CMat P = Q * Q.adjoint();
    const CMat W = projector_isometry(P);
    REQUIRE(W.cols() == 2);
    CHECK(frob(W.adjoint() * W - CMat::Identity(2, 2)) <= 1e-10);
    CHECK(frob(W * W.adjoint() - P) <= 1e-8);
    CHECK(frob(projector_isometry(P) - W) == 0.0);  // bitwise deterministic
  }
}

TEST_CASE("random channels decompose consistently") {
  std::mt19937_64 g(24);
  for (int d = 1; d <= 4; ++d) {
    for (int rep = 0; rep < 5; ++rep) {
      const Coin1D coin = random_coin_1d(g, d, rep % 2 == 0);
      const Superoperator S = superoperator(coin.kraus());
      const ChannelDecomposition dec = decompose(S);
      CMat sum = dec.transient_projector;
      for (const Enclosure& e : dec.enclosures) {
        sum += e.projector;
        CHECK(frob(S.apply(e.tau) - e.tau) <= 1e-10);
      }
      CHECK(frob(sum - CMat::Identity(d, d)) <= 1e-9);
    }
  }
}

TEST_CASE("random lindblad generators decompose consistently") {
  std::mt19937_64 g(25);
  for (int d = 1; d <= 4; ++d) {
    const CoinCT coin = random_coin_ct(g, d);
    const Superoperator L = lindblad_superoperator(coin);
    const ChannelDecomposition dec = decompose_ct(coin);
    CMat sum = dec.transient_projector;
    for (const Enclosure& e : dec.enclosures) {
      sum += e.projector;
      CHECK(frob(L.apply(e.tau)) <= 1e-9);
    }
    CHECK(frob(sum - CMat::Identity(d, d)) <= 1e-9);
  }
}

TEST_CASE("identity channel splits into standard-basis enclosures") {
  const Superoperator S = superoperator({CMat::Identity(2, 2)});
  CHECK(frob(invariant_state_maximal(S) - CMat::Identity(2, 2) / 2.0) <= 1e-10);
  const ChannelDecomposition dec = decompose(S);
  REQUIRE(dec.enclosures.size() == 2);
  CHECK(frob(dec.transient_projector) <= 1e-9);
  // Deterministic tie-break: every state is invariant, so the split must
  // land on the standard basis, one coordinate per enclosure.
  const CMat p0 = dec.enclosures[0].projector;
  const CMat p1 = dec.enclosures[1].projector;
  CHECK(frob(p0 * p1) <= 1e-9);
  const bool standard = (frob(p0 - basis_projector(2, {0})) <= 1e-8 &&
                         frob(p1 - basis_projector(2, {1})) <= 1e-8) ||
                        (frob(p0 - basis_projector(2, {1})) <= 1e-8 &&
                         frob(p1 - basis_projector(2, {0})) <= 1e-8);
  CHECK(standard);
}

TEST_CASE("degenerate continuous-time generator splits like the identity channel") {
  const CMat half = 0.5 * CMat::Identity(2, 2);
  const CoinCT coin = make_coin_ct(half, half, half, half, CMat::Zero(2, 2));
  const ChannelDecomposition dec = decompose_ct(coin);
  REQUIRE(dec.enclosures.size() == 2);
  CHECK(frob(dec.transient_projector) <= 1e-9);
  CHECK(dec.enclosures[0].projector.trace().real() == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(dec.enclosures[1].projector.trace().real() == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("lifted planar coin decomposes into two corner enclosures") {
  const CoinCT coin = registry_coin_ct("ex7_3", "H1");
  const ChannelDecomposition dec = decompose_ct(coin);
  REQUIRE(dec.enclosures.size() == 2);
  CHECK(frob(dec.transient_projector - basis_projector(3, {2})) <= 1e-8);
  bool e0 = false, e1 = false;
  for (const Enclosure& e : dec.enclosures) {
    if (frob(e.projector - basis_projector(3, {0})) <= 1e-8) {
      e0 = true;
      CHECK(frob(e.tau - basis_projector(3, {0})) <= 1e-9);
    }
    if (frob(e.projector - basis_projector(3, {1})) <= 1e-8) {
      e1 = true;
      CHECK(frob(e.tau - basis_projector(3, {1})) <= 1e-9);
    }
  }
  CHECK(e0);
  CHECK(e1);
}
