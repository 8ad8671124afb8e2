#include <oqw/rng.hpp>
#include <oqw/simulate.hpp>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <mutex>
#include <sstream>
#include <thread>

namespace oqw {

namespace {

template <int N>
using FMat = Eigen::Matrix<std::complex<double>, N, N>;

// Fixed-size dispatch: the lattice kernels are instantiated for d = 1..4 and
// fall back to dynamic matrices beyond that.
template <class Fn>
decltype(auto) with_dim(Eigen::Index d, Fn&& fn) {
  switch (d) {
    case 1: return fn(std::integral_constant<int, 1>{});
    case 2: return fn(std::integral_constant<int, 2>{});
    case 3: return fn(std::integral_constant<int, 3>{});
    case 4: return fn(std::integral_constant<int, 4>{});
    default: return fn(std::integral_constant<int, Eigen::Dynamic>{});
  }
}

void check_mass(double mass, const char* what) {
  if (std::abs(mass - 1.0) > 1e-9) {
    std::ostringstream os;
    os << what << ": mass drifted to " << mass << " (|mass-1| > 1e-9)";
    throw std::runtime_error(os.str());
  }
}

// ---------------------------------------------------------------------------
// 1D exact evolution.  Buffers span sites c - cap .. c + cap; the occupied
// window after the current step has radius r, and for non-lazy coins only
// sites i with (i - c - par) even are populated.
// ---------------------------------------------------------------------------

template <int N>
struct Grid1D {
  std::vector<FMat<N>> cur, nxt;
  long c = 0, r = 0;
  int par = 0;
  Eigen::Index d = 0;

  Grid1D(long cap, Eigen::Index dim) : c(cap), d(dim) {
    cur.assign(static_cast<std::size_t>(2 * cap + 1), FMat<N>::Zero(dim, dim));
    nxt = cur;
  }

  void steps(const Coin1D& coin, long nsteps, std::vector<double>* p00) {
    const FMat<N> L = coin.L, B = coin.B, R = coin.R;
    const bool lazy = coin.lazy;
    const long stride = lazy ? 1 : 2;
    for (long k = 0; k < nsteps; ++k) {
      for (long i = c - r - 1; i <= c + r + 1; ++i) nxt[static_cast<std::size_t>(i)].setZero();
      long lo = c - r;
      if (!lazy && ((lo - c - par) & 1)) ++lo;
      for (long i = lo; i <= c + r; i += stride) {
        const FMat<N>& blk = cur[static_cast<std::size_t>(i)];
        nxt[static_cast<std::size_t>(i - 1)] += L * blk * L.adjoint();
        if (lazy) nxt[static_cast<std::size_t>(i)] += B * blk * B.adjoint();
        nxt[static_cast<std::size_t>(i + 1)] += R * blk * R.adjoint();
      }
      cur.swap(nxt);
      ++r;
      par = lazy ? 0 : 1 - par;
      double mass = 0.0;
      long mlo = c - r;
      if (!lazy && ((mlo - c - par) & 1)) ++mlo;
      for (long i = mlo; i <= c + r; i += stride) mass += cur[static_cast<std::size_t>(i)].trace().real();
      check_mass(mass, "exact 1D evolution");
      if (p00) p00->push_back(cur[static_cast<std::size_t>(c)].trace().real());
    }
  }

  LatticeState1D to_state() const {
    LatticeState1D st;
    st.offset = -c;
    st.blocks.reserve(cur.size());
    for (const FMat<N>& b : cur) st.blocks.push_back(CMat(b));
    return st;
  }
};

void check_budget_1d(long n, const SimBudget& budget) {
  if (n < 0) throw std::invalid_argument("exact evolution: negative step count");
  if (n > budget.max_steps_1d) {
    std::ostringstream os;
    os << "exact evolution budget exceeded: " << n << " steps requested, 1D budget is "
       << budget.max_steps_1d;
    throw BudgetError(os.str());
  }
}

// ---------------------------------------------------------------------------
// 2D exact evolution on a square window, diamond + parity filtered.
// ---------------------------------------------------------------------------

template <int N>
struct Grid2D {
  std::vector<FMat<N>> cur, nxt;
  long c = 0, w = 0, r = 0;
  int par = 0;  // occupied sites satisfy ((ix - c) + (iy - c) - par) even
  Eigen::Index d = 0;

  Grid2D(long cap, Eigen::Index dim) : c(cap), w(2 * cap + 1), d(dim) {
    cur.assign(static_cast<std::size_t>(w) * static_cast<std::size_t>(w), FMat<N>::Zero(dim, dim));
    nxt = cur;
  }
  FMat<N>& at(std::vector<FMat<N>>& g, long ix, long iy) {
    return g[static_cast<std::size_t>(ix * w + iy)];
  }

  void steps(const Coin2D& coin, long nsteps, std::vector<double>* p00) {
    const FMat<N> D1 = coin.D1, D2 = coin.D2, D3 = coin.D3, D4 = coin.D4;
    for (long k = 0; k < nsteps; ++k) {
      for (long ix = c - r - 1; ix <= c + r + 1; ++ix)
        for (long iy = c - r - 1; iy <= c + r + 1; ++iy) at(nxt, ix, iy).setZero();
      for (long ix = c - r; ix <= c + r; ++ix) {
        const long rem = r - std::labs(ix - c);  // diamond bound for |iy - c|
        long iy = c - rem;
        if ((((ix - c) + (iy - c)) - par) & 1) ++iy;
        for (; iy <= c + rem; iy += 2) {
          const FMat<N>& blk = at(cur, ix, iy);
          at(nxt, ix + 1, iy) += D1 * blk * D1.adjoint();
          at(nxt, ix, iy + 1) += D2 * blk * D2.adjoint();
          at(nxt, ix - 1, iy) += D3 * blk * D3.adjoint();
          at(nxt, ix, iy - 1) += D4 * blk * D4.adjoint();
        }
      }
      cur.swap(nxt);
      ++r;
      par = 1 - par;
      double mass = 0.0;
      for (long ix = c - r; ix <= c + r; ++ix) {
        const long rem = r - std::labs(ix - c);
        long iy = c - rem;
        if ((((ix - c) + (iy - c)) - par) & 1) ++iy;
        for (; iy <= c + rem; iy += 2) mass += at(cur, ix, iy).trace().real();
      }
      check_mass(mass, "exact 2D evolution");
      if (p00) p00->push_back(at(cur, c, c).trace().real());
    }
  }

  LatticeState2D to_state() const {
    LatticeState2D st;
    st.ox = st.oy = -c;
    st.nx = st.ny = w;
    st.blocks.reserve(cur.size());
    for (const FMat<N>& b : cur) st.blocks.push_back(CMat(b));
    return st;
  }
};

void check_budget_2d(long n, const SimBudget& budget) {
  if (n < 0) throw std::invalid_argument("exact evolution: negative step count");
  if (n > budget.max_steps_2d) {
    std::ostringstream os;
    os << "exact evolution budget exceeded: " << n << " steps requested, 2D budget is "
       << budget.max_steps_2d;
    throw BudgetError(os.str());
  }
}

// ---------------------------------------------------------------------------
// Continuous-time exact evolution: RK4 on the truncated lattice master
// equation d/dt rho(s) = G rho(s) + rho(s) G* + sum_j A_j rho(s - e_j) A_j*.
// ---------------------------------------------------------------------------

double total_jump_rate(const CoinCT& coin) {
  CMat Q = CMat::Zero(coin.dim(), coin.dim());
  for (const CMat& A : coin.jumps()) Q += A.adjoint() * A;
  Eigen::SelfAdjointEigenSolver<CMat> es(Q);
  return es.eigenvalues().maxCoeff();
}

long auto_ct_radius(double rate, double t) {
  const double mean = std::max(rate * t, 0.0);
  return static_cast<long>(std::ceil(mean + 6.0 * std::sqrt(mean) + 6.0));
}

template <int N>
struct GridCT {
  std::vector<FMat<N>> y;
  long c = 0, w = 0;
  Eigen::Index d = 0;

  GridCT(long cap, Eigen::Index dim) : c(cap), w(2 * cap + 1), d(dim) {
    y.assign(static_cast<std::size_t>(w) * static_cast<std::size_t>(w), FMat<N>::Zero(dim, dim));
  }
  FMat<N>& at(std::vector<FMat<N>>& g, long ix, long iy) {
    return g[static_cast<std::size_t>(ix * w + iy)];
  }

  void deriv(const CoinCT& coin, const FMat<N>& G, const std::vector<FMat<N>>& in,
             std::vector<FMat<N>>& out) {
    const FMat<N> A1 = coin.A1, A2 = coin.A2, A3 = coin.A3, A4 = coin.A4;
    const long shift[4][2] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    const FMat<N>* As[4] = {&A1, &A2, &A3, &A4};
    for (long ix = 0; ix < w; ++ix) {
      for (long iy = 0; iy < w; ++iy) {
        const std::size_t idx = static_cast<std::size_t>(ix * w + iy);
        const FMat<N>& blk = in[idx];
        FMat<N> acc = G * blk + blk * G.adjoint();
        for (int j = 0; j < 4; ++j) {
          const long sx = ix - shift[j][0], sy = iy - shift[j][1];
          if (sx < 0 || sx >= w || sy < 0 || sy >= w) continue;
          const FMat<N>& src = in[static_cast<std::size_t>(sx * w + sy)];
          acc += (*As[j]) * src * As[j]->adjoint();
        }
        out[idx] = acc;
      }
    }
  }

  void integrate(const CoinCT& coin, double t, double hmax) {
    const FMat<N> G = coin.G;
    // RK4 stability: keep h * ||generator|| comfortably inside the region.
    const double gnorm = 2.0 * coin.G.operatorNorm() + total_jump_rate(coin);
    const double h_stab = 2.0 / std::max(gnorm, 1e-12);
    const double h_target = std::min(hmax, h_stab);
    const long steps = std::max<long>(1, static_cast<long>(std::ceil(t / h_target)));
    const double h = t / static_cast<double>(steps);
    std::vector<FMat<N>> k1 = y, k2 = y, k3 = y, k4 = y, tmp = y;
    for (long s = 0; s < steps; ++s) {
      deriv(coin, G, y, k1);
      for (std::size_t i = 0; i < y.size(); ++i) tmp[i] = y[i] + (0.5 * h) * k1[i];
      deriv(coin, G, tmp, k2);
      for (std::size_t i = 0; i < y.size(); ++i) tmp[i] = y[i] + (0.5 * h) * k2[i];
      deriv(coin, G, tmp, k3);
      for (std::size_t i = 0; i < y.size(); ++i) tmp[i] = y[i] + h * k3[i];
      deriv(coin, G, tmp, k4);
      for (std::size_t i = 0; i < y.size(); ++i)
        y[i] += (h / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    double mass = 0.0;
    for (const FMat<N>& b : y) mass += b.trace().real();
    if (std::abs(mass - 1.0) > 1e-6)
      throw std::runtime_error(
          "continuous-time evolution lost mass; increase the grid radius or reduce the step");
  }

  LatticeState2D to_state() const {
    LatticeState2D st;
    st.ox = st.oy = -c;
    st.nx = st.ny = w;
    st.blocks.reserve(y.size());
    for (const FMat<N>& b : y) st.blocks.push_back(CMat(b));
    return st;
  }
};

void check_ct_grid(long radius, Eigen::Index d) {
  const double bytes = 6.0 * std::pow(2.0 * static_cast<double>(radius) + 1.0, 2.0) *
                       static_cast<double>(d * d) * 16.0;
  if (bytes > 2e9) {
    std::ostringstream os;
    os << "continuous-time grid budget exceeded: radius " << radius << " needs ~"
       << bytes / 1e9 << " GB";
    throw BudgetError(os.str());
  }
}

// ---------------------------------------------------------------------------
// Trajectory sampling.
// ---------------------------------------------------------------------------

CMat normalized_density(const CMat& rho) {
  const double tr = rho.trace().real();
  if (!(tr > 0.0)) throw std::invalid_argument("initial state has nonpositive trace");
  return rho / tr;
}

double branch_weight(const CMat& T, const CMat& sigma, CMat& out) {
  out = T * sigma * T.adjoint();
  return std::max(out.trace().real(), 0.0);
}

[[noreturn]] void vanished_mass() {
  throw std::runtime_error("total branch mass vanished (< 1e-14); the coin is defective");
}

// Exact waiting-time sampler for one continuous-time coin: survival
// S(s) = Tr(e^{Gs} sigma e^{G*s}) evaluated through the eigendecomposition
// G = V diag(lambda) V^{-1} when cond(V) <= 1e8, else by matrix exponentials.
struct CtPropagator {
  CMat G, V, Vinv, M;  // M = V^H V
  CVec lambda;
  bool diag_ok = false;

  explicit CtPropagator(const CoinCT& coin) : G(coin.G) {
    Eigen::ComplexEigenSolver<CMat> es(G, /*computeEigenvectors=*/true);
    if (es.info() != Eigen::Success)
      throw std::runtime_error("eigenvalue decomposition of G failed");
    lambda = es.eigenvalues();
    const double absc = lambda.real().maxCoeff();
    if (absc > 1e-9)
      throw std::runtime_error(
          "survival function cannot decrease: G has nonnegative spectral abscissa; the coin is "
          "defective");
    V = es.eigenvectors();
    Eigen::JacobiSVD<CMat> svd(V);
    const double smin = svd.singularValues().minCoeff();
    if (smin > 0.0 && svd.singularValues().maxCoeff() / smin < 1e8) {
      diag_ok = true;
      Vinv = V.inverse();
      M = V.adjoint() * V;
    }
  }

  CMat evolve(const CMat& sigma, double s) const {  // e^{Gs} sigma e^{G*s}
    CMat E;
    if (diag_ok)
      E = V * (lambda.array() * s).exp().matrix().asDiagonal() * Vinv;
    else
      E = CMat(G * s).exp();
    return E * sigma * E.adjoint();
  }

  // Trace of evolve(sigma, s), with B = Vinv sigma Vinv^H precomputed.
  double survival(const CMat& B, const CMat& sigma, double s) const {
    if (!diag_ok) return evolve(sigma, s).trace().real();
    std::complex<double> acc = 0.0;
    const Eigen::Index d = lambda.size();
    for (Eigen::Index i = 0; i < d; ++i)
      for (Eigen::Index j = 0; j < d; ++j)
        acc += std::exp((lambda(i) + std::conj(lambda(j))) * s) * B(i, j) * M(j, i);
    return acc.real();
  }
};

// ---------------------------------------------------------------------------
// Ensemble fan-out: trajectory i is a pure function of (seed, i), so any
// thread count produces the same ordered result.
// ---------------------------------------------------------------------------

template <class RunOne>
void fan_out(std::size_t n_traj, int n_threads, RunOne&& run_one) {
  n_threads = std::clamp(n_threads, 1, 64);
  if (n_threads <= 1 || n_traj < 2) {
    for (std::size_t i = 0; i < n_traj; ++i) run_one(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n_traj) return;
      try {
        run_one(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  const std::size_t nt = std::min<std::size_t>(static_cast<std::size_t>(n_threads), n_traj);
  pool.reserve(nt);
  for (std::size_t t = 0; t < nt; ++t) pool.emplace_back(worker);
  for (std::thread& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace

// ---------------------------------------------------------------------------
// Exact evolution entry points.
// ---------------------------------------------------------------------------

LatticeState1D exact_distribution(const Coin1D& coin, const CMat& rho0, long n,
                                  const SimBudget& budget) {
  require_same_dim(coin.L, rho0, "exact_distribution");
  check_budget_1d(n, budget);
  return with_dim(coin.dim(), [&](auto dim) {
    Grid1D<dim.value> g(n, coin.dim());
    g.cur[static_cast<std::size_t>(g.c)] = rho0;
    g.steps(coin, n, nullptr);
    return g.to_state();
  });
}

LatticeState2D exact_distribution(const Coin2D& coin, const CMat& rho0, long n,
                                  const SimBudget& budget) {
  require_same_dim(coin.D1, rho0, "exact_distribution");
  check_budget_2d(n, budget);
  return with_dim(coin.dim(), [&](auto dim) {
    Grid2D<dim.value> g(n, coin.dim());
    g.at(g.cur, g.c, g.c) = rho0;
    g.steps(coin, n, nullptr);
    return g.to_state();
  });
}

LatticeState2D exact_distribution_ct(const CoinCT& coin, const CMat& rho0, double t,
                                     const CtGridOptions& opt) {
  require_same_dim(coin.A1, rho0, "exact_distribution_ct");
  if (t < 0.0) throw std::invalid_argument("exact_distribution_ct: negative horizon");
  const double rate = total_jump_rate(coin);
  const long radius = opt.radius >= 0 ? opt.radius : auto_ct_radius(rate, t);
  check_ct_grid(radius, coin.dim());
  return with_dim(coin.dim(), [&](auto dim) {
    GridCT<dim.value> g(radius, coin.dim());
    g.at(g.y, g.c, g.c) = rho0;
    if (t > 0.0) g.integrate(coin, t, opt.step);
    return g.to_state();
  });
}

std::vector<double> return_mass_partial_sum(const Coin1D& coin, const CMat& rho0, long N,
                                            const SimBudget& budget) {
  require_same_dim(coin.L, rho0, "return_mass_partial_sum");
  check_budget_1d(N, budget);
  std::vector<double> p00{rho0.trace().real()};
  with_dim(coin.dim(), [&](auto dim) {
    Grid1D<dim.value> g(N, coin.dim());
    g.cur[static_cast<std::size_t>(g.c)] = rho0;
    g.steps(coin, N, &p00);
    return 0;
  });
  std::vector<double> S(p00.size());
  double acc = 0.0;
  for (std::size_t k = 0; k < p00.size(); ++k) S[k] = (acc += p00[k]);
  return S;
}

std::vector<double> return_mass_partial_sum(const Coin2D& coin, const CMat& rho0, long N,
                                            const SimBudget& budget) {
  require_same_dim(coin.D1, rho0, "return_mass_partial_sum");
  check_budget_2d(N, budget);
  std::vector<double> p00{rho0.trace().real()};
  with_dim(coin.dim(), [&](auto dim) {
    Grid2D<dim.value> g(N, coin.dim());
    g.at(g.cur, g.c, g.c) = rho0;
    g.steps(coin, N, &p00);
    return 0;
  });
  std::vector<double> S(p00.size());
  double acc = 0.0;
  for (std::size_t k = 0; k < p00.size(); ++k) S[k] = (acc += p00[k]);
  return S;
}

// ---------------------------------------------------------------------------
// Trajectories.
// ---------------------------------------------------------------------------

Trajectory simulate_discrete(const Coin1D& coin, const CMat& rho0, long n_steps,
                             std::uint64_t seed, std::uint64_t traj_index) {
  require_same_dim(coin.L, rho0, "simulate_discrete");
  if (n_steps < 0) throw std::invalid_argument("simulate_discrete: negative step count");
  CMat sigma = normalized_density(rho0);
  TrajectoryRng rng(seed, traj_index);
  Trajectory tr;
  tr.seed = seed;
  tr.index = traj_index;
  tr.positions.reserve(static_cast<std::size_t>(n_steps) + 1);
  tr.positions.push_back({0, 0});
  long x = 0;
  CMat cl, cb, cr;
  for (long k = 0; k < n_steps; ++k) {
    const double wl = branch_weight(coin.L, sigma, cl);
    const double wb = coin.lazy ? branch_weight(coin.B, sigma, cb) : 0.0;
    const double wr = branch_weight(coin.R, sigma, cr);
    const double tot = wl + wb + wr;
    if (tot < 1e-14) vanished_mass();
    const double u = rng.uniform() * tot;
    if (u < wl) {
      --x;
      sigma = cl / cl.trace().real();
    } else if (u < wl + wb) {
      sigma = cb / cb.trace().real();
    } else {
      ++x;
      sigma = cr / cr.trace().real();
    }
    tr.positions.push_back({x, 0});
  }
  tr.final_state = std::move(sigma);
  return tr;
}

Trajectory simulate_discrete(const Coin2D& coin, const CMat& rho0, long n_steps,
                             std::uint64_t seed, std::uint64_t traj_index) {
  require_same_dim(coin.D1, rho0, "simulate_discrete");
  if (n_steps < 0) throw std::invalid_argument("simulate_discrete: negative step count");
  CMat sigma = normalized_density(rho0);
  TrajectoryRng rng(seed, traj_index);
  Trajectory tr;
  tr.seed = seed;
  tr.index = traj_index;
  tr.positions.reserve(static_cast<std::size_t>(n_steps) + 1);
  tr.positions.push_back({0, 0});
  std::array<long, 2> x{0, 0};
  const long shift[4][2] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  const CMat* Ds[4] = {&coin.D1, &coin.D2, &coin.D3, &coin.D4};
  CMat cand[4];
  double wgt[4];
  for (long k = 0; k < n_steps; ++k) {
    double tot = 0.0;
    for (int j = 0; j < 4; ++j) tot += (wgt[j] = branch_weight(*Ds[j], sigma, cand[j]));
    if (tot < 1e-14) vanished_mass();
    double u = rng.uniform() * tot;
    int pick = 3;
    for (int j = 0; j < 3; ++j) {
      if (u < wgt[j]) {
        pick = j;
        break;
      }
      u -= wgt[j];
    }
    x[0] += shift[pick][0];
    x[1] += shift[pick][1];
    sigma = cand[pick] / cand[pick].trace().real();
    tr.positions.push_back(x);
  }
  tr.final_state = std::move(sigma);
  return tr;
}

Trajectory simulate_ct(const CoinCT& coin, const CMat& rho0, double t_max, std::uint64_t seed,
                       std::uint64_t traj_index) {
  require_same_dim(coin.A1, rho0, "simulate_ct");
  if (!(t_max > 0.0)) throw std::invalid_argument("simulate_ct: horizon must be positive");
  const CtPropagator prop(coin);
  CMat sigma = normalized_density(rho0);
  TrajectoryRng rng(seed, traj_index);
  Trajectory tr;
  tr.seed = seed;
  tr.index = traj_index;
  tr.times.push_back(0.0);
  tr.positions.push_back({0, 0});
  std::array<long, 2> x{0, 0};
  double t = 0.0;
  const long shift[4][2] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  const auto jumps = coin.jumps();
  const long jump_cap =
      100 + static_cast<long>(100.0 * total_jump_rate(coin) * t_max);
  for (long count = 0;; ++count) {
    if (count > jump_cap)
      throw std::runtime_error("continuous-time jump budget exceeded; the coin is defective");
    const double rem = t_max - t;
    if (rem <= 0.0) break;
    const double u = rng.uniform();
    const CMat B = prop.diag_ok ? CMat(prop.Vinv * sigma * prop.Vinv.adjoint()) : CMat();
    if (prop.survival(B, sigma, rem) > u) {
      sigma = prop.evolve(sigma, rem);
      sigma /= sigma.trace().real();
      break;  // no further jump before the horizon
    }
    double lo = 0.0, hi = rem;
    while (hi - lo > 1e-12) {
      const double mid = 0.5 * (lo + hi);
      (prop.survival(B, sigma, mid) > u ? lo : hi) = mid;
    }
    const double T = 0.5 * (lo + hi);
    const CMat before = prop.evolve(sigma, T);  // unnormalized sigma(T-)
    double wgt[4];
    double tot = 0.0;
    CMat cand[4];
    for (int j = 0; j < 4; ++j) tot += (wgt[j] = branch_weight(jumps[j], before, cand[j]));
    if (tot < 1e-18) vanished_mass();
    double v = rng.uniform() * tot;
    int pick = 3;
    for (int j = 0; j < 3; ++j) {
      if (v < wgt[j]) {
        pick = j;
        break;
      }
      v -= wgt[j];
    }
    sigma = cand[pick] / cand[pick].trace().real();
    x[0] += shift[pick][0];
    x[1] += shift[pick][1];
    t += T;
    tr.times.push_back(t);
    tr.positions.push_back(x);
  }
  tr.final_state = std::move(sigma);
  return tr;
}

// ---------------------------------------------------------------------------
// Ensembles and statistics.
// ---------------------------------------------------------------------------

std::vector<Trajectory> simulate_ensemble(const Coin1D& coin, const CMat& rho0, long n_steps,
                                          std::size_t n_traj, std::uint64_t seed, int n_threads) {
  std::vector<Trajectory> out(n_traj);
  fan_out(n_traj, n_threads,
          [&](std::size_t i) { out[i] = simulate_discrete(coin, rho0, n_steps, seed, i); });
  return out;
}

std::vector<Trajectory> simulate_ensemble(const Coin2D& coin, const CMat& rho0, long n_steps,
                                          std::size_t n_traj, std::uint64_t seed, int n_threads) {
  std::vector<Trajectory> out(n_traj);
  fan_out(n_traj, n_threads,
          [&](std::size_t i) { out[i] = simulate_discrete(coin, rho0, n_steps, seed, i); });
  return out;
}

std::vector<Trajectory> simulate_ensemble_ct(const CoinCT& coin, const CMat& rho0, double t_max,
                                             std::size_t n_traj, std::uint64_t seed,
                                             int n_threads) {
  std::vector<Trajectory> out(n_traj);
  fan_out(n_traj, n_threads,
          [&](std::size_t i) { out[i] = simulate_ct(coin, rho0, t_max, seed, i); });
  return out;
}

EnsembleStats empirical_stats(const std::vector<Trajectory>& trajectories, double horizon) {
  if (trajectories.empty()) throw std::invalid_argument("empirical_stats: empty ensemble");
  if (!(horizon > 0.0)) throw std::invalid_argument("empirical_stats: horizon must be positive");
  EnsembleStats st;
  st.count = trajectories.size();
  st.horizon = horizon;
  const double n = static_cast<double>(st.count);
  std::array<double, 2> sum{0.0, 0.0}, sumsq{0.0, 0.0};
  double returns = 0.0, time_at_origin = 0.0;
  for (const Trajectory& tr : trajectories) {
    const std::array<long, 2>& last = tr.positions.back();
    for (int cpt = 0; cpt < 2; ++cpt) {
      const double v = static_cast<double>(last[static_cast<std::size_t>(cpt)]) / horizon;
      sum[static_cast<std::size_t>(cpt)] += v;
      sumsq[static_cast<std::size_t>(cpt)] += v * v;
    }
    if (tr.times.empty()) {
      // Discrete: every step spent at the origin after time 0 counts as a visit.
      for (std::size_t k = 1; k < tr.positions.size(); ++k) {
        if (tr.positions[k][0] == 0 && tr.positions[k][1] == 0) returns += 1.0;
        st.occupation[tr.positions[k]] += 1.0 / n;
      }
      st.occupation[tr.positions.front()] += 1.0 / n;
    } else {
      for (std::size_t k = 1; k < tr.positions.size(); ++k)
        if (tr.positions[k][0] == 0 && tr.positions[k][1] == 0) returns += 1.0;
      for (std::size_t k = 0; k < tr.positions.size(); ++k) {
        const double t0 = tr.times[k];
        const double t1 = k + 1 < tr.times.size() ? tr.times[k + 1] : horizon;
        st.occupation[tr.positions[k]] += (t1 - t0) / n;
        if (tr.positions[k][0] == 0 && tr.positions[k][1] == 0) time_at_origin += t1 - t0;
      }
    }
  }
  for (int cpt = 0; cpt < 2; ++cpt) {
    const std::size_t c = static_cast<std::size_t>(cpt);
    st.drift[c] = sum[c] / n;
    const double var = st.count > 1 ? std::max(0.0, (sumsq[c] - n * st.drift[c] * st.drift[c]) / (n - 1.0)) : 0.0;
    st.ci95[c] = 1.959963984540054 * std::sqrt(var / n);
  }
  st.mean_returns = returns / n;
  st.mean_time_at_origin = time_at_origin / n;
  return st;
}

// ---------------------------------------------------------------------------
// Conditionally averaged empirical distributions.
// ---------------------------------------------------------------------------

LatticeState1D empirical_distribution(const Coin1D& coin, const CMat& rho0, long n,
                                      std::size_t n_traj, std::uint64_t seed, long exact_tail,
                                      int n_threads) {
  if (n < 0) throw std::invalid_argument("empirical_distribution: negative horizon");
  const long tail = std::clamp(exact_tail, 0L, n);
  const long head = n - tail;
  if (n_traj == 0) throw std::invalid_argument("empirical_distribution: empty ensemble");
  const auto trajs = simulate_ensemble(coin, rho0, head, n_traj, seed, n_threads);
  return with_dim(coin.dim(), [&](auto dim) {
    Grid1D<dim.value> g(n, coin.dim());
    const double wgt = 1.0 / static_cast<double>(n_traj);
    for (const Trajectory& tr : trajs)
      g.cur[static_cast<std::size_t>(g.c + tr.positions.back()[0])] += wgt * tr.final_state;
    g.r = head;
    g.par = coin.lazy ? 0 : static_cast<int>(head & 1);
    g.steps(coin, tail, nullptr);
    return g.to_state();
  });
}

LatticeState2D empirical_distribution(const Coin2D& coin, const CMat& rho0, long n,
                                      std::size_t n_traj, std::uint64_t seed, long exact_tail,
                                      int n_threads) {
  if (n < 0) throw std::invalid_argument("empirical_distribution: negative horizon");
  const long tail = std::clamp(exact_tail, 0L, n);
  const long head = n - tail;
  if (n_traj == 0) throw std::invalid_argument("empirical_distribution: empty ensemble");
  const auto trajs = simulate_ensemble(coin, rho0, head, n_traj, seed, n_threads);
  return with_dim(coin.dim(), [&](auto dim) {
    Grid2D<dim.value> g(n, coin.dim());
    const double wgt = 1.0 / static_cast<double>(n_traj);
    for (const Trajectory& tr : trajs)
      g.at(g.cur, g.c + tr.positions.back()[0], g.c + tr.positions.back()[1]) +=
          wgt * tr.final_state;
    g.r = head;
    g.par = static_cast<int>(head & 1);
    g.steps(coin, tail, nullptr);
    return g.to_state();
  });
}

LatticeState2D empirical_distribution_ct(const CoinCT& coin, const CMat& rho0, double t,
                                         std::size_t n_traj, std::uint64_t seed,
                                         double exact_tail, const CtGridOptions& opt,
                                         int n_threads) {
  if (!(t > 0.0)) throw std::invalid_argument("empirical_distribution_ct: horizon must be positive");
  const double tail = std::clamp(exact_tail, 0.0, t);
  const double head = t - tail;
  if (n_traj == 0) throw std::invalid_argument("empirical_distribution_ct: empty ensemble");
  std::vector<Trajectory> trajs;
  long rdep = 0;
  if (head > 0.0) {
    trajs = simulate_ensemble_ct(coin, rho0, head, n_traj, seed, n_threads);
    for (const Trajectory& tr : trajs)
      rdep = std::max({rdep, std::labs(tr.positions.back()[0]), std::labs(tr.positions.back()[1])});
  }
  const double rate = total_jump_rate(coin);
  const long rtail = opt.radius >= 0 ? opt.radius : auto_ct_radius(rate, tail);
  const long radius = rdep + rtail;
  check_ct_grid(radius, coin.dim());
  return with_dim(coin.dim(), [&](auto dim) {
    GridCT<dim.value> g(radius, coin.dim());
    const double wgt = 1.0 / static_cast<double>(n_traj);
    if (head > 0.0) {
      for (const Trajectory& tr : trajs)
        g.at(g.y, g.c + tr.positions.back()[0], g.c + tr.positions.back()[1]) +=
            wgt * tr.final_state;
    } else {
      g.at(g.y, g.c, g.c) = normalized_density(rho0);
    }
    if (tail > 0.0) g.integrate(coin, tail, opt.step);
    return g.to_state();
  });
}

// ---------------------------------------------------------------------------
// Total-variation distances.
// ---------------------------------------------------------------------------

double tv_distance(const LatticeState1D& a, const LatticeState1D& b) {
  const long lo = std::min(a.offset, b.offset);
  const long hi = std::max(a.offset + static_cast<long>(a.blocks.size()),
                           b.offset + static_cast<long>(b.blocks.size()));
  double acc = 0.0;
  for (long s = lo; s < hi; ++s) acc += std::abs(a.site_mass(s) - b.site_mass(s));
  return 0.5 * acc;
}

double tv_distance(const LatticeState2D& a, const LatticeState2D& b) {
  const long xlo = std::min(a.ox, b.ox), xhi = std::max(a.ox + a.nx, b.ox + b.nx);
  const long ylo = std::min(a.oy, b.oy), yhi = std::max(a.oy + a.ny, b.oy + b.ny);
  double acc = 0.0;
  for (long x = xlo; x < xhi; ++x)
    for (long y = ylo; y < yhi; ++y) acc += std::abs(a.site_mass(x, y) - b.site_mass(x, y));
  return 0.5 * acc;
}

}  // namespace oqw
