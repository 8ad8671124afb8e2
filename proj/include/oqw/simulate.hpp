// Independent verification engines: exact lattice evolution (discrete and
// continuous time), Monte Carlo quantum trajectories, conditionally averaged
// empirical distributions, and ensemble statistics.
#pragma once

#include <oqw/qcore.hpp>

#include <array>
#include <cstdint>
#include <map>
#include <vector>

namespace oqw {

// Raised when a request exceeds the configured lattice budget (CLI exit 4).
struct BudgetError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SimBudget {
  long max_steps_1d = 20000;
  long max_steps_2d = 600;
};

// Exact distribution on Z: blocks[i] is the unnormalized internal block at
// site offset + i; site masses are the block traces.
struct LatticeState1D {
  long offset = 0;
  std::vector<CMat> blocks;

  double site_mass(long s) const {
    const long i = s - offset;
    if (i < 0 || i >= static_cast<long>(blocks.size())) return 0.0;
    return blocks[static_cast<std::size_t>(i)].trace().real();
  }
  double total_mass() const {
    double m = 0.0;
    for (const CMat& b : blocks) m += b.trace().real();
    return m;
  }
};

// Exact distribution on Z^2: block (ix, iy) sits at site (ox + ix, oy + iy).
struct LatticeState2D {
  long ox = 0, oy = 0;
  Eigen::Index nx = 0, ny = 0;
  std::vector<CMat> blocks;  // row-major, index ix * ny + iy

  const CMat& at(Eigen::Index ix, Eigen::Index iy) const {
    return blocks[static_cast<std::size_t>(ix * ny + iy)];
  }
  double site_mass(long x, long y) const {
    const long ix = x - ox, iy = y - oy;
    if (ix < 0 || ix >= nx || iy < 0 || iy >= ny) return 0.0;
    return at(ix, iy).trace().real();
  }
  double total_mass() const {
    double m = 0.0;
    for (const CMat& b : blocks) m += b.trace().real();
    return m;
  }
};

// n exact steps from rho0 placed at the origin; mass is checked to 1e-9
// after every step.  Throws BudgetError beyond the configured budget.
LatticeState1D exact_distribution(const Coin1D& coin, const CMat& rho0, long n,
                                  const SimBudget& budget = {});
LatticeState2D exact_distribution(const Coin2D& coin, const CMat& rho0, long n,
                                  const SimBudget& budget = {});

// Continuous-time exact evolution by RK4 on a truncated lattice.  A negative
// radius selects the automatic choice rate*t + 6*sqrt(rate*t) + 6 with
// rate = lambda_max(sum A_j* A_j).
struct CtGridOptions {
  double step = 0.002;
  long radius = -1;
};
LatticeState2D exact_distribution_ct(const CoinCT& coin, const CMat& rho0, double t,
                                     const CtGridOptions& opt = {});

// Partial sums S(k) = sum_{n<=k} p00(n), k = 0..N, of the exact return mass.
std::vector<double> return_mass_partial_sum(const Coin1D& coin, const CMat& rho0, long N,
                                            const SimBudget& budget = {});
std::vector<double> return_mass_partial_sum(const Coin2D& coin, const CMat& rho0, long N,
                                            const SimBudget& budget = {});

struct Trajectory {
  std::vector<double> times;                   // CT jump times (t0 = 0); empty for discrete
  std::vector<std::array<long, 2>> positions;  // after each step/jump; {x, 0} on Z
  std::uint64_t seed = 0;
  std::uint64_t index = 0;
  CMat final_state;  // normalized internal state at the horizon
};

// Single trajectories; reproducible functions of (seed, traj_index).
// Branch sampling consumes one uniform per step in fixed order L, B, R
// (or D1..D4); the continuous-time sampler inverts the survival function
// Tr sigma(t) by bisection to 1e-12 time resolution.
Trajectory simulate_discrete(const Coin1D& coin, const CMat& rho0, long n_steps,
                             std::uint64_t seed, std::uint64_t traj_index = 0);
Trajectory simulate_discrete(const Coin2D& coin, const CMat& rho0, long n_steps,
                             std::uint64_t seed, std::uint64_t traj_index = 0);
Trajectory simulate_ct(const CoinCT& coin, const CMat& rho0, double t_max, std::uint64_t seed,
                       std::uint64_t traj_index = 0);

// Ensembles: trajectory i uses stream (seed, i); the result vector is ordered
// by index, so output is identical for every thread count.
std::vector<Trajectory> simulate_ensemble(const Coin1D& coin, const CMat& rho0, long n_steps,
                                          std::size_t n_traj, std::uint64_t seed,
                                          int n_threads = 1);
std::vector<Trajectory> simulate_ensemble(const Coin2D& coin, const CMat& rho0, long n_steps,
                                          std::size_t n_traj, std::uint64_t seed,
                                          int n_threads = 1);
std::vector<Trajectory> simulate_ensemble_ct(const CoinCT& coin, const CMat& rho0, double t_max,
                                             std::size_t n_traj, std::uint64_t seed,
                                             int n_threads = 1);

struct EnsembleStats {
  std::size_t count = 0;
  double horizon = 0.0;
  std::array<double, 2> drift{0.0, 0.0};  // mean terminal displacement / horizon
  std::array<double, 2> ci95{0.0, 0.0};   // normal-approximation half-widths
  double mean_returns = 0.0;              // mean visits to the origin after time 0
  double mean_time_at_origin = 0.0;       // CT: mean Lebesgue time at the origin
  std::map<std::array<long, 2>, double> occupation;  // site -> mean visits (CT: mean time)
};

EnsembleStats empirical_stats(const std::vector<Trajectory>& trajectories, double horizon);

// Conditionally averaged empirical distribution: sample n_traj trajectories
// for the first part of the horizon, deposit their internal states on the
// lattice, and propagate the sampled mixture exactly for the remaining
// exact_tail steps (time units in the CT overload).  This keeps the full
// Monte Carlo dependence while cutting the histogram variance enough for
// tight total-variation comparisons against the exact evolution.
LatticeState1D empirical_distribution(const Coin1D& coin, const CMat& rho0, long n,
                                      std::size_t n_traj, std::uint64_t seed, long exact_tail,
                                      int n_threads = 1);
LatticeState2D empirical_distribution(const Coin2D& coin, const CMat& rho0, long n,
                                      std::size_t n_traj, std::uint64_t seed, long exact_tail,
                                      int n_threads = 1);
LatticeState2D empirical_distribution_ct(const CoinCT& coin, const CMat& rho0, double t,
                                         std::size_t n_traj, std::uint64_t seed,
                                         double exact_tail, const CtGridOptions& opt = {},
                                         int n_threads = 1);

// Total-variation distance (1/2 the L1 difference of site masses).
double tv_distance(const LatticeState1D& a, const LatticeState1D& b);
double tv_distance(const LatticeState2D& a, const LatticeState2D& b);

}  // namespace oqw
