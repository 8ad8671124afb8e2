// oqw: command-line front end for the open-quantum-walk toolkit.
//
// Subcommands: validate | classify | simulate | reproduce.
// Exit codes: 0 ok, 1 numeric invalidity, 2 structural problem,
//             3 no applicable criterion, 4 budget exceeded.

#include <CLI11.hpp>
#include <json.hpp>

#include <oqw/classify.hpp>
#include <oqw/io.hpp>
#include <oqw/registry.hpp>
#include <oqw/simulate.hpp>
#include <oqw/spectral.hpp>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

namespace {

using namespace oqw;
using ojson = nlohmann::ordered_json;

constexpr int kOk = 0;
constexpr int kNumeric = 1;
constexpr int kStructural = 2;
constexpr int kNoCriterion = 3;
constexpr int kBudget = 4;

std::string sig12(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

// Rounds to 12 significant digits so printed and JSON values agree.
double round12(double v) {
  if (v == 0.0 || !std::isfinite(v)) return v == 0.0 ? 0.0 : v;
  return std::strtod(sig12(v).c_str(), nullptr);
}

std::string fmt_complex(Complex z) {
  if (z.imag() == 0.0) return sig12(z.real());
  std::string s = sig12(z.real());
  if (z.imag() >= 0.0) s += "+";
  s += sig12(z.imag());
  s += "i";
  return s;
}

int thread_count() {
  if (const char* s = std::getenv("OQW_NUM_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(s, &end, 10);
    if (end != s && v >= 1) return static_cast<int>(std::min(v, 64L));
  }
  unsigned hc = std::thread::hardware_concurrency();
  if (hc == 0) hc = 1;
  return static_cast<int>(std::min(hc, 64u));
}

// ---------------------------------------------------------------------------
// validate

int cmd_validate(const std::string& path) {
  const CoinSpecFile spec = load_coin_file(path);
  ValidationReport rep;
  if (spec.kind == "oqw1d")
    rep = validate_coin(to_coin_1d(spec));
  else if (spec.kind == "oqw2d")
    rep = validate_coin(to_coin_2d(spec));
  else
    rep = validate_coin(to_coin_ct(spec));
  std::cout << "file: " << path << "\n";
  std::cout << "kind: " << spec.kind << "\n";
  std::cout << "dimension: " << spec.dimension << "\n";
  for (const std::string& m : rep.messages) std::cout << "  " << m << "\n";
  std::cout << "deficiency: " << sig12(rep.deficiency) << "\n";
  std::cout << "result: " << (rep.ok ? "valid" : "INVALID") << "\n";
  return rep.ok ? kOk : kNumeric;
}

// ---------------------------------------------------------------------------
// classify

Verdict classify_spec(const CoinSpecFile& spec, const NumericPolicy& pol) {
  if (spec.kind == "oqw1d") return classify_1d(to_coin_1d(spec), pol);
  if (spec.kind == "oqw2d") return classify_2d_discrete(to_coin_2d(spec), pol);
  return classify_2d_ct(to_coin_ct(spec), pol);
}

void require_valid(const CoinSpecFile& spec) {
  ValidationReport rep;
  if (spec.kind == "oqw1d")
    rep = validate_coin(to_coin_1d(spec));
  else if (spec.kind == "oqw2d")
    rep = validate_coin(to_coin_2d(spec));
  else
    rep = validate_coin(to_coin_ct(spec));
  if (!rep.ok) {
    std::string what = "coin fails validation (deficiency " + sig12(rep.deficiency) + ")";
    for (const std::string& m : rep.messages) what += "\n  " + m;
    throw std::runtime_error(what);  // numeric invalidity -> exit 1
  }
}

ojson verdict_json(const Verdict& v) {
  ojson out;
  out["kind"] = to_string(v.kind);
  out["criterion"] = v.criterion;
  ojson encs = ojson::array();
  for (const EnclosureReport& e : v.enclosures) {
    ojson je;
    je["rank"] = e.rank;
    ojson m = ojson::array();
    for (double c : e.m) m.push_back(round12(c));
    je["m"] = std::move(m);
    je["recurrent"] = e.recurrent;
    encs.push_back(std::move(je));
  }
  out["enclosures"] = std::move(encs);
  const CMat W = projector_isometry(v.transient_projector);
  out["transient_rank"] = static_cast<long>(W.cols());
  ojson basis = ojson::array();
  for (Eigen::Index j = 0; j < W.cols(); ++j) {
    ojson col = ojson::array();
    for (Eigen::Index i = 0; i < W.rows(); ++i)
      col.push_back(ojson::array({round12(W(i, j).real()), round12(W(i, j).imag())}));
    basis.push_back(std::move(col));
  }
  out["transient_basis"] = std::move(basis);
  return out;
}

void print_verdict_text(const Verdict& v) {
  std::cout << "kind: " << to_string(v.kind) << "\n";
  std::cout << "criterion: " << v.criterion << "\n";
  std::cout << "enclosures (" << v.enclosures.size() << "):\n";
  for (const EnclosureReport& e : v.enclosures) {
    std::cout << "  #" << e.label << "  rank " << e.rank << "  "
              << (e.recurrent ? "recurrent" : "transient") << "  m = (";
    for (std::size_t i = 0; i < e.m.size(); ++i)
      std::cout << (i ? ", " : "") << sig12(e.m[i]);
    std::cout << ")\n";
  }
  const CMat W = projector_isometry(v.transient_projector);
  std::cout << "transient rank: " << W.cols() << "\n";
  if (W.cols() > 0) {
    std::cout << "transient basis (columns):\n";
    for (Eigen::Index j = 0; j < W.cols(); ++j) {
      std::cout << "  [";
      for (Eigen::Index i = 0; i < W.rows(); ++i)
        std::cout << (i ? ", " : "") << fmt_complex(W(i, j));
      std::cout << "]\n";
    }
  }
}

int cmd_classify(const std::string& path, double tolerance, bool tol_set, bool as_json) {
  const CoinSpecFile spec = load_coin_file(path);
  require_valid(spec);
  NumericPolicy pol = default_policy();
  if (tol_set) pol.drift_zero = tolerance;
  const Verdict v = classify_spec(spec, pol);
  if (as_json)
    std::cout << verdict_json(v).dump(2) << "\n";
  else
    print_verdict_text(v);
  return kOk;
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateOpts {
  std::string path;
  long steps = 0;
  double tmax = 0.0;
  std::size_t trajectories = 200;
  std::uint64_t seed = 0;
  bool exact = false;
  std::string csv;
};

std::ofstream open_csv(const std::string& path) {
  std::ofstream out(path, std::ios::binary);  // binary: byte-identical across runs
  if (!out) throw StructuralError("cannot open CSV output file: " + path);
  return out;
}

void write_return_csv(std::ostream& out, const std::vector<double>& S) {
  out << "k,p00,S\n";
  double prev = 0.0;
  for (std::size_t k = 0; k < S.size(); ++k) {
    const double p00 = S[k] - prev;
    prev = S[k];
    out << k << "," << sig12(p00) << "," << sig12(S[k]) << "\n";
  }
}

void write_trajectory_csv(std::ostream& out, const std::vector<Trajectory>& trajs, bool planar) {
  out << (planar ? "traj,t,x1,x2\n" : "traj,t,x1\n");
  for (std::size_t i = 0; i < trajs.size(); ++i) {
    const Trajectory& tr = trajs[i];
    for (std::size_t k = 0; k < tr.positions.size(); ++k) {
      out << i << ",";
      if (tr.times.empty())
        out << k;
      else
        out << sig12(tr.times[k]);
      out << "," << tr.positions[k][0];
      if (planar) out << "," << tr.positions[k][1];
      out << "\n";
    }
  }
}

void print_stats(const EnsembleStats& st, bool planar) {
  std::cout << "trajectories: " << st.count << "\n";
  std::cout << "horizon: " << sig12(st.horizon) << "\n";
  std::cout << "drift: " << sig12(st.drift[0]);
  if (planar) std::cout << ", " << sig12(st.drift[1]);
  std::cout << "\n";
  std::cout << "drift 95% ci: +/- " << sig12(st.ci95[0]);
  if (planar) std::cout << ", +/- " << sig12(st.ci95[1]);
  std::cout << "\n";
  std::cout << "mean returns to origin: " << sig12(st.mean_returns) << "\n";
  if (st.mean_time_at_origin > 0.0)
    std::cout << "mean time at origin: " << sig12(st.mean_time_at_origin) << "\n";
}

int cmd_simulate(const SimulateOpts& o) {
  const CoinSpecFile spec = load_coin_file(o.path);
  require_valid(spec);
  const bool ct = spec.kind == "ctoqw2d";
  if (ct && o.steps > 0)
    throw StructuralError("continuous-time coins take --tmax, not --steps");
  if (!ct && o.tmax > 0.0)
    throw StructuralError("discrete coins take --steps, not --tmax");
  if (!ct && o.steps <= 0) throw StructuralError("simulate needs a positive --steps");
  if (ct && o.tmax <= 0.0) throw StructuralError("simulate needs a positive --tmax");
  if (ct && o.exact)
    throw StructuralError(
        "--exact covers discrete coins only; continuous-time runs use trajectories");

  const int threads = thread_count();
  const CMat rho0 = CMat::Identity(spec.dimension, spec.dimension) /
                    static_cast<double>(spec.dimension);

  std::ofstream csv;
  const bool want_csv = !o.csv.empty();
  if (want_csv) csv = open_csv(o.csv);

  if (o.exact) {
    std::vector<double> S;
    if (spec.kind == "oqw1d")
      S = return_mass_partial_sum(to_coin_1d(spec), rho0, o.steps);
    else
      S = return_mass_partial_sum(to_coin_2d(spec), rho0, o.steps);
    std::cout << "exact return-mass partial sums from the maximally mixed state\n";
    std::cout << "steps: " << o.steps << "\n";
    std::cout << "S(" << o.steps << ") = " << sig12(S.back()) << "\n";
    if (S.size() >= 2)
      std::cout << "p00(" << o.steps << ") = " << sig12(S.back() - S[S.size() - 2]) << "\n";
    if (want_csv) write_return_csv(csv, S);
    return kOk;
  }

  if (o.trajectories == 0) throw StructuralError("simulate needs a positive --trajectories");
  std::vector<Trajectory> trajs;
  bool planar = true;
  double horizon = o.tmax;
  if (spec.kind == "oqw1d") {
    trajs = simulate_ensemble(to_coin_1d(spec), rho0, o.steps, o.trajectories, o.seed, threads);
    planar = false;
    horizon = static_cast<double>(o.steps);
  } else if (spec.kind == "oqw2d") {
    trajs = simulate_ensemble(to_coin_2d(spec), rho0, o.steps, o.trajectories, o.seed, threads);
    horizon = static_cast<double>(o.steps);
  } else {
    trajs = simulate_ensemble_ct(to_coin_ct(spec), rho0, o.tmax, o.trajectories, o.seed, threads);
  }
  const EnsembleStats st = empirical_stats(trajs, horizon);
  std::cout << "seed: " << o.seed << "\n";
  print_stats(st, planar);
  if (want_csv) write_trajectory_csv(csv, trajs, planar);
  return kOk;
}

// ---------------------------------------------------------------------------
// reproduce

int cmd_reproduce(const std::string& selector) {
  std::vector<const RegistryCase*> cases;
  if (selector == "all") {
    for (const RegistryCase& c : registry()) cases.push_back(&c);
  } else {
    cases = registry_find(selector);
    if (cases.empty()) throw StructuralError("unknown example id: " + selector);
  }

  std::vector<std::string> ids;          // distinct ids in registry order
  std::map<std::string, bool> id_pass;   // id -> all sub-cases pass
  for (const RegistryCase* c : cases)
    if (!id_pass.count(c->id)) {
      ids.push_back(c->id);
      id_pass[c->id] = true;
    }

  std::printf("%-10s %-11s %-10s %-10s %s\n", "id", "variant", "expected", "got", "result");
  for (const RegistryCase* c : cases) {
    std::string got;
    bool pass = false;
    try {
      const Verdict v = classify_case(*c);
      got = to_string(v.kind);
      pass = v.kind == c->expected;
      if (pass && c->expected_transient)
        pass = frob(v.transient_projector - *c->expected_transient) <= 1e-8;
    } catch (const std::exception& e) {
      got = std::string("error: ") + e.what();
    }
    if (!pass) id_pass[c->id] = false;
    std::printf("%-10s %-11s %-10s %-10s %s\n", c->id.c_str(),
                c->variant.empty() ? "-" : c->variant.c_str(), to_string(c->expected),
                got.c_str(), pass ? "PASS" : "FAIL");
  }
  std::size_t ok = 0;
  for (const std::string& id : ids) ok += id_pass[id] ? 1 : 0;
  std::printf("%zu/%zu ids pass\n", ok, ids.size());
  return ok == ids.size() ? kOk : kNumeric;
}

// ---------------------------------------------------------------------------

template <typename F>
int run_guarded(F&& f) {
  try {
    return f();
  } catch (const StructuralError& e) {
    std::cerr << "structural error: " << e.what() << "\n";
    return kStructural;
  } catch (const NoCriterionError& e) {
    std::cerr << "no applicable criterion: " << e.what() << "\n";
    return kNoCriterion;
  } catch (const BudgetError& e) {
    std::cerr << "budget exceeded: " << e.what() << "\n";
    return kBudget;
  } catch (const std::exception& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return kNumeric;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"open quantum walk classification and simulation toolkit"};
  app.require_subcommand(1);

  std::string v_path;
  CLI::App* validate = app.add_subcommand("validate", "check a coin file's defining identities");
  validate->add_option("path", v_path, "coin JSON file")->required();

  std::string c_path;
  double c_tol = 0.0;
  bool c_json = false;
  CLI::App* classify = app.add_subcommand("classify", "classify a coin as recurrent/transient");
  classify->add_option("path", c_path, "coin JSON file")->required();
  CLI::Option* tol_opt =
      classify->add_option("--tolerance", c_tol, "override the zero-drift verdict tolerance");
  classify->add_flag("--json", c_json, "emit the verdict as JSON");

  SimulateOpts s;
  CLI::App* simulate = app.add_subcommand("simulate", "run exact or Monte Carlo evolutions");
  simulate->add_option("path", s.path, "coin JSON file")->required();
  simulate->add_option("--steps", s.steps, "horizon in steps (discrete coins)");
  simulate->add_option("--tmax", s.tmax, "horizon in time (continuous-time coins)");
  simulate->add_option("--trajectories", s.trajectories, "number of Monte Carlo trajectories");
  simulate->add_option("--seed", s.seed, "master seed for the trajectory streams");
  simulate->add_flag("--exact", s.exact, "exact evolution: emit return-mass partial sums");
  simulate->add_option("--csv", s.csv, "write CSV output to this file");

  std::string r_id;
  CLI::App* reproduce = app.add_subcommand("reproduce", "re-check the built-in example registry");
  reproduce->add_option("id", r_id, "example id or \"all\"")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kStructural;
  }

  if (validate->parsed()) return run_guarded([&] { return cmd_validate(v_path); });
  if (classify->parsed())
    return run_guarded([&] { return cmd_classify(c_path, c_tol, tol_opt->count() > 0, c_json); });
  if (simulate->parsed()) return run_guarded([&] { return cmd_simulate(s); });
  return run_guarded([&] { return cmd_reproduce(r_id); });
}
