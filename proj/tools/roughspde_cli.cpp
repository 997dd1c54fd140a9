// roughspde command line tool.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "roughspde/config.hpp"
#include "roughspde/gaussian_field.hpp"
#include "roughspde/harness.hpp"
#include "roughspde/norms.hpp"
#include "roughspde/rough.hpp"
#include "roughspde/scheme.hpp"
#include "roughspde/solver.hpp"

using namespace roughspde;

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

bool is_builtin_scheme(const std::string& s) {
  for (const auto& n : builtin_scheme_names())
    if (n == s) return true;
  return false;
}

// a path to a JSON file, or a builtin name when no such file exists
SchemeSpec scheme_arg(const std::string& s) {
  if (!std::filesystem::exists(s) && is_builtin_scheme(s)) return builtin_scheme(s);
  return load_scheme(s);
}

ProblemSpec problem_arg(const std::string& s) {
  if (!std::filesystem::exists(s) && (s == "burgers" || s == "linear")) return problem_from_json(s);
  return load_problem(s);
}

// numeric CSV; a leading non-numeric row is taken as a header
std::vector<std::vector<double>> read_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open '" + path + "'");
  std::vector<std::vector<double>> rows;
  std::string line;
  size_t lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    bool ok = true;
    while (std::getline(ss, cell, ',')) {
      try {
        size_t used;
        row.push_back(std::stod(cell, &used));
      } catch (const std::exception&) {
        ok = false;
        break;
      }
    }
    if (!ok) {
      if (rows.empty() && lineno == 1) continue;
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": non-numeric cell");
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": ragged row");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error(path + ": no data rows");
  return rows;
}

int cmd_validate(const std::string& file) {
  auto spec = scheme_arg(file);
  auto r = validate_scheme(spec);
  std::cout << r.to_text();
  for (const auto& c : r.clauses)
    std::cout << "clause." << c.clause << '=' << (c.pass ? "pass" : "fail") << " measured=" << num(c.measured) << '\n';
  std::cout << "bv_estimate=" << num(r.bv_estimate) << '\n'
            << "bv_suspicious=" << (r.bv_suspicious ? "true" : "false") << '\n'
            << "ok=" << (r.ok() ? "true" : "false") << '\n';
  return r.ok() ? 0 : 1;
}

int cmd_lambda(const std::string& file, double nu, double sigma, const QuadratureParams& q) {
  auto spec = scheme_arg(file);
  auto r = compute_lambda(spec, nu, sigma, q);
  std::cout << "lambda=" << num(r.value) << '\n'
            << "error_estimate=" << num(r.error_estimate) << '\n'
            << "tail=" << num(r.tail) << '\n';
  return 0;
}

int cmd_lift(const std::string& file, int level, bool periodic, double period) {
  auto rows = read_csv(file);
  const int n = static_cast<int>(rows.front().size()) - 1;
  if (n < 1) throw std::runtime_error("lift-path needs a parameter column and at least one component");
  std::vector<double> params, samples;
  for (const auto& r : rows) {
    params.push_back(r[0]);
    samples.insert(samples.end(), r.begin() + 1, r.end());
  }
  if (periodic && !(period > 0)) period = params.back() - params.front() + (params[1] - params[0]);
  GridRoughPath rp(params, samples, n, level, periodic, period);
  auto sig = rp.increment(0, rp.points() - 1);
  std::cout << "word,value\n";
  for (int L = 0; L <= level; ++L)
    for (const auto& w : words_of_length(n, L)) std::cout << w.str() << ',' << num(sig[w]) << '\n';
  std::cerr << "shuffle_defect=" << num(shuffle_defect(sig)) << '\n';
  return 0;
}

int cmd_simulate(const std::string& problem_file, const std::string& scheme_file, double eps, double dt, double T,
                 uint64_t seed, double K, int every, const std::string& out, const std::string& snap_dir) {
  auto problem = problem_arg(problem_file);
  auto scheme = scheme_arg(scheme_file);
  if (!(eps > 0) || !(T > 0)) throw std::invalid_argument("need --epsilon > 0 and --T > 0");
  if (!(dt > 0)) dt = 0.25 * eps * eps;
  const int steps = static_cast<int>(std::ceil(T / dt - 1e-9));
  dt = T / steps;
  const int N = CircleGrid::for_epsilon(eps);
  CoupledGaussianState noise({{scheme.exact_derivative ? nullptr : &scheme, eps, N / 2 - 1}}, problem.n, seed,
                             problem.nu, problem.sigma);
  auto traj = make_trajectory(problem, N, scheme.exact_derivative ? nullptr : &scheme, eps, dt, 0);
  if (every <= 0) every = std::max(1, steps / 200);

  std::ofstream file;
  if (!out.empty()) {
    file.open(out);
    if (!file) throw std::runtime_error("cannot open '" + out + "' for writing");
  }
  std::ostream& os = out.empty() ? std::cout : file;
  if (!snap_dir.empty()) std::filesystem::create_directories(snap_dir);

  StoppingMonitor mon;
  mon.K = K;
  os << "t,sup_norm,mean,energy\n";
  auto emit = [&](int step) {
    double sup = field_sup_norm(traj.u);
    double mean = 0, energy = 0;
    for (int c = 0; c < problem.n; ++c) {
      mean += traj.u.at(c, 0).real() / kSqrt2Pi / problem.n;
      energy += std::norm(traj.u.at(c, 0));
      for (int k = 1; k <= traj.u.kmax(); ++k) energy += 2 * std::norm(traj.u.at(c, k));
    }
    os << num(step * dt) << ',' << num(sup) << ',' << num(mean) << ',' << num(energy) << '\n';
    if (!snap_dir.empty()) {
      char name[64];
      std::snprintf(name, sizeof name, "snapshot_%08d.csv", step);
      std::ofstream s(std::filesystem::path(snap_dir) / name);
      auto v = inverse_transform(traj.u);
      CircleGrid g(N);
      s << "x";
      for (int c = 0; c < problem.n; ++c) s << ",u" << c + 1;
      s << '\n';
      for (int j = 0; j < N; ++j) {
        s << num(g.point(j));
        for (int c = 0; c < problem.n; ++c) s << ',' << num(v[c * N + j]);
        s << '\n';
      }
    }
    return mon.observe(step * dt, sup);
  };
  if (emit(0)) {
    std::cerr << "stopped at t=0 (sup norm >= K)\n";
    return 0;
  }
  for (int step = 1; step <= steps; ++step) {
    noise.evolve(dt);
    try {
      step_approximate(traj, problem, noise);
    } catch (const BlowUpError& e) {
      std::cerr << "blow-up at t=" << num(e.time) << ": " << e.what() << '\n';
      return 0;
    }
    traj.t = step * dt;
    if ((step % every == 0 || step == steps) && emit(step)) {
      std::cerr << "stopped at t=" << num(*mon.triggered_at) << " (sup norm >= K)\n";
      return 0;
    }
  }
  return 0;
}

int cmd_norms(const std::string& file, double alpha) {
  auto rows = read_csv(file);
  std::vector<double> u;
  for (const auto& r : rows) u.push_back(r.back());
  auto rep = holder_report(u, alpha);
  auto br = holder_bracket(u, alpha);
  std::cout << "alpha=" << num(rep.alpha) << '\n'
            << "holder_seminorm=" << num(rep.seminorm) << '\n'
            << "holder_lower=" << num(br.lower) << '\n'
            << "holder_upper=" << num(br.upper) << '\n'
            << "sup_norm=" << num(rep.sup_norm) << '\n'
            << "besov_norm=" << num(rep.besov_norm) << '\n'
            << "grid_resolution=" << rep.grid_resolution << '\n'
            << "resolved_blocks=" << rep.resolved_blocks << '\n';
  return 0;
}

int cmd_study(const std::string& file, const std::string& out, long long seed_offset, int threads) {
  auto cfg = load_experiment(file);
  for (auto& s : cfg.seeds) s += static_cast<uint64_t>(seed_offset);
  if (threads <= 0) threads = default_thread_count();
  std::cerr << "running " << cfg.seeds.size() << " seeds x " << cfg.epsilon_levels.size() << " levels on " << threads
            << " thread(s), " << cfg.steps() << " steps each\n";
  StudyResult res;
  try {
    res = run_convergence_study(cfg, threads);
  } catch (const DegenerateStudyError& e) {
    res.degenerate = true;
    res.config_hash = cfg.hash();
    emit_results(res, out);
    std::cerr << "degenerate study: " << e.what() << '\n';
    return 2;
  }
  emit_results(res, out);
  std::cout << "slope=" << num(res.estimate.slope) << '\n' << "r2=" << num(res.estimate.r_squared) << '\n';
  for (const auto& l : res.estimate.levels)
    std::cout << "epsilon=" << num(l.epsilon) << " median=" << num(l.median) << " q25=" << num(l.q25)
              << " q75=" << num(l.q75) << '\n';
  if (res.ablation_estimate && !res.ablation_estimate->levels.empty())
    std::cout << "ablation_finest_median=" << num(res.ablation_estimate->levels.back().median) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Scheme validation, rough-path lifts and convergence studies for singular SPDE approximations"};
  app.require_subcommand(1);

  std::string file, file2, out, snap_dir;
  double nu = 1.0, sigma = 1.0, eps = 0.0, dt = 0.0, T = 0.0, K = INFINITY, alpha = 0.4, period = 0.0;
  uint64_t seed = 0;
  long long seed_offset = 0;
  int level = 2, every = 0, threads = 0;
  bool periodic = false;
  QuadratureParams q;

  auto* v = app.add_subcommand("validate-scheme", "Check a scheme against its admissibility conditions");
  v->add_option("file", file, "scheme JSON file or builtin name")->required();

  auto* l = app.add_subcommand("compute-lambda", "Correction constant of a scheme");
  l->add_option("file", file, "scheme JSON file or builtin name")->required();
  l->add_option("--nu", nu, "viscosity")->capture_default_str();
  l->add_option("--sigma", sigma, "noise strength")->capture_default_str();
  l->add_option("--delta", q.delta, "Taylor cutoff near 0")->capture_default_str();
  l->add_option("--t-max", q.t_max, "quadrature cutoff")->capture_default_str();
  l->add_option("--tol", q.tol, "panel tolerance")->capture_default_str();

  auto* lp = app.add_subcommand("lift-path", "Signature of a piecewise-linear path from CSV (t, x1, ..., xn)");
  lp->add_option("csv", file, "input CSV")->required();
  lp->add_option("--level,-p", level, "truncation level")->capture_default_str();
  lp->add_flag("--periodic", periodic, "close the path");
  lp->add_option("--period", period, "period of a closed path (default: inferred)");

  auto* sim = app.add_subcommand("simulate", "Integrate the approximate equation and write a time series");
  sim->add_option("problem", file, "problem JSON file or builtin name (burgers, linear)")->required();
  sim->add_option("scheme", file2, "scheme JSON file or builtin name")->required();
  sim->add_option("--epsilon", eps, "scheme spacing")->required();
  sim->add_option("--dt", dt, "time step (default 0.25 eps^2)");
  sim->add_option("--T", T, "horizon")->required();
  sim->add_option("--seed", seed, "noise seed")->capture_default_str();
  sim->add_option("--K", K, "stopping threshold on the sup norm");
  sim->add_option("--every", every, "output every n steps (default: about 200 rows)");
  sim->add_option("--out", out, "CSV output (default stdout)");
  sim->add_option("--snapshots", snap_dir, "directory for field snapshots at output times");

  auto* nm = app.add_subcommand("norms", "Hoelder and Besov norms of a sampled periodic field");
  nm->add_option("csv", file, "CSV of samples on a uniform grid (last column is used)")->required();
  nm->add_option("--alpha", alpha, "regularity")->capture_default_str();

  auto* cs = app.add_subcommand("convergence-study", "Coupled multi-resolution convergence study");
  cs->add_option("config", file, "experiment JSON file")->required();
  cs->add_option("--out", out, "output directory")->required();
  cs->add_option("--seed-offset", seed_offset, "added to every seed, for sharding")->capture_default_str();
  cs->add_option("--threads", threads, "worker threads (default: ROUGHSPDE_THREADS or hardware)");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*v) return cmd_validate(file);
    if (*l) return cmd_lambda(file, nu, sigma, q);
    if (*lp) return cmd_lift(file, level, periodic, period);
    if (*sim) return cmd_simulate(file, file2, eps, dt, T, seed, K, every, out, snap_dir);
    if (*nm) return cmd_norms(file, alpha);
    if (*cs) return cmd_study(file, out, seed_offset, threads);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
