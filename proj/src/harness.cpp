#include "roughspde/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <set>
#include <thread>

#include <json.hpp>

#include "roughspde/gaussian_field.hpp"
#include "roughspde/norms.hpp"
#include "roughspde/rough.hpp"

namespace roughspde {

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

uint64_t fnv1a(const std::string& s) {
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (epsilon_levels.empty()) throw std::invalid_argument("at least one epsilon level is required");
  for (size_t i = 0; i < epsilon_levels.size(); ++i) {
    if (!(epsilon_levels[i] > 0)) throw std::invalid_argument("epsilon levels must be positive");
    if (i && !(epsilon_levels[i] < epsilon_levels[i - 1]))
      throw std::invalid_argument("epsilon levels must be strictly decreasing");
  }
  if (seeds.empty()) throw std::invalid_argument("at least one seed is required");
  if (!(T > 0)) throw std::invalid_argument("T must be positive");
  if (!(K > 0)) throw std::invalid_argument("K must be positive");
  if (!(alpha > 0 && alpha < 0.5)) throw std::invalid_argument("alpha must lie in (0, 1/2)");
  if (p < 1) throw std::invalid_argument("p must be >= 1");
  if (!(dt_factor > 0)) throw std::invalid_argument("dt_factor must be positive");
  if (n_out < 1) throw std::invalid_argument("n_out must be >= 1");
  if (!(reference_factor >= 1)) throw std::invalid_argument("reference_factor must be >= 1");
}

int ExperimentConfig::grid_points(double epsilon) const { return CircleGrid::for_epsilon(epsilon); }

double ExperimentConfig::epsilon_ref() const { return epsilon_levels.back() / reference_factor; }

double ExperimentConfig::dt() const {
  double e = epsilon_levels.back();
  double dt = dt_factor * e * e;
  // land exactly on T
  return T / std::ceil(T / dt - 1e-9);
}

int ExperimentConfig::steps() const { return static_cast<int>(std::llround(T / dt())); }

std::string ExperimentConfig::canonical_json() const {
  nlohmann::json j;
  j["problem"] = {{"name", problem_name}, {"n", problem.n}, {"nu", num(problem.nu)}, {"sigma", num(problem.sigma)},
                  {"sources", problem.sources}};
  nlohmann::json atoms = nlohmann::json::array();
  for (const auto& a : scheme.mu.atoms) atoms.push_back({num(a.y), num(a.c)});
  j["scheme"] = {{"name", scheme.name}, {"m", scheme.m_src}, {"h", scheme.h_src}, {"mu", atoms},
                 {"c_m", num(scheme.c_m)}, {"exact_derivative", scheme.exact_derivative}};
  std::vector<std::string> eps;
  for (double e : epsilon_levels) eps.push_back(num(e));
  j["epsilon_levels"] = eps;
  j["seeds"] = seeds;
  j["T"] = num(T);
  j["K"] = num(K);
  j["alpha"] = num(alpha);
  j["p"] = p;
  j["dt_factor"] = num(dt_factor);
  j["n_out"] = n_out;
  j["reference_factor"] = num(reference_factor);
  j["lambda"] = lambda ? nlohmann::json(num(*lambda)) : nlohmann::json(nullptr);
  j["ablation"] = ablation;
  j["diagnostics"] = diagnostics;
  j["reference_check"] = reference_check;
  j["timing"] = timing;
  return j.dump();
}

uint64_t ExperimentConfig::hash() const { return fnv1a(canonical_json()); }

double quantile(std::vector<double> v, double q) {
  if (v.empty()) throw std::invalid_argument("quantile of empty data");
  std::sort(v.begin(), v.end());
  double pos = q * (v.size() - 1);
  size_t lo = static_cast<size_t>(std::floor(pos));
  size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - lo) * (v[hi] - v[lo]);
}

RateEstimate fit_rate(const std::vector<std::pair<double, double>>& pairs) {
  if (pairs.size() < 3) throw std::invalid_argument("fit_rate needs at least 3 (epsilon, error) pairs");
  double sx = 0, sy = 0;
  for (auto [e, r] : pairs) {
    if (!(e > 0) || !(r > 0)) throw std::invalid_argument("fit_rate needs positive epsilon and error values");
    sx += std::log(e);
    sy += std::log(r);
  }
  const double n = pairs.size(), mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (auto [e, r] : pairs) {
    double dx = std::log(e) - mx, dy = std::log(r) - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx == 0) throw std::invalid_argument("fit_rate needs distinct epsilon values");
  RateEstimate est;
  est.slope = sxy / sxx;
  est.intercept = my - est.slope * mx;
  est.r_squared = syy == 0 ? 1.0 : sxy * sxy / (sxx * syy);
  return est;
}

std::vector<LevelAggregate> aggregate_levels(const std::vector<RunRecord>& records) {
  std::vector<double> eps;
  for (const auto& r : records)
    if (std::find(eps.begin(), eps.end(), r.epsilon) == eps.end()) eps.push_back(r.epsilon);
  std::sort(eps.begin(), eps.end(), std::greater<>());
  std::vector<LevelAggregate> out;
  for (double e : eps) {
    std::vector<double> v;
    for (const auto& r : records)
      if (r.epsilon == e) v.push_back(r.sup_error);
    out.push_back({e, quantile(v, 0.5), quantile(v, 0.25), quantile(v, 0.75), static_cast<int>(v.size())});
  }
  return out;
}

namespace {

// trajectory bookkeeping inside one seed
struct Track {
  TrajectoryState s;
  double lambda = 0.0;  // corrected-limit drift (reference tracks only)
  bool reference = false;
  StoppingMonitor mon;
  bool stopped = false;
  double wall = 0.0;
  std::vector<std::vector<double>> outputs;  // samples on the comparison grid per output time
};

std::vector<double> on_grid(const SpectralField& u, int n_points) {
  return inverse_transform(u.n_points() == n_points ? u : resample(u, n_points));
}

double sup_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0;
  for (size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

}  // namespace

SeedOutcome run_seed(const ExperimentConfig& cfg, uint64_t seed, double lambda) {
  const int L = static_cast<int>(cfg.epsilon_levels.size());
  const double eps_ref = cfg.epsilon_ref();
  const int n_ref = cfg.grid_points(eps_ref);
  const int n_check = 2 * n_ref;
  const double dt = cfg.dt();
  const int steps = cfg.steps();
  const int n = cfg.problem.n;

  // channel 0: exact reference; 1..L: scheme levels; optional doubled reference
  std::vector<ChannelSpec> ch;
  ch.push_back({nullptr, eps_ref, n_ref / 2 - 1});
  for (double e : cfg.epsilon_levels) ch.push_back({&cfg.scheme, e, cfg.grid_points(e) / 2 - 1});
  const int check_channel = cfg.reference_check ? static_cast<int>(ch.size()) : -1;
  if (cfg.reference_check) ch.push_back({nullptr, eps_ref / 2, n_check / 2 - 1});
  CoupledGaussianState noise(ch, n, seed, cfg.problem.nu, cfg.problem.sigma);

  std::vector<Track> tracks;
  auto add = [&](int n_points, const SchemeSpec* scheme, double eps, int channel, bool ref, double lam) {
    Track t;
    t.s = make_trajectory(cfg.problem, n_points, scheme, eps, dt, channel);
    t.reference = ref;
    t.lambda = lam;
    t.mon.K = cfg.K;
    tracks.push_back(std::move(t));
  };
  add(n_ref, nullptr, eps_ref, 0, true, lambda);
  for (int l = 0; l < L; ++l)
    add(cfg.grid_points(cfg.epsilon_levels[l]), &cfg.scheme, cfg.epsilon_levels[l], l + 1, false, 0.0);
  const int abl = cfg.ablation ? static_cast<int>(tracks.size()) : -1;
  if (cfg.ablation) add(n_ref, nullptr, eps_ref, 0, true, 0.0);
  const int chk = cfg.reference_check ? static_cast<int>(tracks.size()) : -1;
  if (cfg.reference_check) add(n_check, nullptr, eps_ref / 2, check_channel, true, lambda);

  // output step indices, including t = 0
  std::vector<int> out_steps;
  for (int o = 0; o <= cfg.n_out; ++o) out_steps.push_back(static_cast<int>(std::llround(double(o) * steps / cfg.n_out)));
  out_steps.erase(std::unique(out_steps.begin(), out_steps.end()), out_steps.end());
  std::vector<double> out_times;

  auto record_outputs = [&](double t) {
    out_times.push_back(t);
    for (auto& tr : tracks) {
      if (tr.stopped) {
        tr.outputs.emplace_back();
        continue;
      }
      auto v = on_grid(tr.s.u, n_ref);
      double sup = sup_norm(v);
      // the comparison grid can see a crossing the dealiasing grid missed
      if (tr.mon.observe(t, sup)) tr.stopped = true;
      tr.outputs.push_back(std::move(v));
    }
  };

  size_t next_out = 0;
  for (int step = 0; step <= steps; ++step) {
    if (next_out < out_steps.size() && out_steps[next_out] == step) {
      record_outputs(step * dt);
      ++next_out;
    }
    if (step == steps) break;
    bool any = false;
    for (auto& tr : tracks) any = any || !tr.stopped;
    if (!any) break;
    noise.evolve(dt);
    for (auto& tr : tracks) {
      if (tr.stopped) continue;
      auto t0 = cfg.timing ? std::chrono::steady_clock::now() : std::chrono::steady_clock::time_point{};
      try {
        if (tr.reference) step_corrected_limit(tr.s, cfg.problem, tr.lambda, noise);
        else step_approximate(tr.s, cfg.problem, noise);
        if (tr.mon.observe(tr.s.sup_time, tr.s.sup_norm)) tr.stopped = true;
      } catch (const BlowUpError& e) {
        tr.mon.observe(e.time, INFINITY);
        tr.stopped = true;
      }
      if (cfg.timing) tr.wall += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
    // keep the time grid exact
    for (auto& tr : tracks) tr.s.t = (step + 1) * dt;
  }

  auto stop_of = [&](const Track& tr) { return tr.mon.triggered_at ? std::min(*tr.mon.triggered_at, cfg.T) : cfg.T; };

  // diagnostics on the final noise state
  std::vector<double> dX(L, 0.0), dRP(L, 0.0);
  if (cfg.diagnostics) {
    auto xref = inverse_transform(assemble_channel(noise, 0, n_ref));
    auto rp_ref = GridRoughPath::from_field(xref, n, cfg.p);
    for (int l = 0; l < L; ++l) {
      auto xe = inverse_transform(assemble_channel(noise, l + 1, n_ref));
      dX[l] = sup_diff(xref, xe);
      auto rp = GridRoughPath::from_field(xe, n, cfg.p);
      dRP[l] = rough_distance_dyadic(rp_ref, rp, 0.5 - cfg.alpha);
    }
  }

  auto compare = [&](const Track& ref, std::vector<RunRecord>& out, double& horizon) {
    double tau_ref = stop_of(ref);
    horizon = tau_ref;
    for (int l = 0; l < L; ++l) {
      const Track& tr = tracks[1 + l];
      RunRecord r;
      r.seed = seed;
      r.epsilon = cfg.epsilon_levels[l];
      r.stopping_time = std::min(tau_ref, stop_of(tr));
      for (size_t o = 0; o < out_times.size(); ++o) {
        if (out_times[o] > r.stopping_time + 1e-12) break;
        const auto& a = ref.outputs[o];
        const auto& b = tr.outputs[o];
        if (a.empty() || b.empty()) break;
        std::vector<double> d(a.size());
        for (int comp = 0; comp < n; ++comp) {
          for (int j = 0; j < n_ref; ++j) d[j] = a[comp * n_ref + j] - b[comp * n_ref + j];
          std::span<const double> dc(d.data(), n_ref);
          r.sup_error = std::max(r.sup_error, sup_norm(dc));
          r.holder_error = std::max(r.holder_error, holder_seminorm(dc, cfg.alpha));
        }
      }
      r.d_eps_X = dX[l];
      r.d_eps_RP = dRP[l];
      r.t_wall = cfg.timing ? tr.wall + ref.wall : 0.0;
      out.push_back(r);
    }
  };

  SeedOutcome res;
  compare(tracks[0], res.records, res.horizon);
  if (abl >= 0) {
    double h;
    compare(tracks[abl], res.ablation, h);
  }
  if (chk >= 0) {
    double horizon = std::min(stop_of(tracks[0]), stop_of(tracks[chk]));
    double e = 0;
    for (size_t o = 0; o < out_times.size() && out_times[o] <= horizon + 1e-12; ++o) {
      if (tracks[0].outputs[o].empty() || tracks[chk].outputs[o].empty()) break;
      e = std::max(e, sup_diff(tracks[0].outputs[o], tracks[chk].outputs[o]));
    }
    res.reference_self_error = e;
  }
  return res;
}

int default_thread_count() {
  if (const char* env = std::getenv("ROUGHSPDE_THREADS")) {
    int t = std::atoi(env);
    if (t > 0) return t;
  }
  unsigned h = std::thread::hardware_concurrency();
  return h ? static_cast<int>(h) : 1;
}

StudyResult run_convergence_study(const ExperimentConfig& cfg, int threads) {
  cfg.validate();
  StudyResult res;
  res.config_hash = cfg.hash();
  res.lambda = cfg.lambda ? *cfg.lambda
                          : (cfg.scheme.exact_derivative ? 0.0
                                                         : compute_lambda(cfg.scheme, cfg.problem.nu, cfg.problem.sigma).value);
  if (threads <= 0) threads = default_thread_count();
  const size_t S = cfg.seeds.size();
  threads = static_cast<int>(std::min<size_t>(threads, S));

  std::vector<SeedOutcome> outcomes(S);
  std::atomic<size_t> next{0};
  std::exception_ptr failure;
  std::mutex fail_mu;
  auto worker = [&] {
    for (size_t i; (i = next.fetch_add(1)) < S;) {
      try {
        outcomes[i] = run_seed(cfg, cfg.seeds[i], res.lambda);
      } catch (...) {
        std::lock_guard<std::mutex> lock(fail_mu);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  int pairs = 0, monotone = 0;
  bool all_zero = true;
  for (const auto& o : outcomes) {
    res.records.insert(res.records.end(), o.records.begin(), o.records.end());
    res.ablation_records.insert(res.ablation_records.end(), o.ablation.begin(), o.ablation.end());
    if (o.horizon > 0) all_zero = false;
    if (o.horizon < cfg.T) ++res.stopped_seeds;
    for (size_t l = 1; l < o.records.size(); ++l, ++pairs)
      if (o.records[l].sup_error <= o.records[l - 1].sup_error) ++monotone;
  }
  res.monotone_fraction = pairs ? double(monotone) / pairs : 1.0;
  if (cfg.reference_check) {
    std::vector<double> v;
    for (const auto& o : outcomes) v.push_back(*o.reference_self_error);
    res.reference_self_error = quantile(v, 0.5);
  }

  auto estimate = [](const std::vector<RunRecord>& recs) {
    auto levels = aggregate_levels(recs);
    std::vector<std::pair<double, double>> pts;
    for (const auto& l : levels) pts.push_back({l.epsilon, l.median});
    RateEstimate est;
    try {
      est = fit_rate(pts);
    } catch (const std::invalid_argument&) {
      est.slope = est.intercept = est.r_squared = NAN;
    }
    est.levels = levels;
    return est;
  };
  res.estimate = estimate(res.records);
  if (cfg.ablation) res.ablation_estimate = estimate(res.ablation_records);
  if (all_zero) {
    res.degenerate = true;
    throw DegenerateStudyError("every seed stopped at t = 0 (K = " + num(cfg.K) + ")");
  }
  return res;
}

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  return f;
}

void check_written(std::ofstream& f, const std::filesystem::path& path) {
  f.flush();
  if (!f) throw std::runtime_error("write failed for '" + path.string() + "'");
}

void write_levels_csv(const std::vector<LevelAggregate>& levels, const std::filesystem::path& path) {
  auto f = open_out(path);
  f << "epsilon,median_error,q25,q75\n";
  for (const auto& l : levels) f << num(l.epsilon) << ',' << num(l.median) << ',' << num(l.q25) << ',' << num(l.q75) << '\n';
  check_written(f, path);
}

}  // namespace

void write_records_csv(const std::vector<RunRecord>& records, const std::filesystem::path& path) {
  auto f = open_out(path);
  f << "seed,epsilon,sup_error,holder_error,stopping_time,d_eps_X,d_eps_RP,t_wall\n";
  for (const auto& r : records)
    f << r.seed << ',' << num(r.epsilon) << ',' << num(r.sup_error) << ',' << num(r.holder_error) << ','
      << num(r.stopping_time) << ',' << num(r.d_eps_X) << ',' << num(r.d_eps_RP) << ',' << num(r.t_wall) << '\n';
  check_written(f, path);
}

void emit_results(const StudyResult& result, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create '" + dir.string() + "': " + ec.message());
  write_records_csv(result.records, dir / "records.csv");
  write_levels_csv(result.estimate.levels, dir / "levels.csv");

  std::set<uint64_t> seeds;
  for (const auto& r : result.records) seeds.insert(r.seed);
  const bool degenerate = result.degenerate || result.records.empty();
  auto path = dir / "summary.txt";
  auto f = open_out(path);
  char hash[20];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(result.config_hash));
  f << "slope=" << num(result.estimate.slope) << '\n'
    << "intercept=" << num(result.estimate.intercept) << '\n'
    << "r2=" << num(result.estimate.r_squared) << '\n'
    << "n_seeds=" << seeds.size() << '\n'
    << "n_levels=" << result.estimate.levels.size() << '\n'
    << "config_hash=" << hash << '\n'
    << "lambda=" << num(result.lambda) << '\n'
    << "degenerate=" << (degenerate ? "true" : "false") << '\n'
    << "monotone_fraction=" << num(result.monotone_fraction) << '\n'
    << "stopped_seeds=" << result.stopped_seeds << '\n';
  if (!result.estimate.levels.empty()) f << "finest_median=" << num(result.estimate.levels.back().median) << '\n';
  if (result.ablation_estimate) {
    f << "ablation_slope=" << num(result.ablation_estimate->slope) << '\n';
    if (!result.ablation_estimate->levels.empty())
      f << "ablation_finest_median=" << num(result.ablation_estimate->levels.back().median) << '\n';
  }
  if (result.reference_self_error) f << "reference_self_error=" << num(*result.reference_self_error) << '\n';
  check_written(f, path);

  if (result.ablation_estimate) {
    write_records_csv(result.ablation_records, dir / "ablation_records.csv");
    write_levels_csv(result.ablation_estimate->levels, dir / "ablation_levels.csv");
  }
}

}  // namespace roughspde
