#pragma once
// Coupled multi-resolution convergence studies: one reference trajectory of
// the corrected limit and one approximate trajectory per epsilon level, all
// driven by the same mode noise, compared at common output times.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "roughspde/scheme.hpp"
#include "roughspde/solver.hpp"

namespace roughspde {

struct ExperimentConfig {
  std::string problem_name = "burgers";
  ProblemSpec problem = ProblemSpec::burgers();
  SchemeSpec scheme = builtin_scheme("fd_forward");
  std::vector<double> epsilon_levels;  // strictly decreasing
  std::vector<uint64_t> seeds;
  double T = 0.25;
  double K = 10.0;
  double alpha = 0.1;      // report regularity; the rough diagnostics use 1/2 - alpha
  int p = 2;               // lift level of the rough diagnostics
  double dt_factor = 0.25; // dt = dt_factor * eps_min^2
  int n_out = 20;          // output times, evenly spaced in (0, T]
  // reference resolution: eps_ref = eps_min / reference_factor
  double reference_factor = 4.0;
  std::optional<double> lambda;  // reference correction; computed from the scheme if unset
  bool ablation = true;          // also run the reference with lambda = 0
  bool diagnostics = true;       // d_eps_X and d_eps_RP at the final output time
  bool reference_check = false;  // resolution-doubling check of the reference
  bool timing = false;           // fill t_wall (breaks byte-identical output)

  void validate() const;
  int grid_points(double epsilon) const;  // even(ceil(2 pi / epsilon))
  double epsilon_ref() const;
  double dt() const;
  int steps() const;
  std::string canonical_json() const;
  uint64_t hash() const;
};

struct RunRecord {
  uint64_t seed = 0;
  double epsilon = 0.0;
  double sup_error = 0.0;
  double holder_error = 0.0;
  double stopping_time = 0.0;
  double d_eps_X = 0.0;
  double d_eps_RP = 0.0;
  double t_wall = 0.0;
};

struct LevelAggregate {
  double epsilon = 0.0;
  double median = 0.0, q25 = 0.0, q75 = 0.0;
  int count = 0;
};

struct RateEstimate {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  std::vector<LevelAggregate> levels;
};

struct DegenerateStudyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct StudyResult {
  std::vector<RunRecord> records;           // ordered by (seed, level)
  std::vector<RunRecord> ablation_records;  // same order, reference with lambda = 0
  RateEstimate estimate;
  std::optional<RateEstimate> ablation_estimate;
  double lambda = 0.0;
  // median over seeds of sup |u_ref(N) - u_ref(2N)|, when requested
  std::optional<double> reference_self_error;
  double monotone_fraction = 0.0;  // adjacent level pairs with non-increasing error, over seeds
  int stopped_seeds = 0;           // seeds whose usable horizon ended before T
  bool degenerate = false;
  uint64_t config_hash = 0;
};

// least squares of log(error) on log(epsilon)
RateEstimate fit_rate(const std::vector<std::pair<double, double>>& pairs);
// per-level median and quartiles, levels in decreasing epsilon
std::vector<LevelAggregate> aggregate_levels(const std::vector<RunRecord>& records);
// linear-interpolation quantile of unsorted data
double quantile(std::vector<double> v, double q);

// one seed: records for every level (and the ablation, if configured)
struct SeedOutcome {
  std::vector<RunRecord> records, ablation;
  std::optional<double> reference_self_error;
  double horizon = 0.0;
};
SeedOutcome run_seed(const ExperimentConfig& cfg, uint64_t seed, double lambda);

// threads <= 0: ROUGHSPDE_THREADS, else the hardware count
StudyResult run_convergence_study(const ExperimentConfig& cfg, int threads = 0);
int default_thread_count();

void write_records_csv(const std::vector<RunRecord>& records, const std::filesystem::path& path);
// records.csv, summary.txt and levels.csv (plus ablation files when present)
void emit_results(const StudyResult& result, const std::filesystem::path& dir);

}  // namespace roughspde
