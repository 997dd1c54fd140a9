#pragma once
// JSON loaders for schemes, problems and experiment configurations.
//
// Scheme: a builtin name, or {"name", "m", "h", "mu": [[y, c], ...], "c_m",
//   "breakpoints", "exact_derivative"}, where m and h are expressions in x or
//   one of "@one", "@fd" (sinc^2(x/2) on |x| <= pi, +inf beyond) and
//   "@cutoff" (indicator of |x| <= pi).  {"builtin": name} also works.
// Problem: "burgers", "linear", or {"n", "nu", "sigma", "F", "G", "initial"}.
// Experiment: {"problem", "scheme", "epsilon_levels" | "levels" (dyadic
//   exponents), "seeds" | "n_seeds" (+ "seed_start"), and optional
//   T, K, alpha, p, dt_factor, n_out, reference_factor, lambda, ablation,
//   diagnostics, reference_check, timing}.

#include <filesystem>
#include <string>

#include <json.hpp>

#include "roughspde/harness.hpp"
#include "roughspde/scheme.hpp"
#include "roughspde/solver.hpp"

namespace roughspde {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

SchemeSpec scheme_from_json(const nlohmann::json& j);
ProblemSpec problem_from_json(const nlohmann::json& j, std::string* name = nullptr);
ExperimentConfig experiment_from_json(const nlohmann::json& j);

// file contents as JSON; error messages carry the path
nlohmann::json read_json_file(const std::filesystem::path& path);
SchemeSpec load_scheme(const std::filesystem::path& path);
ProblemSpec load_problem(const std::filesystem::path& path);
ExperimentConfig load_experiment(const std::filesystem::path& path);

}  // namespace roughspde
