#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <filesystem>

#include "roughspde/config.hpp"
#include "roughspde/fourier.hpp"
#include "roughspde/harness.hpp"
#include "roughspde/norms.hpp"
#include "roughspde/rough.hpp"
#include "roughspde/scheme.hpp"

namespace py = pybind11;
using namespace roughspde;

namespace {

using Samples = py::array_t<double, py::array::c_style | py::array::forcecast>;

std::span<const double> view(const Samples& a) {
  if (a.ndim() != 1) throw std::invalid_argument("expected a one-dimensional array");
  return {a.data(), static_cast<size_t>(a.size())};
}

bool is_file(const std::string& s) {
  std::error_code ec;
  return std::filesystem::is_regular_file(s, ec);
}

nlohmann::json parse_text(const std::string& s) {
  try {
    return nlohmann::json::parse(s);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(e.what());
  }
}

// builtin name, JSON text, or a path to a JSON file
SchemeSpec scheme_arg(const std::string& s) {
  if (is_file(s)) return load_scheme(s);
  auto t = s.find_first_not_of(" \t\n");
  if (t != std::string::npos && s[t] == '{') return scheme_from_json(parse_text(s));
  return builtin_scheme(s);
}

ExperimentConfig experiment_arg(const std::string& s) {
  if (is_file(s)) return load_experiment(s);
  return experiment_from_json(parse_text(s));
}

py::dict record_dict(const RunRecord& r) {
  py::dict d;
  d["seed"] = r.seed;
  d["epsilon"] = r.epsilon;
  d["sup_error"] = r.sup_error;
  d["holder_error"] = r.holder_error;
  d["stopping_time"] = r.stopping_time;
  d["d_eps_X"] = r.d_eps_X;
  d["d_eps_RP"] = r.d_eps_RP;
  d["t_wall"] = r.t_wall;
  return d;
}

py::dict rate_dict(const RateEstimate& e) {
  py::dict d;
  d["slope"] = e.slope;
  d["intercept"] = e.intercept;
  d["r_squared"] = e.r_squared;
  py::list levels;
  for (const auto& l : e.levels) {
    py::dict x;
    x["epsilon"] = l.epsilon;
    x["median"] = l.median;
    x["q25"] = l.q25;
    x["q75"] = l.q75;
    x["count"] = l.count;
    levels.append(x);
  }
  d["levels"] = levels;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Multiplier schemes, rough paths and convergence studies for SPDEs on the circle";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<QuadratureError>(m, "QuadratureError", PyExc_ArithmeticError);
  py::register_exception<DegenerateStudyError>(m, "DegenerateStudyError", PyExc_RuntimeError);

  m.def("builtin_scheme_names", &builtin_scheme_names);

  m.def(
      "validate_scheme",
      [](const std::string& scheme) {
        auto r = validate_scheme(scheme_arg(scheme));
        py::dict clauses;
        for (const auto& c : r.clauses) clauses[py::str(c.clause)] = py::make_tuple(c.pass, c.measured, c.tolerance);
        py::dict d;
        d["ok"] = r.ok();
        d["clauses"] = clauses;
        d["bv_estimate"] = r.bv_estimate;
        d["text"] = r.to_text();
        return d;
      },
      py::arg("scheme"), "Check a scheme (builtin name, JSON text or file) against the admissibility clauses.");

  m.def(
      "compute_lambda",
      [](const std::string& scheme, double nu, double sigma) {
        auto r = compute_lambda(scheme_arg(scheme), nu, sigma);
        return py::make_tuple(r.value, r.error_estimate);
      },
      py::arg("scheme"), py::arg("nu") = 1.0, py::arg("sigma") = 1.0, "Correction constant and its error estimate.");

  m.def(
      "transform",
      [](const Samples& a) {
        auto s = view(a);
        auto u = transform(s, CircleGrid(static_cast<int>(s.size())));
        py::array_t<cplx> out(u.half());
        for (int k = 0; k < u.half(); ++k) out.mutable_at(k) = u.at(0, k);
        return out;
      },
      py::arg("samples"), "Coefficients u^(k), k = 0..N/2, of samples at x_j = -pi + 2 pi j / N.");

  m.def(
      "holder_seminorm", [](const Samples& a, double alpha) { return holder_seminorm(view(a), alpha); },
      py::arg("samples"), py::arg("alpha"));

  m.def(
      "besov_norm",
      [](const Samples& a, double alpha) {
        auto s = view(a);
        return besov_norm(transform(s, CircleGrid(static_cast<int>(s.size()))), alpha);
      },
      py::arg("samples"), py::arg("alpha"), "sup_n 2^{n alpha} |Delta_n u|_inf of periodic samples.");

  m.def(
      "shuffle",
      [](const std::vector<int>& w, const std::vector<int>& v) {
        py::dict out;
        for (const auto& [word, c] : shuffle(Word(w), Word(v))) out[py::tuple(py::cast(word.letters))] = c;
        return out;
      },
      py::arg("w"), py::arg("v"), "Shuffle product of two words (0-based letters) with multiplicities.");

  m.def(
      "fit_rate",
      [](const std::vector<double>& eps, const std::vector<double>& err) {
        if (eps.size() != err.size()) throw std::invalid_argument("epsilon and error lengths differ");
        std::vector<std::pair<double, double>> pts;
        for (size_t i = 0; i < eps.size(); ++i) pts.push_back({eps[i], err[i]});
        return rate_dict(fit_rate(pts));
      },
      py::arg("epsilon"), py::arg("error"));

  m.def(
      "run_study",
      [](const std::string& config, int threads, std::optional<std::filesystem::path> out) {
        auto cfg = experiment_arg(config);
        StudyResult r;
        {
          py::gil_scoped_release release;
          r = run_convergence_study(cfg, threads);
          if (out) emit_results(r, *out);
        }
        py::dict d;
        py::list recs;
        for (const auto& x : r.records) recs.append(record_dict(x));
        d["records"] = recs;
        d["estimate"] = rate_dict(r.estimate);
        d["lambda"] = r.lambda;
        d["config_hash"] = r.config_hash;
        if (r.ablation_estimate) d["ablation_estimate"] = rate_dict(*r.ablation_estimate);
        return d;
      },
      py::arg("config"), py::arg("threads") = 0, py::arg("out") = py::none(),
      "Run a convergence study from a JSON file or JSON text.");
}
