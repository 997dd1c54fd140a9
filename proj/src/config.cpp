#include "roughspde/config.hpp"

#include <cmath>
#include <fstream>
#include <memory>
#include <set>

#include "roughspde/expr.hpp"

namespace roughspde {

namespace {

using nlohmann::json;

double sinc_half_sq(double x) {
  double y = 0.5 * x;
  if (std::abs(y) < 1e-4) return 1.0 - y * y / 3.0;
  double s = std::sin(y) / y;
  return s * s;
}

std::function<double(double)> symbol_from(const std::string& src) {
  if (src == "@one") return [](double) { return 1.0; };
  if (src == "@fd") return [](double x) { return std::abs(x) <= kPi ? sinc_half_sq(x) : INFINITY; };
  if (src == "@cutoff") return [](double x) { return std::abs(x) <= kPi ? 1.0 : 0.0; };
  if (!src.empty() && src[0] == '@') throw ConfigError("unknown builtin symbol '" + src + "'");
  auto e = std::make_shared<Expr>(Expr::parse(src, {"x"}));
  return [e](double x) { return e->eval(std::span<const double>(&x, 1)); };
}

// numbers may be given as JSON numbers or as expressions such as "2^-4" or "pi/2"
double number(const json& j, const std::string& what) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    double v;
    Expr e = Expr::parse(j.get<std::string>(), {});
    if (e.is_constant(&v)) return v;
    return e.eval(std::span<const double>());
  }
  throw ConfigError(what + ": expected a number");
}

std::vector<std::string> string_list(const json& j, const std::string& what) {
  if (j.is_string()) return {j.get<std::string>()};
  if (!j.is_array()) throw ConfigError(what + ": expected a list of expressions");
  std::vector<std::string> v;
  for (const auto& x : j) {
    if (x.is_number()) v.push_back(json(x).dump());
    else if (x.is_string()) v.push_back(x.get<std::string>());
    else throw ConfigError(what + ": entries must be strings or numbers");
  }
  return v;
}

template <class F>
auto wrap(const std::string& ctx, F&& f) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const json::exception& e) {
    throw ConfigError(ctx + ": " + e.what());
  } catch (const std::exception& e) {
    throw ConfigError(ctx + ": " + e.what());
  }
}

}  // namespace

SchemeSpec scheme_from_json(const json& j) {
  return wrap("scheme", [&] {
    if (j.is_string()) return builtin_scheme(j.get<std::string>());
    if (!j.is_object()) throw ConfigError("scheme: expected a name or an object");
    if (j.contains("builtin")) return builtin_scheme(j.at("builtin").get<std::string>());
    SchemeSpec s;
    s.name = j.value("name", std::string("custom"));
    s.m_src = j.contains("m") ? (j["m"].is_string() ? j["m"].get<std::string>() : j["m"].dump()) : "@one";
    s.h_src = j.contains("h") ? (j["h"].is_string() ? j["h"].get<std::string>() : j["h"].dump()) : "@one";
    if (s.m_src == "1") s.m_src = "@one";
    if (s.h_src == "1") s.h_src = "@one";
    s.m = symbol_from(s.m_src);
    s.h = symbol_from(s.h_src);
    s.exact_derivative = j.value("exact_derivative", false);
    if (j.contains("mu")) {
      for (const auto& a : j.at("mu")) {
        if (!a.is_array() || a.size() != 2) throw ConfigError("scheme: mu entries must be [y, c] pairs");
        s.mu.atoms.push_back({number(a[0], "mu location"), number(a[1], "mu weight")});
      }
    } else if (!s.exact_derivative) {
      throw ConfigError("scheme: 'mu' is required unless exact_derivative is set");
    }
    if (j.contains("c_m")) s.c_m = number(j["c_m"], "c_m");
    else if (s.m_src == "@fd") s.c_m = 0.4;  // sinc^2(x/2) >= 4/pi^2 on the carried band
    if (j.contains("breakpoints"))
      for (const auto& b : j["breakpoints"]) s.breakpoints.push_back(number(b, "breakpoint"));
    else if (s.m_src == "@fd" || s.h_src == "@cutoff")
      s.breakpoints = {kPi};
    return s;
  });
}

ProblemSpec problem_from_json(const json& j, std::string* name) {
  return wrap("problem", [&] {
    auto set_name = [&](const std::string& n) {
      if (name) *name = n;
    };
    if (j.is_string()) {
      auto n = j.get<std::string>();
      set_name(n);
      if (n == "burgers") return ProblemSpec::burgers();
      if (n == "linear") return ProblemSpec::linear();
      throw ConfigError("unknown builtin problem '" + n + "'");
    }
    if (!j.is_object()) throw ConfigError("expected a name or an object");
    double nu = j.contains("nu") ? number(j["nu"], "nu") : 1.0;
    double sigma = j.contains("sigma") ? number(j["sigma"], "sigma") : 1.0;
    if (j.contains("builtin")) {
      auto n = j["builtin"].get<std::string>();
      set_name(n);
      if (n == "burgers") return ProblemSpec::burgers(nu, sigma);
      if (n == "linear") return ProblemSpec::linear(nu, sigma);
      throw ConfigError("unknown builtin problem '" + n + "'");
    }
    int n = j.value("n", 1);
    set_name(j.value("name", std::string("custom")));
    std::vector<std::string> F = j.contains("F") ? string_list(j["F"], "F") : std::vector<std::string>(n, "0");
    std::vector<std::string> G =
        j.contains("G") ? string_list(j["G"], "G") : std::vector<std::string>(static_cast<size_t>(n) * n, "0");
    std::vector<std::string> u0 =
        j.contains("initial") ? string_list(j["initial"], "initial") : std::vector<std::string>(n, "sin(x)");
    return ProblemSpec::from_strings(n, nu, sigma, F, G, u0);
  });
}

ExperimentConfig experiment_from_json(const json& j) {
  return wrap("experiment", [&] {
    if (!j.is_object()) throw ConfigError("expected an object");
    ExperimentConfig c;
    if (j.contains("problem")) c.problem = problem_from_json(j["problem"], &c.problem_name);
    if (j.contains("scheme")) c.scheme = scheme_from_json(j["scheme"]);
    if (j.contains("epsilon_levels")) {
      for (const auto& e : j["epsilon_levels"]) c.epsilon_levels.push_back(number(e, "epsilon_levels"));
    } else if (j.contains("levels")) {
      for (const auto& e : j["levels"]) c.epsilon_levels.push_back(std::ldexp(1.0, -e.get<int>()));
    } else {
      throw ConfigError("'epsilon_levels' or 'levels' is required");
    }
    if (j.contains("seeds")) {
      c.seeds = j["seeds"].get<std::vector<uint64_t>>();
    } else {
      uint64_t start = j.value("seed_start", uint64_t(0));
      int count = j.value("n_seeds", 20);
      for (int i = 0; i < count; ++i) c.seeds.push_back(start + i);
    }
    auto opt = [&](const char* key, double& v) {
      if (j.contains(key)) v = number(j[key], key);
    };
    opt("T", c.T);
    opt("K", c.K);
    opt("alpha", c.alpha);
    opt("dt_factor", c.dt_factor);
    opt("reference_factor", c.reference_factor);
    c.p = j.value("p", c.p);
    c.n_out = j.value("n_out", c.n_out);
    if (j.contains("lambda") && !j["lambda"].is_null() && j["lambda"] != "auto") c.lambda = number(j["lambda"], "lambda");
    c.ablation = j.value("ablation", c.ablation);
    c.diagnostics = j.value("diagnostics", c.diagnostics);
    c.reference_check = j.value("reference_check", c.reference_check);
    c.timing = j.value("timing", c.timing);
    for (auto it = j.begin(); it != j.end(); ++it) {
      static const std::set<std::string> known = {
          "problem", "scheme",   "epsilon_levels", "levels",      "seeds",       "n_seeds",          "seed_start",
          "T",       "K",        "alpha",          "dt_factor",   "reference_factor", "p",          "n_out",
          "lambda",  "ablation", "diagnostics",    "reference_check", "timing",  "comment"};
      if (!known.count(it.key())) throw ConfigError("unknown key '" + it.key() + "'");
    }
    c.validate();
    return c;
  });
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open '" + path.string() + "'");
  try {
    return json::parse(f, nullptr, true, true);
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

namespace {
template <class F>
auto with_path(const std::filesystem::path& path, F&& f) {
  auto j = read_json_file(path);
  try {
    return f(j);
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}
}  // namespace

SchemeSpec load_scheme(const std::filesystem::path& path) {
  return with_path(path, [](const json& j) { return scheme_from_json(j); });
}

ProblemSpec load_problem(const std::filesystem::path& path) {
  return with_path(path, [](const json& j) { return problem_from_json(j); });
}

ExperimentConfig load_experiment(const std::filesystem::path& path) {
  return with_path(path, [](const json& j) { return experiment_from_json(j); });
}

}  // namespace roughspde
