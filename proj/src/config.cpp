#include "proxal/config.hpp"

#include <fstream>
#include <mutex>
#include <set>

#include "proxal/errors.hpp"

namespace proxal {

namespace {

std::map<std::string, ProblemFactory>& registry() {
  static std::map<std::string, ProblemFactory> factories;
  return factories;
}

void reject_unknown_keys(const json& obj, const std::set<std::string>& allowed,
                         const std::string& context) {
  if (!obj.is_object())
    throw ConfigError(context + " must be a JSON object");
  for (const auto& item : obj.items()) {
    if (!allowed.count(item.key()))
      throw ConfigError("unknown key '" + item.key() + "' in " + context);
  }
}

double get_number(const json& obj, const std::string& key) {
  if (!obj.contains(key))
    throw ConfigError("missing required key '" + key + "'");
  if (!obj[key].is_number())
    throw ConfigError("key '" + key + "' must be a number");
  return obj[key].get<double>();
}

double get_number_or(const json& obj, const std::string& key, double fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number())
    throw ConfigError("key '" + key + "' must be a number");
  return obj[key].get<double>();
}

VectorXd get_vector(const json& j, const std::string& what) {
  if (!j.is_array()) throw ConfigError(what + " must be an array of numbers");
  VectorXd v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number())
      throw ConfigError(what + " must contain only numbers");
    v[static_cast<int>(i)] = j[i].get<double>();
  }
  return v;
}

MatrixXd get_matrix(const json& j, const std::string& what) {
  if (!j.is_array() || j.empty())
    throw ConfigError(what + " must be a nonempty array of rows");
  const std::size_t cols = j[0].size();
  MatrixXd m(j.size(), cols);
  for (std::size_t r = 0; r < j.size(); ++r) {
    if (!j[r].is_array() || j[r].size() != cols)
      throw ConfigError(what + " rows must all have the same length");
    for (std::size_t c = 0; c < cols; ++c)
      m(static_cast<int>(r), static_cast<int>(c)) = j[r][c].get<double>();
  }
  return m;
}

std::once_flag builtin_flag;

void register_builtins() {
  std::call_once(builtin_flag, [] {
    registry()["sphere_linear"] = [](const json& spec) {
      reject_unknown_keys(spec, {"name", "n", "b"}, "problem 'sphere_linear'");
      const int n = static_cast<int>(get_number(spec, "n"));
      VectorXd b;
      if (spec.contains("b")) {
        b = get_vector(spec["b"], "problem.b");
      } else {
        b = VectorXd::Zero(n);
        b[0] = 1.0;
      }
      return make_sphere_linear(n, b);
    };
    registry()["linear_qp"] = [](const json& spec) {
      reject_unknown_keys(spec, {"name", "Q", "p", "A", "b"},
                          "problem 'linear_qp'");
      for (const char* key : {"Q", "p", "A", "b"})
        if (!spec.contains(key))
          throw ConfigError(std::string("linear_qp needs key '") + key + "'");
      return make_linear_qp(get_matrix(spec["Q"], "problem.Q"),
                            get_vector(spec["p"], "problem.p"),
                            get_matrix(spec["A"], "problem.A"),
                            get_vector(spec["b"], "problem.b"));
    };
    registry()["rosenbrock_sphere"] = [](const json& spec) {
      reject_unknown_keys(spec, {"name", "n"}, "problem 'rosenbrock_sphere'");
      return make_rosenbrock_sphere(static_cast<int>(get_number(spec, "n")));
    };
  });
}

}  // namespace

void register_problem(const std::string& name, ProblemFactory factory) {
  register_builtins();
  registry()[name] = std::move(factory);
}

ProblemInstance make_problem(const json& spec) {
  register_builtins();
  if (!spec.is_object() || !spec.contains("name") ||
      !spec["name"].is_string())
    throw ConfigError("problem spec needs a string 'name'");
  const std::string name = spec["name"].get<std::string>();
  const auto it = registry().find(name);
  if (it == registry().end())
    throw ConfigError("unknown problem '" + name + "'");
  return it->second(spec);
}

RunConfig parse_run_config(const json& doc) {
  reject_unknown_keys(
      doc,
      {"problem", "mode", "epsilon", "eta", "rho", "beta", "seed", "x0",
       "lambda0", "max_outer", "inner", "adaptive", "baseline", "audit",
       "out_dir", "algorithm", "phase1"},
      "run config");

  RunConfig cfg;
  cfg.echo = doc;
  if (!doc.contains("problem"))
    throw ConfigError("run config needs a 'problem' object");
  cfg.problem = make_problem(doc["problem"]);

  SolverConfig& s = cfg.solver;
  s.epsilon = get_number_or(doc, "epsilon", 1e-6);
  s.eta = get_number_or(doc, "eta", 1.0);

  if (doc.contains("mode")) {
    const std::string mode = doc["mode"].get<std::string>();
    if (mode == "1o" || mode == "first_order")
      s.mode = Mode::first_order;
    else if (mode == "2o" || mode == "second_order")
      s.mode = Mode::second_order;
    else
      throw ConfigError("mode must be '1o' or '2o'");
  }

  if (doc.contains("beta")) {
    const json& b = doc["beta"];
    if (b.is_string()) {
      if (b.get<std::string>() != "paper-default")
        throw ConfigError("beta must be a number or \"paper-default\"");
    } else if (b.is_number()) {
      s.beta_override = b.get<double>();
      cfg.beta_overridden = true;
    } else {
      throw ConfigError("beta must be a number or \"paper-default\"");
    }
  }

  cfg.rho_policy = RhoPolicy::adaptive;
  if (doc.contains("rho")) {
    const json& r = doc["rho"];
    if (r.is_string()) {
      if (r.get<std::string>() != "adaptive")
        throw ConfigError("rho must be a positive number or \"adaptive\"");
    } else if (r.is_number()) {
      cfg.rho_policy = RhoPolicy::fixed;
      cfg.fixed_rho = r.get<double>();
      if (!(cfg.fixed_rho > 0.0))
        throw ConfigError("fixed rho must be positive");
    } else {
      throw ConfigError("rho must be a positive number or \"adaptive\"");
    }
  }

  if (doc.contains("seed")) {
    if (!doc["seed"].is_number_unsigned() && !doc["seed"].is_number_integer())
      throw ConfigError("seed must be an integer");
    s.seed = doc["seed"].get<std::uint64_t>();
  }

  if (doc.contains("x0"))
    cfg.x0 = get_vector(doc["x0"], "x0");
  else
    cfg.x0 = VectorXd::Zero(cfg.problem.n);
  if (cfg.x0.size() != cfg.problem.n)
    throw ConfigError("x0 dimension does not match the problem");
  if (!cfg.x0.allFinite()) throw ConfigError("x0 must be finite");

  if (doc.contains("lambda0")) {
    s.lambda0 = get_vector(doc["lambda0"], "lambda0");
    if (s.lambda0.size() != cfg.problem.m)
      throw ConfigError("lambda0 dimension does not match the problem");
  }

  if (doc.contains("max_outer")) {
    s.max_outer = static_cast<int>(get_number(doc, "max_outer"));
  }

  if (doc.contains("inner")) {
    const json& inner = doc["inner"];
    reject_unknown_keys(inner, {"max_iters", "max_hvps", "delta", "zeta"},
                        "inner config");
    s.inner.max_iters =
        static_cast<int>(get_number_or(inner, "max_iters", s.inner.max_iters));
    s.inner.max_hvps = static_cast<long>(
        get_number_or(inner, "max_hvps", static_cast<double>(s.inner.max_hvps)));
    s.inner.delta = get_number_or(inner, "delta", s.inner.delta);
    s.inner.zeta = get_number_or(inner, "zeta", s.inner.zeta);
  }

  cfg.adaptive.eta = s.eta;
  cfg.adaptive.epsilon = s.epsilon;
  if (doc.contains("adaptive")) {
    const json& a = doc["adaptive"];
    reject_unknown_keys(a, {"q", "T0", "C0", "trial_cap", "Lambda0"},
                        "adaptive config");
    cfg.adaptive.q = get_number_or(a, "q", cfg.adaptive.q);
    cfg.adaptive.T0 = static_cast<int>(get_number_or(a, "T0", cfg.adaptive.T0));
    cfg.adaptive.C0 = get_number_or(a, "C0", cfg.adaptive.C0);
    cfg.adaptive.trial_cap =
        static_cast<int>(get_number_or(a, "trial_cap", cfg.adaptive.trial_cap));
    if (a.contains("Lambda0"))
      cfg.adaptive.Lambda0 = get_vector(a["Lambda0"], "adaptive.Lambda0");
  }

  if (doc.contains("baseline")) {
    const json& b = doc["baseline"];
    reject_unknown_keys(b, {"tau", "gamma", "lambda_min", "lambda_max"},
                        "baseline config");
    s.baseline_tau = get_number_or(b, "tau", s.baseline_tau);
    s.baseline_gamma = get_number_or(b, "gamma", s.baseline_gamma);
    s.lambda_box_min = get_number_or(b, "lambda_min", s.lambda_box_min);
    s.lambda_box_max = get_number_or(b, "lambda_max", s.lambda_box_max);
  }

  if (doc.contains("audit")) {
    if (!doc["audit"].is_boolean()) throw ConfigError("audit must be boolean");
    s.audit = doc["audit"].get<bool>();
  }

  if (doc.contains("algorithm")) {
    cfg.algorithm = doc["algorithm"].get<std::string>();
    if (cfg.algorithm != "proximal_al" && cfg.algorithm != "classic_al")
      throw ConfigError("algorithm must be 'proximal_al' or 'classic_al'");
  }

  if (doc.contains("out_dir")) cfg.out_dir = doc["out_dir"].get<std::string>();

  if (doc.contains("phase1")) {
    const json& p = doc["phase1"];
    reject_unknown_keys(p, {"rho", "C0"}, "phase1 config");
    cfg.phase1_rho = get_number_or(p, "rho", cfg.phase1_rho);
    cfg.phase1_C0 = get_number_or(p, "C0", cfg.phase1_C0);
  }

  // Surface range violations now rather than at solve time; cite the valid
  // ranges in the message.
  if (!(s.epsilon > 0.0) || s.epsilon > 1.0)
    throw ConfigError("epsilon must lie in (0, 1]");
  if (s.eta < 0.0 || s.eta > 2.0)
    throw ConfigError("eta is out of the valid range [0, 2]");
  s.rho = cfg.fixed_rho;
  s.validate();
  cfg.adaptive.validate();
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream stream(path);
  if (!stream) throw ConfigError("cannot open config file '" + path + "'");
  json doc;
  try {
    doc = json::parse(stream);
  } catch (const json::parse_error& err) {
    throw ConfigError("config parse error: " + std::string(err.what()));
  }
  return parse_run_config(doc);
}

void ScalingStudySpec::validate() const {
  if (grid.size() < 3)
    throw ConfigError("scaling grid needs at least 3 tolerances");
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    if (!(grid[i] > grid[i + 1]))
      throw ConfigError("scaling grid must be strictly decreasing");
  }
  for (double eps : grid)
    if (!(eps > 0.0) || eps > 1.0)
      throw ConfigError("scaling grid tolerances must lie in (0, 1]");
  if (repetitions < 1) throw ConfigError("repetitions must be at least 1");
  if (eta < 0.0 || eta > 2.0) throw ConfigError("eta must lie in [0, 2]");
  if (slope_tolerance < 0.0)
    throw ConfigError("slope tolerance must be nonnegative");
  if (t_cap < 1) throw ConfigError("t_cap must be positive");
}

ScalingStudySpec parse_scaling_spec(const json& doc) {
  reject_unknown_keys(doc,
                      {"problem", "x0", "grid", "eta", "repetitions", "seed",
                       "mode", "rho", "slope_tolerance", "t_cap", "max_outer",
                       "inner"},
                      "scaling study config");
  ScalingStudySpec spec;
  if (!doc.contains("problem"))
    throw ConfigError("scaling study needs a 'problem' object");
  spec.problem_spec = doc["problem"];
  const ProblemInstance probe = make_problem(spec.problem_spec);

  if (doc.contains("x0"))
    spec.x0 = get_vector(doc["x0"], "x0");
  else
    spec.x0 = VectorXd::Zero(probe.n);
  if (spec.x0.size() != probe.n)
    throw ConfigError("x0 dimension does not match the problem");

  if (!doc.contains("grid"))
    throw ConfigError("scaling study needs a 'grid' array");
  for (const auto& value : doc["grid"]) {
    if (!value.is_number()) throw ConfigError("grid must contain numbers");
    spec.grid.push_back(value.get<double>());
  }
  spec.eta = get_number_or(doc, "eta", spec.eta);
  spec.repetitions =
      static_cast<int>(get_number_or(doc, "repetitions", spec.repetitions));
  if (doc.contains("seed")) spec.seed_base = doc["seed"].get<std::uint64_t>();
  if (doc.contains("mode")) {
    const std::string mode = doc["mode"].get<std::string>();
    if (mode == "2o" || mode == "second_order") spec.mode = Mode::second_order;
  }
  if (doc.contains("rho")) {
    if (doc["rho"].is_number()) {
      spec.fixed_rho = doc["rho"].get<double>();
    } else if (!(doc["rho"].is_string() &&
                 doc["rho"].get<std::string>() == "adaptive")) {
      throw ConfigError("rho must be a number or \"adaptive\"");
    }
  }
  spec.slope_tolerance =
      get_number_or(doc, "slope_tolerance", spec.slope_tolerance);
  spec.t_cap = static_cast<int>(get_number_or(doc, "t_cap", spec.t_cap));
  spec.max_outer =
      static_cast<int>(get_number_or(doc, "max_outer", spec.max_outer));
  if (doc.contains("inner")) {
    const json& inner = doc["inner"];
    reject_unknown_keys(inner, {"max_iters", "max_hvps", "delta", "zeta"},
                        "inner config");
    spec.inner.max_iters = static_cast<int>(
        get_number_or(inner, "max_iters", spec.inner.max_iters));
    spec.inner.max_hvps = static_cast<long>(get_number_or(
        inner, "max_hvps", static_cast<double>(spec.inner.max_hvps)));
    spec.inner.delta = get_number_or(inner, "delta", spec.inner.delta);
    spec.inner.zeta = get_number_or(inner, "zeta", spec.inner.zeta);
  }
  spec.validate();
  return spec;
}

}  // namespace proxal
