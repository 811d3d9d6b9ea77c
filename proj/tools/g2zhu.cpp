// g2zhu: compute sewing-side objects and run the verification suites.
#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <regex>

#include "g2zhu/g2zhu.hpp"

using namespace g2zhu;
using json = nlohmann::ordered_json;

namespace {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// "a+bi", "bi", "a", "i", "-i"; spaces ignored
cplx parse_complex(std::string s) {
  s.erase(std::remove_if(s.begin(), s.end(), ::isspace), s.end());
  // a | bi | a+bi, with b optional before i
  static const std::string N = R"((?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)";
  static const std::regex re("^(?:([+-]?" + N + ")|([+-]?(?:" + N + ")?)[ij]|([+-]?" + N + ")([+-](?:" + N + ")?)[ij])$");
  std::smatch m;
  if (s.empty() || !std::regex_match(s, m, re)) throw ConfigError("bad complex literal '" + s + "'");
  auto coeff = [](const std::string& t) { return t.empty() || t == "+" ? 1.0 : t == "-" ? -1.0 : std::stod(t); };
  if (m[1].matched) return {std::stod(m[1].str()), 0.0};
  if (m[2].matched) return {0.0, coeff(m[2].str())};
  return {std::stod(m[3].str()), coeff(m[4].str())};
}

SurfacePoint parse_point(const std::string& s) {
  static const std::regex re(R"(^torus([12]):(.+)$)");
  std::smatch m;
  if (!std::regex_match(s, m, re)) throw ConfigError("bad surface point '" + s + "', expected torus<1|2>:<complex>");
  return {std::stoi(m[1].str()), parse_complex(m[2].str())};
}

// shortest round-trip decimal
std::string num(double v) {
  char buf[32];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::string point_string(const SurfacePoint& x) {
  return "torus" + std::to_string(x.torus) + ":" + num(x.z.real()) + (x.z.imag() < 0 ? "" : "+") + num(x.z.imag()) + "i";
}

json cj(cplx z) { return json::array({z.real(), z.imag()}); }

// every default lives here and is echoed into the output
struct RunConfig {
  std::string tau1 = "i", tau2 = "i", eps = "0";
  std::string branch = "+";
  int M = 0;
  int q_terms = 128;
  int alpha_nodes = 32, beta_panels = 2, beta_order = 16, circle_nodes = 32;
  double quad_tol = 1e-13;
  double fd_step = 1e-4;
  int richardson = 1;
  int level_cap = 6;
  std::vector<std::string> tol_overrides;
  std::string format = "json";
  std::string output;

  // parsed
  std::optional<ModuliPoint> point;
  std::map<std::string, double> tols;
  QuadratureConfig quad;
  FDConfig fd;

  void finalize(bool need_point) {
    SeriesConfig sc;
    sc.q_terms = q_terms;
    if (q_terms < 8) throw ConfigError("--q-terms must be >= 8");
    if (M < 0) throw ConfigError("--M must be >= 0 (0 selects the truncation automatically)");
    if (branch != "+" && branch != "-") throw ConfigError("--sqrt-eps-branch must be + or -");
    if (need_point) {
      ModuliPoint p(parse_complex(tau1), parse_complex(tau2), parse_complex(eps), sc);
      point = branch == "-" ? p.flipped() : p;
    }
    quad.alpha_nodes = alpha_nodes;
    quad.beta_panels = beta_panels;
    quad.beta_order = beta_order;
    quad.circle_nodes = circle_nodes;
    quad.tol = quad_tol;
    quad.validate();
    fd.step = fd_step;
    fd.richardson_levels = richardson;
    fd.validate();
    for (const auto& t : tol_overrides) {
      auto k = t.find('=');
      if (k == std::string::npos) throw ConfigError("--tol expects name=value, got '" + t + "'");
      double v = std::stod(t.substr(k + 1));
      if (!(v > 0)) throw ConfigError("tolerance overrides must be > 0");
      tols[t.substr(0, k)] = v;
    }
  }

  int trunc() const { return M > 0 ? M : choose_truncation(*point); }

  json to_json(const std::optional<int>& used_M) const {
    json c;
    c["tau1"] = tau1;
    c["tau2"] = tau2;
    c["eps"] = eps;
    if (point) c["sqrt_eps"] = cj(point->sigma());
    c["sqrt_eps_branch"] = branch;
    c["M"] = M;
    if (used_M) c["M_used"] = *used_M;
    c["q_terms"] = q_terms;
    c["quadrature"] = {{"alpha_nodes", alpha_nodes}, {"beta_panels", beta_panels}, {"beta_order", beta_order},
                       {"circle_nodes", circle_nodes}, {"tol", quad_tol}};
    c["fd"] = {{"step", fd_step}, {"richardson_levels", richardson}};
    c["level_cap"] = level_cap;
    json t = json::object();
    for (const auto& [k, v] : tols) t[k] = v;
    c["tolerance_overrides"] = t;
    c["format"] = format;
    return c;
  }
};

struct Value {
  json inputs;
  cplx value;
};

// RFC 4180 quoting when the field holds a comma, quote or newline
std::string csv_field(const std::string& f) {
  if (f.find_first_of(",\"\n") == std::string::npos) return f;
  std::string q = "\"";
  for (char ch : f) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
  return q + "\"";
}

void emit(const json& doc, const std::vector<Value>& values, const RunConfig& cfg) {
  std::ostringstream out;
  if (cfg.format == "json") {
    out << doc.dump(2) << "\n";
  } else if (cfg.format == "csv") {
    // inputs..., re, im; residual rows for verify runs
    std::vector<std::string> cols;
    for (const auto& v : values)
      for (const auto& [k, _] : v.inputs.items())
        if (std::find(cols.begin(), cols.end(), k) == cols.end()) cols.push_back(k);
    for (const auto& k : cols) out << k << ",";
    out << "re,im\n";
    for (const auto& v : values) {
      for (const auto& k : cols) {
        if (v.inputs.contains(k)) {
          const auto& e = v.inputs[k];
          out << csv_field(e.is_string() ? e.get<std::string>() : e.dump());
        }
        out << ",";
      }
      out << num(v.value.real()) << "," << num(v.value.imag()) << "\n";
    }
    if (doc.contains("residuals")) {
      out << "report,label,residual,scale,relative,tolerance\n";
      for (const auto& r : doc["residuals"])
        for (const auto& s : r["samples"])
          out << csv_field(r["name"].get<std::string>()) << "," << csv_field(s["label"].get<std::string>()) << "," << num(s["residual"].get<double>())
              << "," << num(s["scale"].get<double>()) << "," << num(s["relative"].get<double>()) << ","
              << num(r["tolerance"].get<double>()) << "\n";
    }
  } else {
    out << doc["object"].get<std::string>() << "\n";
    out << std::setprecision(12);
    for (const auto& v : values) out << "  " << std::left << std::setw(48) << v.inputs.dump() << v.value << "\n";
    if (doc.contains("residuals"))
      for (const auto& r : doc["residuals"])
        out << "  " << std::left << std::setw(26) << r["name"].get<std::string>() << " worst " << std::setw(12)
            << r["worst"].get<double>() << " tol " << std::setw(8) << r["tolerance"].get<double>()
            << (r["pass"].get<bool>() ? " PASS" : " FAIL") << "\n";
    if (doc.contains("pass")) out << (doc["pass"].get<bool>() ? "PASS" : "FAIL") << "\n";
  }
  if (cfg.output.empty()) {
    std::cout << out.str();
  } else {
    std::ofstream f(cfg.output);
    if (!f) throw ConfigError("cannot open output file " + cfg.output);
    f << out.str();
  }
}

json values_json(const std::vector<Value>& values) {
  json a = json::array();
  for (const auto& v : values) a.push_back({{"inputs", v.inputs}, {"value", cj(v.value)}});
  return a;
}

json report_json(const ResidualReport& r) {
  json s = json::array();
  for (const auto& x : r.samples)
    s.push_back({{"label", x.label}, {"residual", x.residual}, {"scale", x.scale}, {"relative", x.relative()}});
  return {{"name", r.name}, {"tolerance", r.tolerance}, {"worst", r.worst()}, {"pass", r.pass()}, {"samples", s},
          {"errors", r.errors}};
}

// ---- compute ----------------------------------------------------------------

struct ComputeArgs {
  std::string object;
  std::vector<std::string> xs, ys;
  std::vector<double> lambda{0.0, 0.0};
  int N = 2;
  int max_j = 2;
};

std::vector<SurfacePoint> points(const std::vector<std::string>& v) {
  std::vector<SurfacePoint> out;
  for (const auto& s : v) out.push_back(parse_point(s));
  return out;
}

int cmd_compute(const ComputeArgs& a, RunConfig& cfg) {
  cfg.finalize(true);
  const ModuliPoint& p = *cfg.point;
  int M = cfg.trunc();
  Sewing s(p, M);
  auto xs = points(a.xs), ys = points(a.ys);
  for (const auto& x : xs) p.check(x);
  for (const auto& y : ys) p.check(y);
  if (a.lambda.size() != 2) throw ConfigError("--lambda takes two values");
  ModulePair lam{a.lambda[0], a.lambda[1]};
  std::vector<Value> vals;
  auto need = [&](bool ok, const char* what) {
    if (!ok) throw ConfigError(std::string("compute ") + a.object + ": " + what);
  };
  if (a.object == "period") {
    auto om = s.period();
    vals.push_back({{{"entry", "Omega11"}}, om.om11});
    vals.push_back({{{"entry", "Omega12"}}, om.om12});
    vals.push_back({{{"entry", "Omega22"}}, om.om22});
    vals.push_back({{{"entry", "logdet"}}, s.logdet()});
  } else if (a.object == "nu") {
    need(!xs.empty(), "needs --x");
    for (const auto& x : xs)
      for (int i = 1; i <= 2; ++i) vals.push_back({{{"x", point_string(x)}, {"i", i}}, s.nu(i, x)});
  } else if (a.object == "omega") {
    need(!xs.empty() && xs.size() == ys.size(), "needs matching --x and --y lists");
    for (std::size_t k = 0; k < xs.size(); ++k)
      vals.push_back({{{"x", point_string(xs[k])}, {"y", point_string(ys[k])}}, s.omega(xs[k], ys[k])});
  } else if (a.object == "projective") {
    need(!xs.empty(), "needs --x");
    for (const auto& x : xs) vals.push_back({{{"x", point_string(x)}}, s.projective(x)});
  } else if (a.object == "zhu-coeffs") {
    need(!xs.empty(), "needs --x");
    need(a.N >= 1, "--N must be >= 1");
    Zhu z(s, a.N);
    for (const auto& x : xs) {
      for (int b = 1; b <= 2; ++b) vals.push_back({{{"N", a.N}, {"x", point_string(x)}, {"F", b}}, z.F(b, x)});
      Row fp = z.FPi(x);
      for (int m = 1; m <= z.K() - 1; ++m)
        vals.push_back({{{"N", a.N}, {"x", point_string(x)}, {"FPi", m}}, fp(m - 1)});
      if (a.N == 2) {
        auto ph = z.Phi(x);
        for (int r = 0; r < 3; ++r) vals.push_back({{{"N", a.N}, {"x", point_string(x)}, {"Phi", r + 1}}, ph[r]});
      }
      for (const auto& y : ys)
        for (int j = 0; j <= a.max_j; ++j)
          vals.push_back({{{"N", a.N}, {"x", point_string(x)}, {"y", point_string(y)}, {"P", "0," + std::to_string(1 + j)}},
                          z.P(0, j, x, y)});
    }
  } else if (a.object == "heisenberg") {
    cplx Z = z2_partition(s, lam);
    vals.push_back({{{"lambda", a.lambda}, {"quantity", "Z"}}, Z});
    for (const auto& x : xs) {
      vals.push_back({{{"lambda", a.lambda}, {"quantity", "nu_lambda"}, {"x", point_string(x)}}, nu_lambda(s, lam, x)});
      vals.push_back({{{"lambda", a.lambda}, {"quantity", "omega~ 1-point"}, {"x", point_string(x)}},
                      virasoro_one_point(s, lam, x)});
    }
    if (xs.size() >= 2) {
      json pts = json::array();
      for (const auto& x : xs) pts.push_back(point_string(x));
      vals.push_back({{{"lambda", a.lambda}, {"quantity", "h n-point"}, {"points", pts}}, h_npoint(s, lam, xs)});
    }
  } else if (a.object == "xi") {
    Xi3 X = xi_matrix(s, cfg.quad);
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) vals.push_back({{{"row", r + 1}, {"col", c + 1}}, X(r, c)});
    vals.push_back({{{"quantity", "det"}}, X.determinant()});
  } else {
    throw ConfigError("unknown object " + a.object);
  }
  json doc;
  doc["object"] = a.object;
  doc["config"] = cfg.to_json(M);
  doc["values"] = values_json(vals);
  emit(doc, vals, cfg);
  return 0;
}

// ---- verify -----------------------------------------------------------------

struct VerifyArgs {
  std::string suite;
  bool tau_given = false, eps_given = false;
};

suite::SuiteConfig suite_config(const VerifyArgs& v, const RunConfig& cfg) {
  suite::SuiteConfig c;
  SeriesConfig sc;
  sc.q_terms = cfg.q_terms;
  std::vector<std::pair<cplx, cplx>> taus =
      v.tau_given ? std::vector<std::pair<cplx, cplx>>{{parse_complex(cfg.tau1), parse_complex(cfg.tau2)}} : standard_tau_pairs();
  c.grid.clear();
  for (auto [t1, t2] : taus) {
    ModuliPoint base(t1, t2, 0.0, sc);
    std::vector<cplx> eps;
    if (v.eps_given)
      eps.push_back(parse_complex(cfg.eps));
    else
      for (double f : standard_eps_fractions()) eps.push_back(f * base.D(1) * base.D(2));
    for (cplx e : eps) {
      ModuliPoint q = base.with_eps(e);
      c.grid.push_back(cfg.branch == "-" ? q.flipped() : q);
    }
  }
  c.M = cfg.M;
  c.quad = cfg.quad;
  c.fd = cfg.fd;
  c.oracle.level_cap = cfg.level_cap;
  c.oracle.fd = cfg.fd;
  return c;
}

int cmd_verify(const VerifyArgs& v, RunConfig& cfg) {
  cfg.finalize(false);
  auto c = suite_config(v, cfg);
  std::vector<ResidualReport> reps;
  std::vector<Value> vals;
  const auto& ids = identity_names();
  if (v.suite == "all") {
    for (int id = 1; id <= 12; ++id) {
      auto k = suite::criterion(id, c);
      for (auto& r : k.reports) {
        r.name = "criterion " + std::to_string(id) + ": " + r.name;
        reps.push_back(r);
      }
    }
    reps.push_back(suite::modular_consistency(c));
    reps.push_back(fock::check_fock_invariants(c.oracle));
  } else if (std::find(ids.begin(), ids.end(), v.suite) != ids.end()) {
    reps.push_back(suite::identity(v.suite, c));
  } else if (v.suite == "oracle") {
    fock::CoefficientTable tab;
    reps.push_back(fock::check_partition_coefficients(c.oracle, &tab));
    reps.push_back(fock::check_two_point(c.oracle));
    reps.push_back(fock::verify_genus2_zhu(fock::ZhuVector::h, c.oracle));
    reps.push_back(fock::verify_genus2_zhu(fock::ZhuVector::omega, c.oracle));
    reps.push_back(fock::check_fock_invariants(c.oracle));
    reps.push_back(suite::genus1(c));
    for (std::size_t n = 0; n < tab.brute.size(); ++n) {
      vals.push_back({{{"table", "eps_coefficients"}, {"source", "brute"}, {"n", n}}, tab.brute[n]});
      vals.push_back({{{"table", "eps_coefficients"}, {"source", "closed"}, {"n", n}}, tab.closed[n]});
    }
  } else if (v.suite == "equivariance") {
    reps.push_back(suite::equivariance(c));
    reps.push_back(suite::modular_consistency(c));
  } else {
    throw ConfigError("unknown suite " + v.suite);
  }
  bool pass = true;
  json rs = json::array();
  for (auto& r : reps) {
    for (const auto& [k, t] : cfg.tols)
      if (r.name == k || r.name.ends_with(": " + k)) r.tolerance = t;
    pass = pass && r.pass();
    rs.push_back(report_json(r));
  }
  json grid = json::array();
  for (const auto& p : c.grid) grid.push_back({{"tau1", cj(p.tau(1))}, {"tau2", cj(p.tau(2))}, {"eps", cj(p.eps())}, {"sqrt_eps", cj(p.sigma())}});
  json doc;
  doc["object"] = "verify " + v.suite;
  doc["config"] = cfg.to_json(std::nullopt);
  doc["config"]["grid"] = grid;
  doc["values"] = values_json(vals);
  doc["residuals"] = rs;
  doc["pass"] = pass;
  emit(doc, vals, cfg);
  return pass ? 0 : 1;
}

void add_common(CLI::App* app, RunConfig& cfg) {
  app->add_option("--tau1", cfg.tau1, "modular parameter of torus 1, complex literal a+bi")->capture_default_str();
  app->add_option("--tau2", cfg.tau2, "modular parameter of torus 2")->capture_default_str();
  app->add_option("--eps", cfg.eps, "sewing parameter")->capture_default_str();
  app->add_option("--sqrt-eps-branch", cfg.branch, "branch of sqrt(eps): + or -")->capture_default_str();
  app->add_option("--M", cfg.M, "truncation order (0: automatic)")->capture_default_str();
  app->add_option("--q-terms", cfg.q_terms, "minimum q-series terms")->capture_default_str();
  app->add_option("--alpha-nodes", cfg.alpha_nodes)->capture_default_str();
  app->add_option("--beta-panels", cfg.beta_panels)->capture_default_str();
  app->add_option("--beta-order", cfg.beta_order)->capture_default_str();
  app->add_option("--circle-nodes", cfg.circle_nodes)->capture_default_str();
  app->add_option("--quad-tol", cfg.quad_tol)->capture_default_str();
  app->add_option("--fd-step", cfg.fd_step)->capture_default_str();
  app->add_option("--richardson", cfg.richardson)->capture_default_str();
  app->add_option("--level-cap", cfg.level_cap, "Fock oracle level cap")->capture_default_str();
  app->add_option("--tol", cfg.tol_overrides, "tolerance override name=value (repeatable)");
  app->add_option("--format", cfg.format)->check(CLI::IsMember({"json", "csv", "table"}))->capture_default_str();
  app->add_option("-o,--output", cfg.output, "output path (default stdout)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"genus-two sewing, Zhu recursion and Heisenberg trace functions"};
  app.require_subcommand(1);
  RunConfig cfg;
  ComputeArgs ca;
  VerifyArgs va;
  auto* compute = app.add_subcommand("compute", "evaluate an object at one moduli point");
  compute->add_option("object", ca.object, "period | nu | omega | projective | zhu-coeffs | heisenberg | xi")
      ->required()
      ->check(CLI::IsMember({"period", "nu", "omega", "projective", "zhu-coeffs", "heisenberg", "xi"}));
  compute->add_option("--x", ca.xs, "surface point torus<1|2>:<complex> (repeatable)");
  compute->add_option("--y", ca.ys, "second surface point (repeatable)");
  compute->add_option("--lambda", ca.lambda, "module labels lambda1 lambda2")->expected(2);
  compute->add_option("--N", ca.N, "Zhu weight N")->capture_default_str();
  compute->add_option("--max-j", ca.max_j, "largest j in P_{0,1+j}")->capture_default_str();
  add_common(compute, cfg);
  auto* verify = app.add_subcommand("verify", "run a verification suite");
  verify->add_option("suite", va.suite, "all | oracle | equivariance | <identity>")->required();
  add_common(verify, cfg);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  va.tau_given = verify->count("--tau1") + verify->count("--tau2") > 0;
  va.eps_given = verify->count("--eps") > 0;

  auto fail = [&](const std::string& type, const std::string& msg) {
    json err = {{"error", {{"type", type}, {"message", msg}}}};
    std::cout << err.dump(2) << "\n";
    return 2;
  };
  try {
    if (compute->parsed()) return cmd_compute(ca, cfg);
    return cmd_verify(va, cfg);
  } catch (const DomainViolation& e) {
    return fail("DomainViolation", e.what());
  } catch (const NonConvergence& e) {
    return fail("NonConvergence", e.what());
  } catch (const ConfigError& e) {
    return fail("ConfigError", e.what());
  } catch (const std::invalid_argument& e) {
    return fail("ConfigError", e.what());
  }
}
