// ehv <eval|verify|sweep> <name> [options]
//
// Exit codes: 0 all checks pass, 1 some check fails, 2 bad input (error JSON
// on stderr).

#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ehv/error.hpp"
#include "ehv/registry.hpp"
#include "ehv/report.hpp"

namespace {

using ehv::cplx;
using ehv::ErrorKind;
using ehv::fail;

std::string json_string(const std::string& s) {
  std::string o = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') o += '\\';
    if (c == '\n') {
      o += "\\n";
      continue;
    }
    o += c;
  }
  return o + "\"";
}

int input_error(const std::string& kind, const std::string& msg) {
  std::cerr << "{\"error\":" << json_string(kind) << ",\"message\":" << json_string(msg) << "}\n";
  return 2;
}

// "x", "x,y" or "[x,y]".
cplx parse_complex(std::string s, const std::string& what) {
  if (!s.empty() && s.front() == '[' && s.back() == ']') s = s.substr(1, s.size() - 2);
  std::replace(s.begin(), s.end(), ',', ' ');
  std::istringstream is(s);
  double re = 0, im = 0;
  if (!(is >> re)) fail(ErrorKind::InvalidSpec, "cannot parse --" + what + " value");
  if (!(is >> im)) im = 0;
  std::string rest;
  if (is >> rest) fail(ErrorKind::InvalidSpec, "trailing text in --" + what + " value");
  return {re, im};
}

struct Inline {
  std::vector<std::string> z, t, f, s, x, w, extra;
  std::string q, p;
  std::vector<std::pair<std::string, std::string>> named;  // u, w1, ...
};

ehv::ParamFile build_params(const std::string& path, const Inline& in) {
  ehv::ParamFile pf;
  if (!path.empty()) pf = ehv::load_params(path);
  if (!in.q.empty()) pf.q = parse_complex(in.q, "q");
  if (!in.p.empty()) pf.p = parse_complex(in.p, "p");
  auto vec = [](const std::vector<std::string>& src, std::vector<cplx>& dst, const char* what) {
    if (src.empty()) return;
    dst.clear();
    for (const auto& v : src) dst.push_back(parse_complex(v, what));
  };
  vec(in.z, pf.z, "z");
  vec(in.t, pf.t, "t");
  vec(in.f, pf.f, "f");
  vec(in.s, pf.s, "s");
  vec(in.x, pf.x, "x");
  vec(in.w, pf.w, "w");
  for (const auto& [k, v] : in.named)
    if (!v.empty()) pf.extras[k] = parse_complex(v, k);
  for (const auto& kv : in.extra) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) fail(ErrorKind::InvalidSpec, "--set expects key=value");
    pf.extras[kv.substr(0, eq)] = parse_complex(kv.substr(eq + 1), kv.substr(0, eq));
  }
  return pf;
}

struct Grid {
  std::string param;
  std::vector<double> values;
};

Grid parse_grid(const std::string& spec) {
  static const std::regex re(R"(^([A-Za-z_][A-Za-z0-9_]*):([^:]+):([^:]+):([0-9]+)(?::(lin|geo))?$)");
  std::smatch m;
  if (!std::regex_match(spec, m, re)) fail(ErrorKind::InvalidSpec, "malformed grid '" + spec + "' (name:start:stop:count[:lin|geo])");
  Grid g;
  g.param = m[1];
  double a, b;
  try {
    a = std::stod(m[2]);
    b = std::stod(m[3]);
  } catch (const std::exception&) {
    fail(ErrorKind::InvalidSpec, "grid bounds must be numbers");
  }
  const int count = std::stoi(m[4]);
  const bool geo = m[5] == "geo";
  if (count < 1) fail(ErrorKind::InvalidSpec, "empty grid");
  if (geo && (a <= 0 || b <= 0)) fail(ErrorKind::InvalidSpec, "geometric grid needs positive bounds");
  for (int i = 0; i < count; ++i) {
    const double u = count == 1 ? 0.0 : static_cast<double>(i) / (count - 1);
    g.values.push_back(geo ? a * std::pow(b / a, u) : a + (b - a) * u);
  }
  return g;
}

// Sets the modulus of the named parameter and keeps its phase.
void set_modulus(ehv::ParamFile& pf, const std::string& name, double r) {
  auto scale = [&](cplx& v) { v = std::abs(v) == 0 ? cplx(r, 0) : v / std::abs(v) * r; };
  if (name == "q" || name == "p") {
    auto& v = name == "q" ? pf.q : pf.p;
    if (!v) fail(ErrorKind::InvalidSpec, "grid parameter '" + name + "' is not used by this check");
    scale(*v);
    return;
  }
  static const std::regex idx(R"(^([tfsxwz])([0-9]+)$)");
  std::smatch m;
  if (std::regex_match(name, m, idx)) {
    std::vector<cplx>* vec = nullptr;
    switch (m[1].str()[0]) {
      case 't': vec = &pf.t; break;
      case 'f': vec = &pf.f; break;
      case 's': vec = &pf.s; break;
      case 'x': vec = &pf.x; break;
      case 'w': vec = &pf.w; break;
      default: vec = &pf.z; break;
    }
    const std::size_t k = std::stoul(m[2]);
    if (k >= vec->size()) fail(ErrorKind::InvalidSpec, "grid parameter '" + name + "' is not used by this check");
    scale((*vec)[k]);
    return;
  }
  auto it = pf.extras.find(name);
  if (it == pf.extras.end()) fail(ErrorKind::InvalidSpec, "grid parameter '" + name + "' is not used by this check");
  scale(it->second);
}

std::string human(const ehv::VerificationReport& r) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%s  rel_err=%.3e  tol=%.1e  nodes=%lld", r.pass ? "PASS" : "FAIL", r.rel_err, r.tol,
                r.nodes);
  return std::string(buf) + "  " + r.name;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Elliptic hypergeometric identities: evaluation and verification"};
  app.require_subcommand(1);

  std::string name, params_path, precision = "std", grid_spec, out_path;
  std::optional<double> tol;
  std::uint64_t seed = 1;
  int nodes = 0, draws = 0, workers = 1;
  std::optional<int> n, m;
  bool as_json = false, timing = false;
  Inline in;
  for (const char* k : {"u", "w1", "w2", "w3", "sigma", "tau", "t0"}) in.named.emplace_back(k, "");

  auto common = [&](CLI::App* sub) {
    sub->add_option("name", name, "function or identity name")->required();
    sub->add_option("--params", params_path, "JSON parameter file");
    sub->add_option("--precision", precision, "std or extended")->check(CLI::IsMember({"std", "extended"}));
    sub->add_option("--n", n, "rank, order or size");
    sub->add_option("--m", m, "second index");
    sub->add_option("--q", in.q, "base q");
    sub->add_option("--p", in.p, "base p");
    sub->add_option("--z", in.z, "variables");
    sub->add_option("--t", in.t, "t parameters");
    sub->add_option("--f", in.f, "f parameters");
    sub->add_option("--s", in.s, "s parameters");
    sub->add_option("--x", in.x, "x parameters");
    sub->add_option("--w", in.w, "w parameters");
    for (auto& [k, v] : in.named) sub->add_option("--" + k, v, "scalar parameter " + k);
    sub->add_option("--set", in.extra, "scalar parameter key=value");
  };
  auto checks = [&](CLI::App* sub) {
    common(sub);
    sub->add_option("--tol", tol, "tolerance (per-check default otherwise)");
    sub->add_option("--seed", seed, "sampler seed");
    sub->add_option("--nodes", nodes, "starting nodes per dimension");
    sub->add_option("--draws", draws, "parameter draws per check");
    sub->add_option("--workers", workers, "quadrature threads");
    sub->add_flag("--json", as_json, "JSON reports");
    sub->add_flag("--timing", timing, "record wall-clock runtime in reports");
  };

  auto* eval = app.add_subcommand("eval", "evaluate a function");
  common(eval);
  auto* verify = app.add_subcommand("verify", "run a registered check");
  checks(verify);
  auto* sweep = app.add_subcommand("sweep", "run a check over a parameter grid");
  checks(sweep);
  sweep->add_option("--grid", grid_spec, "name:start:stop:count[:lin|geo]")->required();
  sweep->add_option("--out", out_path, "JSON-lines output file (stdout otherwise)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return input_error("InvalidSpec", e.what());
  }

  try {
    const ehv::ParamFile pf = build_params(params_path, in);
    const ehv::Precision prec = precision == "extended" ? ehv::Precision::Extended : ehv::Precision::Standard;

    if (eval->parsed()) {
      const cplx v = ehv::run_eval(name, pf, n, prec);
      std::cout << ehv::complex_json(v) << "\n";
      return 0;
    }

    ehv::VerifyOptions opts;
    opts.params = pf;
    opts.tol = tol;
    opts.seed = seed;
    opts.nodes = nodes;
    opts.n = n;
    opts.m = m;
    opts.draws = draws;
    opts.precision = prec;
    opts.workers = workers;
    if (!ehv::in_registry(name)) fail(ErrorKind::InvalidSpec, "unknown identity '" + name + "'");

    if (verify->parsed()) {
      const auto outcome = ehv::run_verify(name, opts);
      bool all = true;
      for (const auto& r : outcome.reports) {
        all = all && r.pass;
        std::cout << (as_json ? ehv::to_json(r, timing) : human(r)) << "\n";
      }
      if (as_json) std::cerr << "{\"rejections\":" << outcome.rejections << "}\n";
      else std::cout << outcome.reports.size() << " checks, " << outcome.rejections << " sampler rejections\n";
      return all ? 0 : 1;
    }

    const Grid grid = parse_grid(grid_spec);
    const ehv::ParamFile base = ehv::resolve_params(name, opts);
    std::ofstream file;
    if (!out_path.empty()) {
      file.open(out_path);
      if (!file) fail(ErrorKind::InvalidSpec, "cannot write '" + out_path + "'");
    }
    std::ostream& os = out_path.empty() ? std::cout : file;
    long long reports = 0, passed = 0, errors = 0;
    for (double v : grid.values) {
      ehv::ParamFile pt = base;
      set_modulus(pt, grid.param, v);
      ehv::VerifyOptions o = opts;
      o.params = pt;
      const std::string tag = " [|" + grid.param + "|=" + ehv::format_double(v) + "]";
      try {
        const auto outcome = ehv::run_verify(name, o);
        for (auto r : outcome.reports) {
          r.name += tag;
          ++reports;
          passed += r.pass;
          os << ehv::to_json(r, timing) << "\n";
        }
      } catch (const ehv::Error& e) {
        ++errors;
        os << "{\"name\":" << json_string(name + tag) << ",\"error\":" << json_string(ehv::to_string(e.kind()))
           << ",\"message\":" << json_string(e.what()) << "}\n";
      }
    }
    const long long total = reports + errors;
    os << "{\"summary\":{\"points\":" << grid.values.size() << ",\"reports\":" << reports << ",\"passed\":" << passed
       << ",\"errors\":" << errors << ",\"pass_fraction\":"
       << ehv::format_double(total ? static_cast<double>(passed) / static_cast<double>(total) : 0.0) << "}}\n";
    return passed == total ? 0 : 1;
  } catch (const ehv::Error& e) {
    std::string msg = e.what();
    if (e.kind() == ErrorKind::NonTerminatingWithoutBound && msg.find("not terminating") == std::string::npos)
      msg = "not terminating: " + msg;
    return input_error(ehv::to_string(e.kind()), msg);
  } catch (const std::exception& e) {
    return input_error("InvalidSpec", e.what());
  }
}
