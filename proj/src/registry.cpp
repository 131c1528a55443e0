#include "ehv/registry.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>

#include <boost/multiprecision/eigen.hpp>
#include "json.hpp"

#include "ehv/biorthogonal.hpp"
#include "ehv/error.hpp"
#include "ehv/extended.hpp"
#include "ehv/gamma_fn.hpp"
#include "ehv/identities.hpp"
#include "ehv/integrands.hpp"
#include "ehv/quadrature.hpp"
#include "ehv/series.hpp"
#include "ehv/special_core.hpp"

namespace ehv {

// ---------------------------------------------------------------- params

std::vector<cplx> ParamFile::flatten() const {
  std::vector<cplx> v;
  if (q) v.push_back(*q);
  if (p) v.push_back(*p);
  for (const auto* xs : {&t, &f, &s, &x, &w, &z}) {
    v.push_back(cplx(static_cast<double>(xs->size()), 0.0));
    v.insert(v.end(), xs->begin(), xs->end());
  }
  for (const auto& [k, val] : extras) {
    v.push_back(cplx(static_cast<double>(k.size()), 0.0));
    v.push_back(val);
  }
  return v;
}

namespace {

using nlohmann::json;

cplx json_complex(const json& j, const std::string& where) {
  if (j.is_number()) return cplx(j.get<double>(), 0.0);
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
    return cplx(j[0].get<double>(), j[1].get<double>());
  fail(ErrorKind::InvalidSpec, "parameter '" + where + "' must be a number or [re, im]");
}

std::vector<cplx> json_vector(const json& j, const std::string& where) {
  if (!j.is_array()) fail(ErrorKind::InvalidSpec, "parameter '" + where + "' must be an array");
  std::vector<cplx> v;
  for (std::size_t i = 0; i < j.size(); ++i) v.push_back(json_complex(j[i], where + "[" + std::to_string(i) + "]"));
  return v;
}

json complex_to_json(const cplx& z) { return json::array({z.real(), z.imag()}); }

}  // namespace

ParamFile parse_params(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    fail(ErrorKind::InvalidSpec, std::string("parameter file is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) fail(ErrorKind::InvalidSpec, "parameter file must hold a JSON object");
  ParamFile pf;
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& k = it.key();
    if (k == "q") pf.q = json_complex(*it, k);
    else if (k == "p") pf.p = json_complex(*it, k);
    else if (k == "t") pf.t = json_vector(*it, k);
    else if (k == "f") pf.f = json_vector(*it, k);
    else if (k == "s") pf.s = json_vector(*it, k);
    else if (k == "x") pf.x = json_vector(*it, k);
    else if (k == "w") pf.w = json_vector(*it, k);
    else if (k == "z") pf.z = json_vector(*it, k);
    else if (k == "extras") {
      if (!it->is_object()) fail(ErrorKind::InvalidSpec, "'extras' must be an object");
      for (auto e = it->begin(); e != it->end(); ++e) pf.extras[e.key()] = json_complex(*e, "extras." + e.key());
    } else {
      fail(ErrorKind::InvalidSpec, "unknown parameter field '" + k + "'");
    }
  }
  return pf;
}

ParamFile load_params(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::InvalidSpec, "cannot open parameter file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_params(ss.str());
}

std::string params_to_json(const ParamFile& pf) {
  json j = json::object();
  if (pf.q) j["q"] = complex_to_json(*pf.q);
  if (pf.p) j["p"] = complex_to_json(*pf.p);
  auto put = [&](const char* k, const std::vector<cplx>& v) {
    if (v.empty()) return;
    json a = json::array();
    for (const cplx& z : v) a.push_back(complex_to_json(z));
    j[k] = a;
  };
  put("t", pf.t);
  put("f", pf.f);
  put("s", pf.s);
  put("x", pf.x);
  put("w", pf.w);
  put("z", pf.z);
  if (!pf.extras.empty()) {
    json e = json::object();
    for (const auto& [k, v] : pf.extras) e[k] = complex_to_json(v);
    j["extras"] = e;
  }
  return j.dump();
}

// ---------------------------------------------------------------- registry

const std::vector<std::string>& registry_names() {
  static const std::vector<std::string> names = {
      "theorem1", "cn1",      "cn2",        "cn3",    "an1",     "an2_odd", "an2_even", "an3_odd",
      "an3_even", "ft_sum",   "bailey",     "contiguous", "milne", "gustafson_rakha", "kratt", "ident",
      "id1",      "id2",      "id3",        "an_diffeq", "an_transform", "biorth", "biorth2", "intrep",
      "shifted_beta", "degeneration_p0"};
  return names;
}

bool in_registry(const std::string& name) {
  const auto& n = registry_names();
  return std::find(n.begin(), n.end(), name) != n.end();
}

namespace {

struct DryRun {};

struct Annulus {
  double lo, hi;
};

constexpr int kMaxAttempts = 100000;
constexpr double kTwoPi = 6.283185307179586;
// In double precision, series draws whose terms exceed the sum by more than
// this factor are rejected: the cancellation would eat the tolerance.
constexpr double kMaxCancellation = 1e2;
// Minimum distance of listed poles from |z| = 1 for contour integrals.
constexpr double kPoleGap = 0.03;
// Drawn beta-integral parameters keep pq/A this far inside the unit circle:
// 0.95^512 ~ 4e-12, so 512 trapezoid nodes reach the 1e-9 budget.
constexpr double kBetaGap = 0.05;

cplx product(const std::vector<cplx>& v) {
  cplx r = 1;
  for (const cplx& x : v) r *= x;
  return r;
}

template <class C>
class Runner {
 public:
  using R = real_t<C>;

  Runner(const VerifyOptions& o, bool dry) : o_(o), rng_(o.seed), dry_(dry) {}

  VerifyOutcome out;

  void run(const std::string& name) {
    start_ = clock::now();
    if (name == "theorem1") theorem1();
    else if (name == "cn1") cn(Family::Cn_I);
    else if (name == "cn2") cn(Family::Cn_II);
    else if (name == "cn3") cn(Family::Cn_III);
    else if (name == "an1") an(Family::An_I, 0);
    else if (name == "an2_odd") an(Family::An_II, 1);
    else if (name == "an2_even") an(Family::An_II, 2);
    else if (name == "an3_odd") an(Family::An_III, 1);
    else if (name == "an3_even") an(Family::An_III, 2);
    else if (name == "ft_sum") ft_sum();
    else if (name == "bailey") bailey();
    else if (name == "contiguous") contiguous();
    else if (name == "milne") milne();
    else if (name == "gustafson_rakha") gustafson_rakha();
    else if (name == "kratt") kratt();
    else if (name == "ident") ident();
    else if (name == "id1") id1();
    else if (name == "id2") id2();
    else if (name == "id3") id3();
    else if (name == "an_diffeq") an_diffeq();
    else if (name == "an_transform") an_transform();
    else if (name == "biorth") biorth();
    else if (name == "biorth2") biorth2();
    else if (name == "intrep") intrep();
    else if (name == "shifted_beta") shifted_beta();
    else if (name == "degeneration_p0") degeneration_p0();
    else fail(ErrorKind::InvalidSpec, "unknown identity '" + name + "'");
  }

 private:
  using clock = std::chrono::steady_clock;

  const VerifyOptions& o_;
  std::mt19937_64 rng_;
  bool dry_;
  bool recorded_ = false;
  long long draws_ = 0;
  std::string digest_;
  clock::time_point start_;

  // ------------------------------------------------------------ sampling

  double uniform(double lo, double hi) {
    std::uniform_real_distribution<double> U(0.0, 1.0);
    return lo + (hi - lo) * U(rng_);
  }

  cplx draw(Annulus a, double ph_lo = 0.0, double ph_hi = kTwoPi) {
    ++draws_;
    const double r = uniform(a.lo, a.hi);
    return std::polar(r, uniform(ph_lo, ph_hi));
  }

  void fill(std::optional<cplx>& v, Annulus a, double ph_lo = 0.0, double ph_hi = kTwoPi) {
    if (!v) v = draw(a, ph_lo, ph_hi);
  }

  void fill(std::vector<cplx>& v, std::size_t n, Annulus a, const char* what) {
    if (v.empty()) {
      for (std::size_t i = 0; i < n; ++i) v.push_back(draw(a));
    } else if (v.size() != n) {
      std::ostringstream os;
      os << "parameter '" << what << "' needs " << n << " entries, got " << v.size();
      fail(ErrorKind::InvalidSpec, os.str());
    }
  }

  void fill_extra(ParamFile& pf, const std::string& key, Annulus a) {
    if (!pf.extras.count(key)) pf.extras[key] = draw(a);
  }

  // Draws until check() returns an empty string; a violation that involves
  // no drawn value comes from the user's parameters and is reported as such.
  ParamFile sample(const std::string& what, const std::function<void(ParamFile&)>& make,
                   const std::function<std::string(const ParamFile&)>& check) {
    for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
      ParamFile pf = o_.params;
      const long long before = draws_;
      make(pf);
      const std::string why = check(pf);
      if (why.empty()) {
        record(pf, what);
        return pf;
      }
      if (draws_ == before) {
        const ErrorKind k = why.rfind("inadmissible contour", 0) == 0 ? ErrorKind::InadmissibleContour
                                                                       : ErrorKind::DomainViolation;
        fail(k, what + ": " + why);
      }
      ++out.rejections;
    }
    fail(ErrorKind::InvalidSpec, what + ": no admissible parameters found by the sampler");
  }

  void record(const ParamFile& pf, const std::string& tag) {
    digest_ = digest_values(pf.flatten(), tag);
    if (!recorded_) {
      recorded_ = true;
      out.drawn = pf;
      if (dry_) throw DryRun{};
    }
  }

  // ------------------------------------------------------------ helpers

  static C c(const cplx& z) { return from_cd<C>(z); }

  static std::vector<C> cv(const std::vector<cplx>& v) {
    std::vector<C> r;
    r.reserve(v.size());
    for (const cplx& z : v) r.push_back(c(z));
    return r;
  }

  static Moduli<C> moduli(const ParamFile& pf) { return Moduli<C>(c(*pf.q), c(*pf.p)); }

  static ParamSet<C> param_set(const ParamFile& pf) {
    ParamSet<C> P;
    P.t = cv(pf.t);
    P.f = cv(pf.f);
    P.s = cv(pf.s);
    P.x = cv(pf.x);
    P.w = cv(pf.w);
    for (const auto& [k, v] : pf.extras) P.extras[k] = c(v);
    return P;
  }

  double tol(double dflt) const { return o_.tol.value_or(dflt); }
  int draws(int dflt) const { return o_.draws > 0 ? o_.draws : dflt; }
  bool standard() const { return o_.precision == Precision::Standard; }

  void emit(VerificationReport r) {
    const auto now = clock::now();
    r.runtime_ms = std::chrono::duration<double, std::milli>(now - start_).count();
    start_ = now;
    r.params_digest = digest_;
    out.reports.push_back(std::move(r));
  }

  // Residual reported against zero, already divided by its scale.
  void emit_residual(const std::string& name, const IdentityResidual<C>& res, double tl) {
    auto r = compare(name, C(res.residual / C(res.scale == 0 ? R(1) : res.scale)), C(0), tl);
    r.nodes = res.nodes;
    emit(r);
  }

  QuadratureConfig quad_config(int dim, double tl) const {
    QuadratureConfig cfg;
    cfg.nodes_per_dim = o_.nodes > 0 ? o_.nodes : default_nodes(dim);
    cfg.max_doublings = dim <= 2 ? 2 : 1;
    cfg.rel_tol = std::clamp(tl * 1e-2, 1e-14, 1e-6);
    cfg.workers = o_.workers;
    return cfg;
  }

  ContourConfig contour_config(ContourPolicy policy) const {
    ContourConfig cfg;
    cfg.quad.nodes_per_dim = o_.nodes > 0 ? o_.nodes : 128;
    cfg.quad.max_doublings = 4;
    cfg.quad.rel_tol = 1e-12;
    cfg.quad.workers = o_.workers;
    cfg.policy = policy;
    return cfg;
  }

  VerificationReport integral_report(const std::string& name, const IntegrandSpec<C>& s, const C& rhs, double tl) {
    const Integrand<C> F(s);
    const int d = F.dim();
    const auto res = torus_integral<C>([&](const C* z) { return F(z); }, d, quad_config(d, tl),
                                       F.an_constraint() ? Constraint::AN_PRODUCT_ONE : Constraint::NONE);
    auto r = compare(name, res.value, rhs, tl);
    r.nodes = res.nodes_used;
    return r;
  }

  static std::string validation(const IntegrandSpec<C>& s) {
    const auto v = validate_domain(s);
    return v.pass ? std::string() : v.describe_failures();
  }

  // ------------------------------------------------------------ integrals

  void theorem1() {
    const double tl = tol(1e-9);
    const bool drawn_t = o_.params.t.size() < 5;
    for (int d = 0; d < draws(1); ++d) {
      const auto pf = sample(
          "theorem1",
          [&](ParamFile& r) {
            fill(r.q, {0.25, 0.35});
            fill(r.p, {0.15, 0.25});
            fill(r.t, 5, {0.3, 0.85}, "t");
          },
          [&](const ParamFile& r) {
            std::string why = validation(spec(Family::E, 1, r));
            if (why.empty() && drawn_t && std::abs(*r.q * *r.p / product(r.t)) > 1 - kBetaGap)
              why = "pq/A too close to the unit circle";
            return why;
          });
      const auto s = spec(Family::E, 1, pf);
      emit(integral_report(label("theorem1", d), s, rhs_closed_form(s), tl));
    }
  }

  static IntegrandSpec<C> spec(Family fam, int n, const ParamFile& pf) {
    return IntegrandSpec<C>{fam, n, param_set(pf), moduli(pf)};
  }

  std::string label(const std::string& base, int d) const {
    return draws(1) > 1 ? base + " draw=" + std::to_string(d) : base;
  }

  void cn(Family fam) {
    const int n = o_.n.value_or(1);
    if (n < 1) fail(ErrorKind::InvalidSpec, "rank n must be positive");
    const double tl = tol(n == 1 ? 1e-9 : 1e-6);
    const std::string base = std::string(fam == Family::Cn_I ? "cn1" : fam == Family::Cn_II ? "cn2" : "cn3");
    for (int d = 0; d < draws(1); ++d) {
      const auto pf = sample(
          base,
          [&](ParamFile& r) {
            fill(r.q, {0.25, 0.35});
            fill(r.p, {0.15, 0.25});
            switch (fam) {
              case Family::Cn_I: fill(r.t, static_cast<std::size_t>(2 * n + 3), {0.55, 0.85}, "t"); break;
              case Family::Cn_II:
                fill(r.t, 5, {0.45, 0.85}, "t");
                fill_extra(r, "t", {0.3, 0.8});
                break;
              default:
                fill(r.x, static_cast<std::size_t>(n), {0.5, 0.9}, "x");
                fill(r.t, 3, {0.4, 0.85}, "t");
                fill_extra(r, "t", {0.2, 0.5});
                break;
            }
          },
          [&](const ParamFile& r) { return validation(spec(fam, n, r)); });
      const auto s = spec(fam, n, pf);
      emit(integral_report(label(base + " n=" + std::to_string(n), d), s, rhs_closed_form(s), tl));
    }
  }

  // kind 0: type I; kind 1/2: odd/even rank from --m for types II and III.
  void an(Family fam, int kind) {
    int n;
    std::string base;
    if (kind == 0) {
      n = o_.n.value_or(1);
      base = "an1";
    } else {
      const int m = o_.m.value_or(1);
      if (m < 1) fail(ErrorKind::InvalidSpec, "m must be positive");
      n = kind == 1 ? 2 * m - 1 : 2 * m;
      base = std::string(fam == Family::An_II ? "an2" : "an3") + (kind == 1 ? "_odd" : "_even");
    }
    if (n < 1) fail(ErrorKind::InvalidSpec, "rank n must be positive");
    const double tl = tol(kind == 0 && n == 1 ? 1e-9 : 1e-6);
    for (int d = 0; d < draws(1); ++d) {
      const auto pf = sample(
          base,
          [&](ParamFile& r) {
            fill(r.q, {0.25, 0.35});
            fill(r.p, {0.15, 0.25});
            const auto nn = static_cast<std::size_t>(n);
            switch (fam) {
              case Family::An_I:
                fill(r.t, nn + 1, {0.45, 0.85}, "t");
                fill(r.f, nn + 2, {0.45, 0.85}, "f");
                break;
              case Family::An_II:
                fill(r.t, 5, {0.45, 0.85}, "t");
                fill_extra(r, "t", {0.3, 0.8});
                fill_extra(r, "s", {0.3, 0.8});
                break;
              default:
                fill(r.t, nn + 4, {0.45, 0.85}, "t");
                fill_extra(r, "t", {0.3, 0.8});
                break;
            }
          },
          [&](const ParamFile& r) { return validation(spec(fam, n, r)); });
      const auto s = spec(fam, n, pf);
      std::string name = base + " n=" + std::to_string(n);
      if (fam == Family::An_I) name += " (numerical support for a conjecture)";
      emit(integral_report(label(name, d), s, rhs_closed_form(s), tl));
    }
  }

  // ------------------------------------------------------------ series

  // Rejects a double-precision draw whose sum cancels too strongly.
  template <class S>
  std::string conditioning(const S& res) const {
    using std::abs;
    if (!standard()) return {};
    const R v = abs(res.value);
    if (v == 0 || res.max_term / v > R(kMaxCancellation)) return "series too ill-conditioned for double precision";
    return {};
  }

  void series_moduli(ParamFile& r) {
    fill(r.q, {0.25, 0.35});
    fill(r.p, {0.15, 0.25});
  }

  void ft_sum() {
    const double tl = tol(1e-12);
    std::vector<long> Ns;
    if (o_.n) Ns = {*o_.n};
    else for (long N = 0; N <= 8; ++N) Ns.push_back(N);
    for (int d = 0; d < draws(1); ++d)
      for (long N : Ns) {
        if (N < 0) fail(ErrorKind::InvalidSpec, "N must be nonnegative");
        // t = (t0, t1, t4, t5); t6 = q^-N and t7 from the balancing condition.
        auto build = [&](const ParamFile& r) {
          const auto m = moduli(r);
          const auto t = cv(r.t);
          const C t6 = ipow(m.q, -N);
          const C t7 = m.q * t[0] * t[0] / (t[1] * t[2] * t[3] * t6);
          return std::make_pair(m, std::vector<C>{t[0], t[1], t[2], t[3], t6, t7});
        };
        const auto pf = sample(
            "ft_sum",
            [&](ParamFile& r) {
              series_moduli(r);
              fill(r.t, 4, {0.3, 0.9}, "t");
            },
            [&](const ParamFile& r) {
              const auto [m, t] = build(r);
              return conditioning(sum_V(t[0], {t[1], t[2], t[3], t[4], t[5]}, m));
            });
        const auto [m, t] = build(pf);
        const C lhs = sum_V(t[0], {t[1], t[2], t[3], t[4], t[5]}, m).value;
        const C rhs = frenkel_turaev_rhs(t[0], t[1], t[2], t[3], N, m);
        emit(compare(label("ft_sum N=" + std::to_string(N), d), lhs, rhs, tl));
      }
  }

  // t = (t0..t5); t6 = q^-N, t7 = t0^3 q^2 / (t1...t6).
  static std::array<C, 8> twelve_params(const ParamFile& r, long N) {
    const auto m = moduli(r);
    const auto t = cv(r.t);
    std::array<C, 8> a;
    for (std::size_t i = 0; i < 6; ++i) a[i] = t[i];
    a[6] = ipow(m.q, -N);
    C prod(1);
    for (std::size_t i = 1; i < 7; ++i) prod *= a[i];
    a[7] = t[0] * t[0] * t[0] * m.q * m.q / prod;
    return a;
  }

  void bailey() {
    const double tl = tol(1e-11);
    std::vector<long> Ns;
    if (o_.n) Ns = {*o_.n};
    else for (long N = 0; N <= 5; ++N) Ns.push_back(N);
    for (long N : Ns) {
      if (N < 0) fail(ErrorKind::InvalidSpec, "N must be nonnegative");
      const auto pf = sample(
          "bailey",
          [&](ParamFile& r) {
            series_moduli(r);
            fill(r.t, 6, {0.3, 0.9}, "t");
          },
          [&](const ParamFile& r) {
            const auto a = twelve_params(r, N);
            return conditioning(sum_V(a[0], {a[1], a[2], a[3], a[4], a[5], a[6], a[7]}, moduli(r)));
          });
      const auto a = twelve_params(pf, N);
      std::array<int, 4> perm{0, 1, 2, 3};
      do {
        emit(bailey_transform_check(a, N, moduli(pf), perm, tl));
      } while (std::next_permutation(perm.begin(), perm.end()));
    }
  }

  void contiguous() {
    const double tl = tol(1e-11);
    std::vector<long> Ns;
    if (o_.n) Ns = {*o_.n};
    else for (long N = 0; N <= 4; ++N) Ns.push_back(N);
    for (long N : Ns) {
      if (N < 0) fail(ErrorKind::InvalidSpec, "N must be nonnegative");
      const auto pf = sample(
          "contiguous",
          [&](ParamFile& r) {
            series_moduli(r);
            fill(r.t, 6, {0.3, 0.9}, "t");
          },
          [](const ParamFile&) { return std::string(); });
      const auto res = contiguous_residuals(twelve_params(pf, N), moduli(pf));
      for (int k = 0; k < 3; ++k) {
        IdentityResidual<C> ir;
        ir.residual = res.residual[static_cast<std::size_t>(k)];
        ir.scale = res.scale[static_cast<std::size_t>(k)];
        emit_residual("contiguous n=" + std::to_string(N) + " relation=" + std::to_string(k + 1), ir, tl);
      }
    }
  }

  void milne() {
    const double tl = tol(1e-10);
    std::vector<int> dims;
    std::vector<long> Ns;
    if (o_.n) dims = {*o_.n};
    else dims = {1, 2, 3};
    if (o_.m) Ns = {*o_.m};
    else Ns = {0, 1, 2, 3};
    for (int n : dims) {
      if (n < 1) fail(ErrorKind::InvalidSpec, "milne: dimension must be positive");
      for (long N : Ns) {
        if (N < 0) fail(ErrorKind::InvalidSpec, "N must be nonnegative");
        const auto pf = sample(
            "milne",
            [&](ParamFile& r) {
              series_moduli(r);
              fill(r.t, static_cast<std::size_t>(n), {0.3, 0.9}, "t");
              fill_extra(r, "b", {0.3, 0.9});
              fill_extra(r, "c", {0.3, 0.9});
              fill_extra(r, "d", {0.3, 0.9});
            },
            [&](const ParamFile& r) {
              const auto P = param_set(r);
              SeriesResult<C> res;
              res.value = milne_sum_sides(P.t, P.extra("b"), P.extra("c"), P.extra("d"),
                                          std::vector<long>(static_cast<std::size_t>(n), N), moduli(r),
                                          default_policy<C>(), &res.max_term)
                              .first;
              return conditioning(res);
            });
        const auto P = param_set(pf);
        const auto [lhs, rhs] = milne_sum_sides(P.t, P.extra("b"), P.extra("c"), P.extra("d"),
                                                std::vector<long>(static_cast<std::size_t>(n), N), moduli(pf));
        emit(compare("milne n=" + std::to_string(n) + " N=" + std::to_string(N), lhs, rhs, tl));
      }
    }
  }

  void gustafson_rakha() {
    const double tl = tol(1e-9);
    std::vector<int> dims;
    std::vector<long> Ns;
    if (o_.n) dims = {*o_.n};
    else dims = {2, 3};
    if (o_.m) Ns = {*o_.m};
    else Ns = {0, 1, 2, 3};
    for (int n : dims) {
      if (n < 1) fail(ErrorKind::InvalidSpec, "gustafson_rakha: n must be positive");
      for (long N : Ns) {
        if (N < 0) fail(ErrorKind::InvalidSpec, "N must be nonnegative");
        // t holds t_1..t_{n-1} and the three extra parameters; t_n closes prod t = q^-N.
        const auto pf = sample(
            "gustafson_rakha",
            [&](ParamFile& r) {
              series_moduli(r);
              fill(r.t, static_cast<std::size_t>(n - 1 + 3), {0.3, 0.9}, "t");
              fill_extra(r, "t", {0.3, 0.9});
            },
            [&](const ParamFile& r) {
              SeriesResult<C> res;
              res.value = gr_sides(r, n, N, &res.max_term).first;
              return conditioning(res);
            });
        const auto [lhs, rhs] = gr_sides(pf, n, N, nullptr);
        emit(compare("gustafson_rakha n=" + std::to_string(n) + " N=" + std::to_string(N) +
                         " (numerical support for a conjecture)",
                     lhs, rhs, tl));
      }
    }
  }

  static std::pair<C, C> gr_sides(const ParamFile& r, int n, long N, R* max_term) {
    const auto m = moduli(r);
    const auto all = cv(r.t);
    std::vector<C> t(all.begin(), all.begin() + (n - 1));
    C prod(1);
    for (const C& v : t) prod *= v;
    t.push_back(ipow(m.q, -N) / prod);
    const std::array<C, 3> tx{all[static_cast<std::size_t>(n - 1)], all[static_cast<std::size_t>(n)],
                              all[static_cast<std::size_t>(n + 1)]};
    return gustafson_rakha_sum_sides(t, tx, c(r.extras.at("t")), N, m, default_policy<C>(), max_term);
  }

  void kratt() {
    const double tl = tol(1e-10);
    std::vector<int> dims;
    if (o_.n) dims = {*o_.n};
    else dims = {1, 2, 3, 4, 5};
    for (int n : dims) {
      if (n < 1) fail(ErrorKind::InvalidSpec, "kratt: n must be positive");
      const auto pf = sample(
          "kratt",
          [&](ParamFile& r) {
            fill(r.q, {0.1, 0.4});
            fill(r.p, {0.1, 0.4});
            fill(r.x, static_cast<std::size_t>(n), {0.5, 1.5}, "x");
            fill_extra(r, "a", {0.3, 1.5});
            fill_extra(r, "b", {0.3, 1.5});
            fill_extra(r, "c", {0.3, 1.5});
          },
          [](const ParamFile&) { return std::string(); });
      const auto P = param_set(pf);
      const auto [det, prod] = krattenthaler_det_sides(P.extra("a"), P.extra("b"), P.extra("c"), P.x, moduli(pf));
      emit(compare("kratt n=" + std::to_string(n), det, prod, tl));
    }
  }

  // ------------------------------------------------------------ theta identities

  // Worst relative residual over the draws, as one report.
  void worst_of(const std::string& name, int count, const std::function<IdentityResidual<C>()>& one, double tl) {
    IdentityResidual<C> worst;
    worst.scale = R(1);
    bool first = true;
    for (int d = 0; d < count; ++d) {
      const auto r = one();
      if (first || r.relative() > worst.relative()) worst = r;
      first = false;
    }
    emit_residual(name + " draws=" + std::to_string(count) + " worst", worst, tl);
  }

  void ident() {
    const double tl = tol(1e-12);
    worst_of("ident", draws(1000), [&] {
      const auto pf = sample(
          "ident",
          [&](ParamFile& r) {
            fill(r.p, {0.1, 0.5});
            fill(r.z, 4, {0.2, 2.0}, "z");
          },
          [](const ParamFile&) { return std::string(); });
      const auto z = cv(pf.z);
      return riemann_identity_residual(z[0], z[1], z[2], z[3], c(*pf.p));
    }, tl);
  }

  int identity_size() const { return o_.n.value_or(2); }

  void id1() {
    const double tl = tol(1e-12);
    const int n = identity_size();
    if (n < 1) fail(ErrorKind::InvalidSpec, "id1: n must be positive");
    worst_of("id1 n=" + std::to_string(n), draws(1000), [&] {
      const auto pf = sample(
          "id1",
          [&](ParamFile& r) {
            fill(r.p, {0.1, 0.5});
            fill(r.t, static_cast<std::size_t>(n + 1), {0.2, 2.0}, "t");
            fill(r.z, static_cast<std::size_t>(n), {0.5, 1.5}, "z");
            fill_extra(r, "B", {0.2, 2.0});
          },
          [](const ParamFile&) { return std::string(); });
      auto z = cv(pf.z);
      C prod(1);
      for (const C& v : z) prod *= v;
      z.push_back(C(1) / prod);
      return id1_residual(cv(pf.t), z, c(pf.extras.at("B")), c(*pf.p));
    }, tl);
  }

  void id2() {
    const double tl = tol(1e-12);
    const int n = o_.n.value_or(3);
    if (n < 1) fail(ErrorKind::InvalidSpec, "id2: n must be positive");
    worst_of("id2 n=" + std::to_string(n), draws(1000), [&] {
      const auto pf = sample(
          "id2",
          [&](ParamFile& r) {
            fill(r.p, {0.1, 0.5});
            fill(r.f, static_cast<std::size_t>(n), {0.2, 2.0}, "f");
            fill(r.s, static_cast<std::size_t>(n), {0.2, 2.0}, "s");
            fill_extra(r, "t", {0.2, 2.0});
          },
          [](const ParamFile& r) {
            cplx a(1), b(1);
            for (const cplx& v : r.f) a *= v;
            for (const cplx& v : r.s) b *= v;
            return std::abs(a - b) > 1e-6 * std::abs(b) ? std::string() : std::string("prod a = prod b");
          });
      return partial_fraction_residual(cv(pf.f), cv(pf.s), c(pf.extras.at("t")), c(*pf.p));
    }, tl);
  }

  void id3() {
    const double tl = tol(1e-12);
    const int n = identity_size();
    if (n < 1) fail(ErrorKind::InvalidSpec, "id3: n must be positive");
    worst_of("id3 n=" + std::to_string(n), draws(1000), [&] {
      const auto pf = sample(
          "id3",
          [&](ParamFile& r) {
            fill(r.p, {0.1, 0.5});
            fill(r.t, static_cast<std::size_t>(n + 1), {0.2, 2.0}, "t");
            fill(r.f, static_cast<std::size_t>(n + 2), {0.2, 2.0}, "f");
          },
          [](const ParamFile&) { return std::string(); });
      return id3_residual(cv(pf.t), cv(pf.f), c(*pf.p));
    }, tl);
  }

  // ------------------------------------------------------------ A_n equation and transformation

  void an_diffeq() {
    const double tl_cf = tol(1e-12), tl_int = tol(1e-8);
    std::vector<int> dims;
    if (o_.n) dims = {*o_.n};
    else dims = {1, 2, 3};
    for (int n : dims) {
      if (n < 1) fail(ErrorKind::InvalidSpec, "an_diffeq: n must be positive");
      const bool integral = n == 1 || (o_.n && n <= 2);
      const auto pf = sample(
          "an_diffeq",
          [&](ParamFile& r) {
            fill(r.q, {0.25, 0.35});
            fill(r.p, {0.15, 0.25});
            fill(r.t, static_cast<std::size_t>(n + 1), {0.85, 0.95}, "t");
            fill(r.f, static_cast<std::size_t>(n + 2), {0.85, 0.95}, "f");
          },
          [&](const ParamFile& r) { return integral ? shifted_domain(r) : std::string(); });
      const auto m = moduli(pf);
      const auto t = cv(pf.t), f = cv(pf.f);
      const std::string base = "an_diffeq n=" + std::to_string(n);
      emit_residual(base + " closed-form q", an_difference_residual(t, f, m, DiffSide::CLOSED_FORM), tl_cf);
      emit_residual(base + " closed-form p", an_difference_residual(t, f, m.swapped(), DiffSide::CLOSED_FORM), tl_cf);
      if (integral) {
        const double tl = o_.tol ? *o_.tol : tl_int;
        emit_residual(base + " integral q",
                      an_difference_residual(t, f, m, DiffSide::INTEGRAL, quad_config(n, tl)), tl);
      }
    }
  }

  // The quadrature side needs every q- and p-shifted parameter set in the domain.
  static std::string shifted_domain(const ParamFile& r) {
    const auto m = moduli(r);
    const auto t = cv(r.t), f = cv(r.f);
    for (const C& shift : {C(1), m.q, m.p})
      for (std::size_t k = 0; k < (shift == C(1) ? 1 : t.size()); ++k) {
        auto ts = t;
        ts[k] *= shift;
        const auto v = validate_domain(an_I_spec(ts, f, m));
        if (!v.pass) return v.describe_failures();
      }
    return {};
  }

  void an_transform() {
    const double tl = tol(1e-8);
    const int n = o_.n.value_or(1);
    if (n < 1) fail(ErrorKind::InvalidSpec, "an_transform: n must be positive");
    const auto pf = sample(
        "an_transform",
        [&](ParamFile& r) {
          fill(r.q, {0.25, 0.35});
          fill(r.p, {0.15, 0.25});
          fill_extra(r, "t", {0.7, 0.9});
          fill(r.f, static_cast<std::size_t>(n + 2), {0.6, 0.9}, "f");
          fill(r.s, static_cast<std::size_t>(n + 2), {0.6, 0.9}, "s");
        },
        [&](const ParamFile& r) {
          try {
            (void)transform_check_domain(r);
          } catch (const Error& e) {
            if (e.kind() == ErrorKind::DomainViolation) return std::string(e.what());
            throw;
          }
          return std::string();
        });
    const auto sides = an_transformation_sides(c(pf.extras.at("t")), cv(pf.f), cv(pf.s), moduli(pf), quad_config(n, tl));
    auto r = compare("an_transform n=" + std::to_string(n), sides.lhs, sides.rhs, tl);
    r.nodes = sides.nodes;
    emit(r);
  }

  // Domain conditions only (no quadrature): an 8-node run raises the same errors.
  static bool transform_check_domain(const ParamFile& r) {
    using std::abs;
    const auto m = moduli(r);
    const C t = c(r.extras.at("t"));
    const auto f = cv(r.f), s = cv(r.s);
    const int n = static_cast<int>(f.size()) - 2;
    C B(1), S(1);
    for (const C& x : f) B *= x;
    for (const C& x : s) S *= x;
    const C tn1 = ipow(t, n + 1), pq = m.q * m.p;
    auto bad = [](bool cond, const std::string& what) {
      if (cond) fail(ErrorKind::DomainViolation, what);
    };
    bad(!(abs(t) < 1), "|t| < 1 violated");
    for (const C& x : f) bad(!(abs(x) < 1), "|f_j| < 1 violated");
    for (const C& x : s) bad(!(abs(x) < 1), "|s_j| < 1 violated");
    bad(!(abs(pq) < abs(C(tn1 * B))), "|pq| < |t^{n+1} B| violated");
    bad(!(abs(pq) < abs(C(tn1 * S))), "|pq| < |t^{n+1} S| violated");
    return true;
  }

  // ------------------------------------------------------------ biorthogonality

  static RahmanParams<C> rahman(const ParamFile& r) {
    const auto t = cv(r.t);
    return RahmanParams<C>::make({t[0], t[1], t[2], t[3], t[4]}, moduli(r));
  }

  // t0..t3 near the unit circle with spread phases, t4 small: the region
  // where the one-index cells up to 3 are admissible.
  void fill_admissible(ParamFile& r) {
    fill(r.q, {0.75, 0.8}, 0.2, 0.4);
    fill(r.p, {0.08, 0.1}, -0.6, -0.4);
    if (r.t.empty()) {
      for (int k = 0; k < 4; ++k) {
        const double centre = kTwoPi * k / 4.0;
        r.t.push_back(draw({0.83, 0.87}, centre - 0.3, centre + 0.3));
      }
      r.t.push_back(draw({0.38, 0.45}));
    }
    fill(r.t, 5, {0.0, 0.0}, "t");
  }

  // Moderate moduli for the cells that need residue corrections: the
  // crossing poles then stay well separated.
  void fill_moderate(ParamFile& r) {
    fill(r.q, {0.45, 0.5}, 0.2, 0.4);
    fill(r.p, {0.35, 0.4}, -0.6, -0.4);
    if (r.t.empty()) {
      for (int k = 0; k < 4; ++k) {
        const double centre = kTwoPi * k / 4.0;
        r.t.push_back(draw({0.6, 0.8}, centre - 0.3, centre + 0.3));
      }
      r.t.push_back(draw({0.3, 0.5}));
    }
    fill(r.t, 5, {0.0, 0.0}, "t");
  }

  static std::string rahman_domain(const ParamFile& r) {
    return rahman(r).in_domain() ? std::string() : std::string("needs |t_r| < 1 and |pq| < |A|");
  }

  // Poles close to the unit circle (on either side) stall the trapezoid rule.
  static std::string separated(const std::vector<PoleFamily<C>>& fams, const Moduli<C>& m) {
    using std::abs;
    for (const auto& f : fams)
      for (const C& w : detail::family_points(f, m, R(1e-3)))
        if (abs(R(abs(w) - R(1))) < R(kPoleGap)) return "pole " + detail::pole_str(w) + " too close to the unit circle";
    return {};
  }

  // Domain, then pole separation for every cell the check will integrate.
  template <class Fams>
  static std::string rahman_cells(const ParamFile& r, const Fams& fams_of) {
    std::string why = rahman_domain(r);
    if (!why.empty()) return why;
    const auto rp = rahman(r);
    for (const auto& fams : fams_of(rp)) {
      why = separated(fams, rp.moduli);
      if (!why.empty()) return why;
    }
    return {};
  }

  static std::string gate(const ContourCheck<C>& cc, int n, int m) {
    if (cc.admissible) return {};
    std::ostringstream os;
    const cplx w = to_cd(cc.worst_pole);
    os << "inadmissible contour for n=" << n << " m=" << m << ": worst pole " << format_double(w.real())
       << (w.imag() < 0 ? "-" : "+") << format_double(std::abs(w.imag())) << "i";
    return os.str();
  }

  void biorth() {
    const double tl = tol(1e-8);
    std::vector<std::pair<int, int>> cells;
    if (o_.n || o_.m) {
      cells.push_back({o_.n.value_or(0), o_.m.value_or(0)});
    } else {
      for (int n = 0; n <= 3; ++n)
        for (int m = 0; m <= 3; ++m) cells.push_back({n, m});
    }
    for (auto [n, m] : cells)
      if (n < 0 || m < 0) fail(ErrorKind::InvalidSpec, "biorthogonality indices must be >= 0");
    const auto pf = sample(
        "biorth", [&](ParamFile& r) { fill_admissible(r); },
        [&](const ParamFile& r) {
          std::string why = rahman_domain(r);
          if (!why.empty()) return why;
          const auto rp = rahman(r);
          for (auto [n, m] : cells) {
            why = gate(contour_check(m, n, 0, 0, rp), n, m);
            if (!why.empty()) return why;
          }
          for (auto [n, m] : cells) {
            why = separated(biorth_pole_families(m, n, 0, 0, rp), rp.moduli);
            if (!why.empty()) return why;
          }
          return std::string();
        });
    const auto rp = rahman(pf);
    const auto cfg = contour_config(ContourPolicy::UnitCircleOnly);
    for (auto [n, m] : cells) emit(biorth_integral(n, m, rp, cfg, 0, 0, tl));
  }

  void biorth2() {
    const double tl = tol(1e-8);
    const auto pf = sample("biorth2", [&](ParamFile& r) { fill_moderate(r); }, [](const ParamFile& r) {
      return rahman_cells(r, [](const RahmanParams<C>& rp) {
        std::vector<std::vector<PoleFamily<C>>> v;
        for (int n = 0; n <= 1; ++n)
          for (int l = 0; l <= 1; ++l)
            for (int m = 0; m <= 1; ++m)
              for (int k = 0; k <= 1; ++k) v.push_back(biorth_pole_families(m, n, k, l, rp));
        return v;
      });
    });
    const auto rp = rahman(pf);
    const auto cfg = contour_config(ContourPolicy::ResidueCorrected);
    for (int n = 0; n <= 1; ++n)
      for (int l = 0; l <= 1; ++l)
        for (int m = 0; m <= 1; ++m)
          for (int k = 0; k <= 1; ++k) emit(biorth_integral(n, m, rp, cfg, k, l, tl));
  }

  static std::vector<std::vector<PoleFamily<C>>> intrep_cells(const RahmanParams<C>& rp) {
    std::vector<std::vector<PoleFamily<C>>> v;
    for (int m = 0; m <= 2; ++m)
      for (int n = 0; n <= 2; ++n) v.push_back(intrep_pole_families(m, n, rp));
    return v;
  }

  void intrep() {
    const double tl = tol(1e-8);
    const auto pf = sample(
        "intrep",
        [&](ParamFile& r) {
          fill_moderate(r);
          fill_extra(r, "alpha", {0.3, 0.9});
          fill_extra(r, "beta", {0.3, 0.9});
        },
        [](const ParamFile& r) { return rahman_cells(r, intrep_cells); });
    const auto rp = rahman(pf);
    const auto cfg = contour_config(ContourPolicy::ResidueCorrected);
    const C alpha = c(pf.extras.at("alpha")), beta = c(pf.extras.at("beta"));
    for (int m = 0; m <= 2; ++m)
      for (int n = 0; n <= 2; ++n) {
        long long nodes = 0;
        const auto [lhs, rhs] = twelveV_integral_rep_sides(alpha, beta, m, n, rp, cfg, &nodes);
        auto r = compare("intrep m=" + std::to_string(m) + " n=" + std::to_string(n), lhs, rhs, tl);
        r.nodes = nodes;
        emit(r);
      }
  }

  void shifted_beta() {
    const double tl = tol(1e-8);
    const auto pf = sample("shifted_beta", [&](ParamFile& r) { fill_moderate(r); },
                           [](const ParamFile& r) { return rahman_cells(r, intrep_cells); });
    const auto rp = rahman(pf);
    const auto cfg = contour_config(ContourPolicy::ResidueCorrected);
    for (int i = 0; i <= 2; ++i)
      for (int j = 0; j <= 2; ++j) emit(shifted_beta_identity(i, j, rp, cfg, tl));
  }

  // ------------------------------------------------------------ degenerations

  void degeneration_p0() {
    const double tl = tol(1e-6);
    const auto pf = sample(
        "degeneration_p0",
        [&](ParamFile& r) {
          fill(r.q, {0.25, 0.35});
          if (!r.p) r.p = cplx(1e-10, 0.0);
          fill(r.t, 5, {0.3, 0.85}, "t");
        },
        [&](const ParamFile& r) { return validation(spec(Family::E, 1, r)); });
    const auto s = spec(Family::E, 1, pf);
    const C q = s.moduli.q;
    const auto& t = s.params.t;
    C A(1);
    for (const C& x : t) A *= x;
    C nr = C(2) / qpochhammer(q, q);
    for (const C& x : t) nr *= qpochhammer(C(A / x), q);
    for (std::size_t i = 0; i < t.size(); ++i)
      for (std::size_t j = i + 1; j < t.size(); ++j) nr /= qpochhammer(C(t[i] * t[j]), q);
    emit(integral_report("degeneration_p0 beta integral vs p=0 closed form", s, nr, tl));

    const double tl_g = o_.tol ? *o_.tol : 1e-13;
    const EllipticGamma<C> g(Moduli<C>(q, C(0)));
    worst_of("degeneration_p0 Gamma(z;q,0)(z;q)_inf=1", draws(100), [&] {
      const cplx z = draw({0.2, 2.0});
      IdentityResidual<C> r;
      r.residual = g(c(z)) * qpochhammer(c(z), q) - C(1);
      r.scale = R(1);
      return r;
    }, tl_g);
  }
};

template <class C>
VerifyOutcome verify_in(const std::string& name, const VerifyOptions& opts) {
  Runner<C> r(opts, false);
  r.run(name);
  return std::move(r.out);
}

template <class C>
ParamFile resolve_in(const std::string& name, const VerifyOptions& opts) {
  Runner<C> r(opts, true);
  try {
    r.run(name);
  } catch (const DryRun&) {
  }
  return r.out.drawn;
}

}  // namespace

VerifyOutcome run_verify(const std::string& name, const VerifyOptions& opts) {
  if (!in_registry(name)) fail(ErrorKind::InvalidSpec, "unknown identity '" + name + "'");
  return opts.precision == Precision::Extended ? verify_in<cplx_ext>(name, opts) : verify_in<cplx>(name, opts);
}

ParamFile resolve_params(const std::string& name, const VerifyOptions& opts) {
  if (!in_registry(name)) fail(ErrorKind::InvalidSpec, "unknown identity '" + name + "'");
  return opts.precision == Precision::Extended ? resolve_in<cplx_ext>(name, opts) : resolve_in<cplx>(name, opts);
}

// ---------------------------------------------------------------- eval

const std::vector<std::string>& eval_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v = {"theta",  "qpoch", "theta_factorial", "theta1", "gamma", "gamma_lattice",
                                  "G",      "S",     "sum_V"};
    for (Family f : {Family::E, Family::Cn_I, Family::Cn_II, Family::Cn_III, Family::An_I, Family::An_II,
                     Family::An_III, Family::GENERIC_VWP, Family::MINUS_A}) {
      v.push_back(std::string("delta_") + to_string(f));
      v.push_back(std::string("closed_") + to_string(f));
    }
    return v;
  }();
  return names;
}

namespace {

template <class C>
C eval_in(const std::string& fn, const ParamFile& pf, std::optional<int> n) {
  auto c = [](const cplx& z) { return from_cd<C>(z); };
  auto need = [&](const std::optional<cplx>& v, const char* what) {
    if (!v) fail(ErrorKind::InvalidSpec, fn + " needs --" + what);
    return c(*v);
  };
  auto z0 = [&] {
    if (pf.z.empty()) fail(ErrorKind::InvalidSpec, fn + " needs --z");
    return c(pf.z[0]);
  };
  auto extra = [&](const std::string& k) {
    auto it = pf.extras.find(k);
    if (it == pf.extras.end()) fail(ErrorKind::InvalidSpec, fn + " needs --" + k);
    return c(it->second);
  };
  auto cvec = [&](const std::vector<cplx>& v) {
    std::vector<C> r;
    for (const cplx& z : v) r.push_back(c(z));
    return r;
  };

  if (fn == "theta") return theta(z0(), need(pf.p, "p"));
  if (fn == "qpoch") return qpochhammer(z0(), need(pf.q, "q"));
  if (fn == "theta_factorial") {
    if (!n) fail(ErrorKind::InvalidSpec, fn + " needs --n");
    return theta_factorial(z0(), need(pf.p, "p"), need(pf.q, "q"), *n);
  }
  if (fn == "theta1") return theta1(extra("u"), extra("sigma"), extra("tau"));
  if (fn == "gamma") return EllipticGamma<C>(Moduli<C>(need(pf.q, "q"), need(pf.p, "p")))(z0());
  if (fn == "gamma_lattice") return elliptic_gamma_lattice(z0(), Moduli<C>(need(pf.q, "q"), need(pf.p, "p")));
  if (fn == "G") return modified_gamma_G(extra("u"), QuasiPeriods<C>(extra("w1"), extra("w2"), extra("w3")));
  if (fn == "S") return double_sine(extra("u"), extra("w1"), extra("w2"));
  if (fn == "sum_V") {
    VSpec<C> s{extra("t0"), cvec(pf.t), pf.extras.count("x") ? extra("x") : C(1),
               Moduli<C>(need(pf.q, "q"), need(pf.p, "p")), std::nullopt};
    if (n) s.N = *n;
    return sum_V(s).value;
  }
  const bool is_delta = fn.rfind("delta_", 0) == 0;
  const bool is_closed = fn.rfind("closed_", 0) == 0;
  if (is_delta || is_closed) {
    const Family fam = family_from_string(fn.substr(is_delta ? 6 : 7));
    IntegrandSpec<C> s{fam, 1, {}, Moduli<C>(need(pf.q, "q"), need(pf.p, "p"))};
    s.params.t = cvec(pf.t);
    s.params.f = cvec(pf.f);
    s.params.s = cvec(pf.s);
    s.params.x = cvec(pf.x);
    s.params.w = cvec(pf.w);
    for (const auto& [k, v] : pf.extras) s.params.extras[k] = c(v);
    const bool single = fam == Family::E || fam == Family::GENERIC_VWP || fam == Family::MINUS_A;
    if (single) {
      if (n) s.m = *n;
    } else {
      s.n = n ? *n : static_cast<int>(pf.z.size());
    }
    if (is_closed) return rhs_closed_form(s);
    const Integrand<C> F(s);
    const auto z = cvec(pf.z);
    return F(z);
  }
  fail(ErrorKind::InvalidSpec, "unknown function '" + fn + "'");
}

}  // namespace

cplx run_eval(const std::string& fn, const ParamFile& pf, std::optional<int> n, Precision precision) {
  if (precision == Precision::Extended) return to_cd(eval_in<cplx_ext>(fn, pf, n));
  return eval_in<cplx>(fn, pf, n);
}

}  // namespace ehv
