#pragma once

// Biorthogonal 12V11 functions R_n, T_n and their two-base products, the
// difference operator D_mu with its adjoint, the three-term recurrence, and
// the elliptic-beta-weight integrals they satisfy.
//
// Contours: every integral runs over the unit circle. When some pole of the
// sequences that must lie inside sits outside instead, the default policy
// raises InadmissibleContour. ContourPolicy::ResidueCorrected adds
// 2 Res_w(F(z)/z) for each such pole w (the integrands are symmetric under
// z -> 1/z, so the mirrored pole contributes the same amount); residues are
// taken as trapezoid means on small circles.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "ehv/error.hpp"
#include "ehv/gamma_fn.hpp"
#include "ehv/integrands.hpp"
#include "ehv/numeric.hpp"
#include "ehv/quadrature.hpp"
#include "ehv/report.hpp"
#include "ehv/series.hpp"
#include "ehv/special_core.hpp"

namespace ehv {

template <class C>
struct RahmanParams {
  std::array<C, 5> t{};
  Moduli<C> moduli{};
  C A{};

  static RahmanParams make(const std::array<C, 5>& t, const Moduli<C>& m) {
    RahmanParams r{t, m, C(1)};
    for (const C& x : t) {
      if (is_zero(x)) fail(ErrorKind::InvalidSpec, "Rahman parameters must be nonzero");
      r.A *= x;
    }
    return r;
  }

  // |t_r| < 1 and |pq| < |A|.
  bool in_domain() const {
    using std::abs;
    for (const C& x : t)
      if (!(abs(x) < 1)) return false;
    return abs(C(moduli.q * moduli.p)) < abs(A);
  }

  RahmanParams swapped() const { return make(t, moduli.swapped()); }
};

template <class C>
struct OperatorGauge {
  C mu{1};
  C xi{1.3};
  C eta{C(real_t<C>(0.7), real_t<C>(0.1))};
};

template <class C>
struct ContourCheck {
  bool admissible = true;
  C worst_pole{};
  double worst_margin = 1.0;  // 1 - |worst_pole|
};

enum class ContourPolicy { UnitCircleOnly, ResidueCorrected };

struct ContourConfig {
  QuadratureConfig quad{};
  ContourPolicy policy = ContourPolicy::UnitCircleOnly;
  int residue_nodes = 64;
};

// base * p^(a + p0) * q^(b + q0) for a, b >= 0
template <class C>
struct PoleFamily {
  C base;
  int p0 = 0;
  int q0 = 0;
};

namespace detail {

inline constexpr double kContourMargin = 1e-6;
inline constexpr int kPoleWindow = 24;

template <class C>
C theta_prod(std::initializer_list<C> xs, const C& p) {
  C r(1);
  for (const C& x : xs) r *= theta(x, p);
  return r;
}

// Members of a family with modulus above `floor`, extremal first.
template <class C>
std::vector<C> family_points(const PoleFamily<C>& f, const Moduli<C>& m, real_t<C> floor) {
  using std::abs;
  std::vector<C> out;
  const C start = f.base * ipow(m.p, f.p0) * ipow(m.q, f.q0);
  C pa = start;
  for (int a = 0; a < kPoleWindow; ++a) {
    C w = pa;
    for (int b = 0; b < kPoleWindow; ++b) {
      if (!(abs(w) > floor)) break;
      out.push_back(w);
      w *= m.q;
    }
    if (!(abs(pa) > floor)) break;
    pa *= m.p;
  }
  return out;
}

template <class C>
ContourCheck<C> check_families(const std::vector<PoleFamily<C>>& fams, const Moduli<C>& m) {
  using std::abs;
  ContourCheck<C> c;
  real_t<C> worst(-1);
  for (const auto& f : fams) {
    const C w = f.base * ipow(m.p, f.p0) * ipow(m.q, f.q0);
    if (abs(w) > worst) {
      worst = abs(w);
      c.worst_pole = w;
    }
  }
  c.worst_margin = 1.0 - to_d(worst);
  c.admissible = c.worst_margin >= kContourMargin;
  return c;
}

[[noreturn]] inline void inadmissible(const std::string& what, double margin, const std::string& pole) {
  std::ostringstream os;
  os << what << ": inadmissible contour, the unit circle does not separate the pole sequences (worst pole "
     << pole << ", margin " << margin << ")";
  fail(ErrorKind::InadmissibleContour, os.str());
}

template <class C>
std::string pole_str(const C& w) {
  std::ostringstream os;
  const std::complex<double> v = to_cd(w);
  os << "(" << v.real() << "," << v.imag() << ")";
  return os.str();
}

// Mean of F over the deformed contour for a z <-> 1/z symmetric integrand.
template <class C, class F>
std::pair<C, long long> contour_mean(const F& f, const std::vector<PoleFamily<C>>& fams, const Moduli<C>& mod,
                                     const ContourConfig& cfg, const std::string& what) {
  using std::abs;
  using R = real_t<C>;
  const ContourCheck<C> chk = check_families(fams, mod);
  if (!chk.admissible && cfg.policy == ContourPolicy::UnitCircleOnly)
    inadmissible(what, chk.worst_margin, pole_str(chk.worst_pole));
  const auto q = circle_integral<C>([&](const C& z) { return f(z); }, cfg.quad);
  if (!q.converged) fail(ErrorKind::NotConverged, what + ": unit-circle quadrature did not converge");
  C total = q.value;
  long long nodes = q.nodes_total;
  if (chk.admissible) return {total, nodes};
  if (chk.worst_margin > -kContourMargin)
    inadmissible(what + " (pole on the unit circle)", chk.worst_margin, pole_str(chk.worst_pole));

  // Singular points used to size the residue circles.
  const R lo(1e-3);
  std::vector<C> sing{C(0)};
  for (const auto& fam : fams)
    for (const C& w : family_points(fam, mod, lo)) {
      sing.push_back(w);
      sing.push_back(C(1) / w);
    }
  std::vector<C> crossing;
  for (const auto& fam : fams)
    for (const C& w : family_points(fam, mod, R(1))) {
      if (abs(w) < R(1) + R(kContourMargin))
        inadmissible(what + " (pole on the unit circle)", 1.0 - to_d(abs(w)), pole_str(w));
      bool dup = false;
      for (const C& u : crossing) dup = dup || abs(C(u - w)) <= R(1e-12) * abs(w);
      if (!dup) crossing.push_back(w);
    }
  const int M = std::max(cfg.residue_nodes, 16);
  const auto u = circle_nodes<C>(M);
  for (const C& w : crossing) {
    R d(-1);
    for (const C& s : sing) {
      const R e = abs(C(s - w));
      if (e <= R(1e-12) * abs(w)) continue;
      if (d < 0 || e < d) d = e;
    }
    const R r = R(0.35) * d;
    std::vector<C> vals;
    vals.reserve(static_cast<std::size_t>(M));
    for (const C& uk : u) {
      const C z = w + r * uk;
      vals.push_back(f(z) * r * uk / z);
    }
    total += C(2) * pairwise_sum(vals) / C(R(M));
    nodes += M;
  }
  return {total, nodes};
}

}  // namespace detail

// Weight Delta_E(z) without the 1/(2 pi i); its unit-circle mean is N_E.
template <class C>
class EllipticBetaWeight {
 public:
  explicit EllipticBetaWeight(const RahmanParams<C>& rp)
      : f_(IntegrandSpec<C>{Family::E, 1, make_params(rp), rp.moduli}) {}
  C operator()(const C& z) const { return f_(&z); }
  const EllipticGamma<C>& gamma() const { return f_.gamma(); }

 private:
  static ParamSet<C> make_params(const RahmanParams<C>& rp) {
    ParamSet<C> p;
    p.t.assign(rp.t.begin(), rp.t.end());
    return p;
  }
  Integrand<C> f_;
};

// N_E(t) closed form.
template <class C>
C beta_norm(const RahmanParams<C>& rp) {
  const EllipticGamma<C> g(rp.moduli);
  return detail::rhs_E(std::vector<C>(rp.t.begin(), rp.t.end()), g, pq_pochhammer(rp.moduli));
}

template <class C>
C R_n(const C& z, int n, const RahmanParams<C>& rp) {
  if (n < 0) fail(ErrorKind::InvalidSpec, "R_n needs n >= 0");
  if (n == 0) return C(1);
  const auto& [t0, t1, t2, t3, t4] = rp.t;
  const C q = rp.moduli.q;
  return sum_V(C(t3 / t4),
               {C(q / (t0 * t4)), C(q / (t1 * t4)), C(q / (t2 * t4)), C(t3 * z), C(t3 / z), ipow(q, -n),
                C(rp.A * ipow(q, n - 1) / t4)},
               rp.moduli)
      .value;
}

template <class C>
C T_n(const C& z, int n, const RahmanParams<C>& rp) {
  if (n < 0) fail(ErrorKind::InvalidSpec, "T_n needs n >= 0");
  if (n == 0) return C(1);
  const auto& [t0, t1, t2, t3, t4] = rp.t;
  const C q = rp.moduli.q;
  const C A = rp.A;
  return sum_V(C(A * t3 / q),
               {C(A / t0), C(A / t1), C(A / t2), C(t3 * z), C(t3 / z), ipow(q, -n), C(A * ipow(q, n - 1) / t4)},
               rp.moduli)
      .value;
}

// q-base factor of index n times p-base factor of index m.
template <class C>
C R_nm(const C& z, int n, int m, const RahmanParams<C>& rp) {
  return R_n(z, n, rp) * R_n(z, m, rp.swapped());
}

template <class C>
C T_nm(const C& z, int n, int m, const RahmanParams<C>& rp) {
  return T_n(z, n, rp) * T_n(z, m, rp.swapped());
}

// gamma(z) = theta(z xi, z/xi; p) / theta(z eta, z/eta; p)
template <class C>
C gauge_gamma(const C& z, const OperatorGauge<C>& g, const C& p) {
  const C den = theta(C(z * g.eta), p) * theta(C(z / g.eta), p);
  if (is_zero(den)) fail(ErrorKind::PoleHit, "gauge function evaluated at a pole");
  return theta(C(z * g.xi), p) * theta(C(z / g.xi), p) / den;
}

// Rejects xi = eta p^k, xi = q t4 p^k/(A eta) and eta = xi^{+-1} p^k for |k| <= 3.
template <class C>
void validate_gauge(const OperatorGauge<C>& g, const RahmanParams<C>& rp) {
  using std::abs;
  const C& p = rp.moduli.p;
  const C bad_xi[] = {g.eta, C(rp.moduli.q * rp.t[4] / (rp.A * g.eta))};
  const C bad_eta[] = {g.xi, C(C(1) / g.xi)};
  auto near = [&](const C& a, const C& b) {
    for (int k = -3; k <= 3; ++k) {
      const C v = b * ipow(p, k);
      if (abs(C(a - v)) <= real_t<C>(1e-10) * abs(v)) return true;
      if (is_zero(p)) break;
    }
    return false;
  };
  for (const C& b : bad_xi)
    if (near(g.xi, b)) fail(ErrorKind::InvalidSpec, "gauge xi sits on an excluded lattice");
  for (const C& b : bad_eta)
    if (near(g.eta, b)) fail(ErrorKind::InvalidSpec, "gauge eta sits on an excluded lattice");
}

namespace detail {

template <class C>
C rec_B(const C& x, const RahmanParams<C>& rp, const C& eta) {
  const auto& [t0, t1, t2, t3, t4] = rp.t;
  const C q = rp.moduli.q, p = rp.moduli.p, A = rp.A;
  const C num = theta_prod<C>({x, C(t3 / (t4 * x)), C(q * t3 / (t4 * x)), C(q * x / (t0 * t1)),
                               C(q * x / (t0 * t2)), C(q * x / (t1 * t2)), C(q * q * eta * x / A),
                               C(q * q * x / (A * eta))},
                              p);
  const C den = theta_prod<C>({C(q * t4 * x * x / A), C(q * q * t4 * x * x / A)}, p);
  if (is_zero(den)) fail(ErrorKind::PoleHit, "recurrence coefficient B has a pole");
  return num / den;
}

}  // namespace detail

// R_{n+1}(z) from the three-term recurrence seeded with R_{n-1}, R_n.
template <class C>
C recurrence_next(const C& R_prev, const C& R_curr, int n, const C& z, const RahmanParams<C>& rp,
                  const OperatorGauge<C>& g = {}) {
  using std::abs;
  validate_gauge(g, rp);
  const auto& [t0, t1, t2, t3, t4] = rp.t;
  const C q = rp.moduli.q, p = rp.moduli.p, A = rp.A;
  const C gz = gauge_gamma(z, g, p);
  const C alpha = gauge_gamma(C(ipow(q, n + 1) / t4), g, p);
  const C beta = gauge_gamma(C(ipow(q, n - 2) * A), g, p);
  const C c1 = (gz - alpha) * detail::rec_B(C(A * ipow(q, n - 1) / t4), rp, g.eta);
  const C c0 = n == 0 ? C(0) : (gz - beta) * detail::rec_B(ipow(q, -n), rp, g.eta);
  const C delta = detail::theta_prod<C>({C(q * q * t3 / A), C(q / (t0 * t4)), C(q / (t1 * t4)), C(q / (t2 * t4)),
                                         C(t3 * g.eta), C(t3 / g.eta)},
                                        p);
  const C d = delta * (gz - gauge_gamma(t3, g, p));
  const real_t<C> scale = abs(c0) + abs(d) + abs(gz) + real_t<C>(1);
  if (abs(c1) <= real_t<C>(1e-14) * scale)
    fail(ErrorKind::SingularStep, "recurrence: leading coefficient vanishes");
  return R_curr - (c0 * (R_prev - R_curr) + d * R_curr) / c1;
}

// V_mu(z) and kappa_mu of the difference operator.
template <class C>
C V_mu(const C& z, const C& mu, const RahmanParams<C>& rp) {
  const C q = rp.moduli.q, p = rp.moduli.p, A = rp.A, t4 = rp.t[4];
  const C den = theta(C(z * z), p) * theta(C(q * z * z), p);
  if (is_zero(den)) fail(ErrorKind::PoleHit, "V_mu has a pole at z");
  C r = detail::theta_prod<C>({C(t4 / (q * mu * z)), C(A * mu / (q * q * z)), C(t4 * z / q)}, p) / den;
  for (const C& tr : rp.t) r *= theta(C(tr * z), p);
  return r;
}

template <class C>
C kappa_mu(const C& mu, const RahmanParams<C>& rp) {
  const C q = rp.moduli.q, p = rp.moduli.p, t4 = rp.t[4];
  C r = theta(C(rp.A * mu / (q * t4)), p) * theta(C(C(1) / mu), p);
  for (int i = 0; i < 4; ++i) r *= theta(C(rp.t[static_cast<std::size_t>(i)] * t4 / q), p);
  return r;
}

template <class C>
C apply_D(const std::function<C(const C&)>& f, const C& z, const C& mu, const RahmanParams<C>& rp) {
  const C q = rp.moduli.q;
  const C f0 = f(z);
  return V_mu(z, mu, rp) * (f(C(q * z)) - f0) + V_mu(C(C(1) / z), mu, rp) * (f(C(z / q)) - f0) +
         kappa_mu(mu, rp) * f0;
}

template <class C>
C apply_D_adjoint(const std::function<C(const C&)>& f, const C& z, const C& mu, const RahmanParams<C>& rp) {
  const C q = rp.moduli.q;
  const EllipticBetaWeight<C> w(rp);
  const C w0 = w(z);
  if (is_zero(w0)) fail(ErrorKind::PoleHit, "adjoint operator: weight vanishes at z");
  const C up = w(C(q * z)) / w0, dn = w(C(z / q)) / w0;
  return up * V_mu(C(C(1) / (q * z)), mu, rp) * f(C(q * z)) + dn * V_mu(C(z / q), mu, rp) * f(C(z / q)) +
         (kappa_mu(mu, rp) - V_mu(z, mu, rp) - V_mu(C(C(1) / z), mu, rp)) * f(z);
}

// lambda(mu) for the pair (eta, xi).
template <class C>
C spectral_lambda(const OperatorGauge<C>& g, const RahmanParams<C>& rp) {
  const C q = rp.moduli.q, p = rp.moduli.p, A = rp.A, t4 = rp.t[4];
  const C num = theta(C(g.mu * A * g.eta / (q * t4)), p) * theta(C(g.mu / g.eta), p);
  const C den = theta(C(g.mu * A * g.xi / (q * t4)), p) * theta(C(g.mu / g.xi), p);
  if (is_zero(den)) fail(ErrorKind::PoleHit, "spectral parameter has a pole");
  return num / den;
}

// Conjugating factor g(z) that turns the adjoint pencil into the direct one.
template <class C>
C conjugating_g(const C& z, const C& mu, const RahmanParams<C>& rp) {
  const EllipticGamma<C> G(rp.moduli);
  const C q = rp.moduli.q, A = rp.A, t4 = rp.t[4];
  return G(C(q * mu * z / t4)) * G(C(mu * q / (t4 * z))) * G(C(A * z)) * G(C(A / z)) /
         (G(C(q * q * z / t4)) * G(C(q * q / (t4 * z))) * G(C(A * mu * z / q)) * G(C(A * mu / (q * z))));
}

// g at mu = q^n, written with shifted factorials.
template <class C>
C conjugating_g_n(const C& z, int n, const RahmanParams<C>& rp) {
  const C q = rp.moduli.q, p = rp.moduli.p, A = rp.A, t4 = rp.t[4];
  return theta_factorial(C(q * q * z / t4), p, q, n - 1) * theta_factorial(C(q * q / (t4 * z)), p, q, n - 1) /
         (theta_factorial(C(A * z), p, q, n - 1) * theta_factorial(C(A / z), p, q, n - 1));
}

// Pole sequences that a contour for T_{nl} R_{mk} must keep inside.
template <class C>
std::vector<PoleFamily<C>> biorth_pole_families(int m, int n, int k, int l, const RahmanParams<C>& rp) {
  std::vector<PoleFamily<C>> f;
  for (int i = 0; i < 4; ++i) f.push_back({rp.t[static_cast<std::size_t>(i)], 0, 0});
  f.push_back({rp.t[4], -k, -m});
  f.push_back({C(C(1) / rp.A), 1 - l, 1 - n});
  return f;
}

template <class C>
ContourCheck<C> contour_check(int m, int n, int k, int l, const RahmanParams<C>& rp) {
  return detail::check_families(biorth_pole_families(m, n, k, l, rp), rp.moduli);
}

// Normalisation h_n; `shifted_lead` writes theta(A q^{2n}/(q t4)) instead
// of theta(A q^{2n-1}/t4).
template <class C>
C norm_h(int n, const RahmanParams<C>& rp, bool shifted_lead = false) {
  const auto& [t0, t1, t2, t3, t4] = rp.t;
  const C q = rp.moduli.q, p = rp.moduli.p, A = rp.A;
  const C num = theta(C(A / (q * t4)), p) *
                theta_factorial_multi({q, C(q * t3 / t4), C(t0 * t1), C(t0 * t2), C(t1 * t2), C(A * t3)}, p, q, n) *
                ipow(q, -n);
  const C lead = shifted_lead ? theta(C(A * ipow(q, 2 * n) / (q * t4)), p) : theta(C(A * ipow(q, 2 * n - 1) / t4), p);
  const C den = lead * theta_factorial_multi({C(C(1) / (t3 * t4)), C(t0 * t3), C(t1 * t3), C(t2 * t3),
                                              C(A / (q * t3)), C(A / (q * t4))},
                                             p, q, n);
  if (is_zero(den)) fail(ErrorKind::PoleHit, "norm h_n has a pole");
  return num / den;
}

template <class C>
C norm_h2(int n, int l, const RahmanParams<C>& rp, bool shifted_lead = false) {
  return norm_h(n, rp, shifted_lead) * norm_h(l, rp.swapped(), shifted_lead);
}

// Integral of T_{nl} R_{mk} Delta_E against h_{nl} N_E delta_{mn} delta_{kl}.
// Off-diagonal rel_err is |integral| / (min(|h_{nl}|, |h_{mk}|) |N_E|).
template <class C>
VerificationReport biorth_integral(int n, int m, const RahmanParams<C>& rp, const ContourConfig& cfg = {},
                                   int k = 0, int l = 0, double tol = 1e-8) {
  using std::abs;
  if (n < 0 || m < 0 || k < 0 || l < 0) fail(ErrorKind::InvalidSpec, "biorthogonality indices must be >= 0");
  const EllipticBetaWeight<C> w(rp);
  const RahmanParams<C> rs = rp.swapped();
  auto F = [&](const C& z) {
    C v = T_n(z, n, rp) * R_n(z, m, rp);
    if (l || k) v *= T_n(z, l, rs) * R_n(z, k, rs);
    return v * w(z);
  };
  std::ostringstream name;
  name << "biorth n=" << n << " m=" << m;
  if (k || l) name << " k=" << k << " l=" << l;
  const C NE = beta_norm(rp);
  const real_t<C> scale = std::min(abs(norm_h2(n, l, rp)), abs(norm_h2(m, k, rp))) * abs(NE);
  ContourConfig c = cfg;
  c.quad.abs_scale = std::max(c.quad.abs_scale, to_d(scale));
  const auto [I, nodes] = detail::contour_mean<C>(F, biorth_pole_families(m, n, k, l, rp), rp.moduli, c, name.str());
  VerificationReport r;
  if (n == m && k == l) {
    r = compare(name.str(), I, C(norm_h2(n, l, rp) * NE), tol);
  } else {
    r = compare(name.str(), I, C(0), tol);
    r.rel_err = to_d(abs(I) / scale);
    r.pass = r.rel_err <= tol;
  }
  r.nodes = nodes;
  return r;
}

// Poles that the integral-representation contour keeps inside:
// t_k p^a q^b and A^{-1} q^{b+1-m} p^{a+1-n}.
template <class C>
std::vector<PoleFamily<C>> intrep_pole_families(int m, int n, const RahmanParams<C>& rp) {
  std::vector<PoleFamily<C>> f;
  for (const C& x : rp.t) f.push_back({x, 0, 0});
  f.push_back({C(C(1) / rp.A), 1 - n, 1 - m});
  return f;
}

// (product of two terminating 12V11, prefactor times contour integral).
template <class C>
std::pair<C, C> twelveV_integral_rep_sides(const C& alpha, const C& beta, int m, int n, const RahmanParams<C>& rp,
                                           const ContourConfig& cfg = {}, long long* nodes = nullptr) {
  if (m < 0 || n < 0) fail(ErrorKind::InvalidSpec, "intrep needs m, n >= 0");
  const auto& t = rp.t;
  const C q = rp.moduli.q, p = rp.moduli.p, A = rp.A, t0 = t[0];
  const RahmanParams<C> rs = rp.swapped();
  auto series = [&](const C& base, const C& a, int N, const Moduli<C>& mod) {
    if (N == 0) return C(1);
    return sum_V(C(A * t0 / base),
                 {a, C(t0 * t[1]), C(t0 * t[2]), C(t0 * t[3]), C(t0 * t[4]), ipow(base, -N),
                  C(A * A * ipow(base, N - 1) / a)},
                 mod)
        .value;
  };
  const C lhs = series(q, alpha, m, rp.moduli) * series(p, beta, n, rs.moduli);

  auto tf2 = [](const C& u, const C& v, const C& nome, const C& step, int N) {
    return theta_factorial(u, nome, step, N) * theta_factorial(v, nome, step, N);
  };
  const C pre = tf2(C(A * t0), C(A / t0), p, q, m) * tf2(C(A * t0), C(A / t0), q, p, n) /
                (tf2(C(A / (alpha * t0)), C(A * t0 / alpha), p, q, m) *
                 tf2(C(A / (beta * t0)), C(A * t0 / beta), q, p, n));
  const EllipticBetaWeight<C> w(rp);
  auto F = [&](const C& z) {
    const C num = tf2(C(A * z / alpha), C(A / (alpha * z)), p, q, m) * tf2(C(A * z / beta), C(A / (beta * z)), q, p, n);
    const C den = tf2(C(A * z), C(A / z), p, q, m) * tf2(C(A * z), C(A / z), q, p, n);
    return w(z) * num / den;
  };
  std::ostringstream name;
  name << "intrep m=" << m << " n=" << n;
  const auto [I, used] = detail::contour_mean<C>(F, intrep_pole_families(m, n, rp), rp.moduli, cfg, name.str());
  if (nodes) *nodes = used;
  return {lhs, pre * I / beta_norm(rp)};
}

// (t0/A)^{2ij} N_E(t0 q^i p^j, t1..t4) and the factorial-ratio form.
template <class C>
std::pair<C, C> shifted_beta_closed_forms(int i, int j, const RahmanParams<C>& rp) {
  const auto& t = rp.t;
  const C q = rp.moduli.q, p = rp.moduli.p, A = rp.A, t0 = t[0];
  auto shifted = rp;
  shifted.t[0] = t0 * ipow(q, i) * ipow(p, j);
  shifted = RahmanParams<C>::make(shifted.t, rp.moduli);
  const C first = ipow(C(t0 / A), 2 * i * j) * beta_norm(shifted);
  C second = beta_norm(rp);
  for (int r = 1; r <= 4; ++r) {
    const C x = t[static_cast<std::size_t>(r)];
    second *= theta_factorial(C(t0 * x), p, q, i) * theta_factorial(C(t0 * x), q, p, j) /
              (theta_factorial(C(A / x), p, q, i) * theta_factorial(C(A / x), q, p, j));
  }
  return {first, second};
}

// Integral of Delta_E times the four shifted-factorial ratios against the
// closed form. Without residue correction the shifted set must satisfy the
// beta-integral domain conditions.
template <class C>
VerificationReport shifted_beta_identity(int i, int j, const RahmanParams<C>& rp, const ContourConfig& cfg = {},
                                         double tol = 1e-8) {
  using std::abs;
  if (i < 0 || j < 0) fail(ErrorKind::InvalidSpec, "shifted beta needs i, j >= 0");
  const C q = rp.moduli.q, p = rp.moduli.p, A = rp.A, t0 = rp.t[0];
  std::ostringstream name;
  name << "shifted_beta i=" << i << " j=" << j;
  if (cfg.policy == ContourPolicy::UnitCircleOnly) {
    auto shifted = rp.t;
    shifted[0] = t0 * ipow(q, i) * ipow(p, j);
    if (!RahmanParams<C>::make(shifted, rp.moduli).in_domain())
      fail(ErrorKind::DomainViolation, name.str() + ": shifted parameters leave |t|<1, |pq|<|A|");
  }
  const EllipticBetaWeight<C> w(rp);
  auto F = [&](const C& z) {
    const C num = theta_factorial(C(z * t0), p, q, i) * theta_factorial(C(t0 / z), p, q, i) *
                  theta_factorial(C(z * t0), q, p, j) * theta_factorial(C(t0 / z), q, p, j);
    const C den = theta_factorial(C(z * A), p, q, i) * theta_factorial(C(A / z), p, q, i) *
                  theta_factorial(C(z * A), q, p, j) * theta_factorial(C(A / z), q, p, j);
    return w(z) * num / den;
  };
  const auto [I, nodes] = detail::contour_mean<C>(F, intrep_pole_families(i, j, rp), rp.moduli, cfg, name.str());
  auto r = compare(name.str(), I, shifted_beta_closed_forms(i, j, rp).second, tol);
  r.nodes = nodes;
  return r;
}

}  // namespace ehv
