#pragma once

// Theta-function identities, the elliptic Krattenthaler determinant and the
// difference equation / symmetry transformation of the A_n type I integral.
// Residuals come with a scale: the largest participating term.

#include <cmath>
#include <complex>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <boost/multiprecision/eigen.hpp>

#include "ehv/error.hpp"
#include "ehv/gamma_fn.hpp"
#include "ehv/integrands.hpp"
#include "ehv/numeric.hpp"
#include "ehv/quadrature.hpp"
#include "ehv/special_core.hpp"

namespace ehv {

template <class C>
struct IdentityResidual {
  C residual{};
  real_t<C> scale{};
  long long nodes = 0;

  real_t<C> relative() const {
    using std::abs;
    return scale == 0 ? abs(residual) : abs(residual) / scale;
  }
};

namespace detail {

template <class C>
void track(real_t<C>& s, const C& v) {
  using std::abs;
  if (abs(v) > s) s = abs(v);
}

template <class C>
C nonzero_theta(const C& z, const C& p, const char* what) {
  const C v = theta(z, p);
  if (is_zero(v)) fail(ErrorKind::DegenerateConfiguration, what);
  return v;
}

}  // namespace detail

// theta(xw,x/w,yz,y/z) - theta(xz,x/z,yw,y/w) - (y/w) theta(xy,x/y,wz,w/z)
template <class C>
IdentityResidual<C> riemann_identity_residual(const C& x, const C& y, const C& z, const C& w,
                                              const C& p) {
  auto th = [&](const C& a) { return theta(a, p); };
  const C t1 = th(C(x * w)) * th(C(x / w)) * th(C(y * z)) * th(C(y / z));
  const C t2 = th(C(x * z)) * th(C(x / z)) * th(C(y * w)) * th(C(y / w));
  const C t3 = y / w * th(C(x * y)) * th(C(x / y)) * th(C(w * z)) * th(C(w / z));
  IdentityResidual<C> r;
  r.residual = t1 - t2 - t3;
  detail::track(r.scale, t1);
  detail::track(r.scale, t2);
  detail::track(r.scale, t3);
  return r;
}

// prod_k theta(t/b_k)/theta(t/a_k) minus its partial-fraction expansion.
template <class C>
IdentityResidual<C> partial_fraction_residual(const std::vector<C>& a, const std::vector<C>& b,
                                              const C& t, const C& p) {
  using std::abs;
  const std::size_t n = a.size();
  if (n == 0 || b.size() != n) fail(ErrorKind::InvalidSpec, "partial fractions: a and b need equal nonzero length");
  C pa(1), pb(1);
  for (std::size_t i = 0; i < n; ++i) {
    pa *= a[i];
    pb *= b[i];
  }
  if (abs(C(pa - pb)) <= real_t<C>(1e-14) * abs(pb))
    fail(ErrorKind::DegenerateConfiguration, "partial fractions need a_1...a_n != b_1...b_n");
  const C th_ab = detail::nonzero_theta(C(pa / pb), p, "partial fractions: theta(prod a / prod b) vanishes");
  IdentityResidual<C> r;
  C lhs(1);
  for (std::size_t k = 0; k < n; ++k)
    lhs *= theta(C(t / b[k]), p) / detail::nonzero_theta(C(t / a[k]), p, "partial fractions: pole at t = a_k");
  detail::track(r.scale, lhs);
  C rhs(0);
  for (std::size_t i = 0; i < n; ++i) {
    C term = theta(C(t * pa / (a[i] * pb)), p) / (theta(C(t / a[i]), p) * th_ab);
    for (std::size_t j = 0; j < n; ++j) {
      term *= theta(C(a[i] / b[j]), p);
      if (j != i) term /= detail::nonzero_theta(C(a[i] / a[j]), p, "partial fractions: theta(a_r/a_j) vanishes");
    }
    detail::track(r.scale, term);
    rhs += term;
  }
  r.residual = lhs - rhs;
  return r;
}

// sum_r theta(B t_r)/theta(A) prod_{j!=r} theta(AB t_j)/theta(t_r/t_j)
//   prod_k theta(t_r/z_k)/theta(AB z_k)  -  1,  with A = prod t, prod z = 1.
template <class C>
IdentityResidual<C> id1_residual(const std::vector<C>& t, const std::vector<C>& z, const C& B,
                                 const C& p) {
  using std::abs;
  const std::size_t N = t.size();
  if (N < 2 || z.size() != N) fail(ErrorKind::InvalidSpec, "id1: need n+1 t's and n+1 z's");
  C pz(1), A(1);
  for (std::size_t k = 0; k < N; ++k) {
    pz *= z[k];
    A *= t[k];
  }
  if (abs(C(pz - C(1))) > real_t<C>(1e-12))
    fail(ErrorKind::DegenerateConfiguration, "id1 needs z_1...z_{n+1} = 1");
  const C AB = A * B;
  const C thA = detail::nonzero_theta(A, p, "id1: theta(A) vanishes");
  IdentityResidual<C> r;
  C sum(0);
  for (std::size_t i = 0; i < N; ++i) {
    C term = theta(C(B * t[i]), p) / thA;
    for (std::size_t j = 0; j < N; ++j)
      if (j != i) term *= theta(C(AB * t[j]), p) / detail::nonzero_theta(C(t[i] / t[j]), p, "id1: t_r = t_j p^k");
    for (std::size_t k = 0; k < N; ++k)
      term *= theta(C(t[i] / z[k]), p) / detail::nonzero_theta(C(AB * z[k]), p, "id1: theta(AB z_k) vanishes");
    detail::track(r.scale, term);
    sum += term;
  }
  detail::track(r.scale, C(1));
  r.residual = sum - C(1);
  return r;
}

// prod_j theta(AB/f_j) / prod_j theta(AB t_j) minus
// sum_r prod_j theta(t_r f_j) / prod_{j!=r} theta(t_r/t_j) / theta(AB t_r).
template <class C>
IdentityResidual<C> id3_residual(const std::vector<C>& t, const std::vector<C>& f, const C& p) {
  const std::size_t N = t.size();
  if (N < 2 || f.size() != N + 1) fail(ErrorKind::InvalidSpec, "id3: need n+1 t's and n+2 f's");
  C A(1), B(1);
  for (const C& x : t) A *= x;
  for (const C& x : f) B *= x;
  const C AB = A * B;
  IdentityResidual<C> r;
  C lhs(1);
  for (const C& x : f) lhs *= theta(C(AB / x), p);
  for (const C& x : t) lhs /= detail::nonzero_theta(C(AB * x), p, "id3: theta(AB t_j) vanishes");
  detail::track(r.scale, lhs);
  C rhs(0);
  for (std::size_t i = 0; i < N; ++i) {
    C term = C(1) / theta(C(AB * t[i]), p);
    for (const C& x : f) term *= theta(C(t[i] * x), p);
    for (std::size_t j = 0; j < N; ++j)
      if (j != i) term /= detail::nonzero_theta(C(t[i] / t[j]), p, "id3: t_r = t_j p^k");
    detail::track(r.scale, term);
    rhs += term;
  }
  r.residual = lhs - rhs;
  return r;
}

// Determinant of theta(aX_i, ac/X_i)_{n-j} / theta(bX_i, bc/X_i)_{n-j}
// (partial-pivot LU) and the product formula.
template <class C>
std::pair<C, C> krattenthaler_det_sides(const C& a, const C& b, const C& c, const std::vector<C>& X,
                                        const Moduli<C>& m) {
  const int n = static_cast<int>(X.size());
  if (n < 1) fail(ErrorKind::InvalidSpec, "krattenthaler: need at least one X");
  const C& q = m.q;
  const C& p = m.p;
  auto tf2 = [&](const C& u, const C& v, long k) {
    return theta_factorial(u, p, q, k) * theta_factorial(v, p, q, k);
  };
  Eigen::Matrix<C, Eigen::Dynamic, Eigen::Dynamic> M(n, n);
  for (int i = 0; i < n; ++i) {
    const C x = X[static_cast<std::size_t>(i)];
    for (int j = 1; j <= n; ++j) {
      const C den = tf2(C(b * x), C(b * c / x), n - j);
      if (is_zero(den)) fail(ErrorKind::PoleHit, "krattenthaler: vanishing denominator");
      M(i, j - 1) = tf2(C(a * x), C(a * c / x), n - j) / den;
    }
  }
  const C det = M.partialPivLu().determinant();
  auto binom = [](long nn, long k) {
    if (k > nn) return 0L;
    long r = 1;
    for (long i = 1; i <= k; ++i) r = r * (nn - k + i) / i;
    return r;
  };
  C rhs = ipow(a, binom(n, 2)) * ipow(q, binom(n, 3));
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const C xi = X[static_cast<std::size_t>(i)], xj = X[static_cast<std::size_t>(j)];
      rhs *= xj * theta(C(xi / xj), p) * theta(C(c / (xi * xj)), p);
    }
  for (int i = 1; i <= n; ++i) {
    const C x = X[static_cast<std::size_t>(i - 1)];
    const C den = tf2(C(b * x), C(b * c / x), n - 1);
    if (is_zero(den)) fail(ErrorKind::PoleHit, "krattenthaler: vanishing denominator");
    rhs *= tf2(C(b / a), C(a * b * c * ipow(q, 2 * n - 2 * i)), i - 1) / den;
  }
  return {det, rhs};
}

enum class DiffSide { INTEGRAL, CLOSED_FORM };

template <class C>
IntegrandSpec<C> an_I_spec(const std::vector<C>& t, const std::vector<C>& f, const Moduli<C>& m) {
  IntegrandSpec<C> s{Family::An_I, static_cast<int>(t.size()) - 1, {}, m};
  s.params.t = t;
  s.params.f = f;
  return s;
}

// sum_r c_r I_n(.., q t_r, ..) - I_n(t, f) for the A_n type I integral,
// evaluated by quadrature or by its closed form. Only the quadrature side
// requires the shifted parameters to stay in the convergence domain.
template <class C>
IdentityResidual<C> an_difference_residual(const std::vector<C>& t, const std::vector<C>& f,
                                           const Moduli<C>& m, DiffSide side,
                                           const QuadratureConfig& cfg = {}) {
  using std::abs;
  const int n = static_cast<int>(t.size()) - 1;
  if (n < 1 || f.size() != t.size() + 1) fail(ErrorKind::InvalidSpec, "an_diffeq: need n+1 t's and n+2 f's");
  if (side == DiffSide::INTEGRAL && n > 2) fail(ErrorKind::InvalidSpec, "an_diffeq integral side supports n <= 2");
  const C& p = m.p;
  C A(1), B(1);
  for (const C& x : t) A *= x;
  for (const C& x : f) B *= x;
  IdentityResidual<C> r;
  auto value = [&](const std::vector<C>& tt) {
    const auto spec = an_I_spec(tt, f, m);
    if (side == DiffSide::CLOSED_FORM) {
      check_param_counts(spec);
      return rhs_closed_form(spec);
    }
    const auto v = validate_domain(spec);
    if (!v.pass) fail(ErrorKind::DomainViolation, "an_diffeq: shifted parameters leave the domain: " + v.describe_failures());
    Integrand<C> F(spec);
    QuadratureConfig c = cfg;
    const auto res = torus_integral<C>([&](const C* z) { return F(z); }, n, c, Constraint::AN_PRODUCT_ONE);
    r.nodes += res.nodes_total;
    return res.value;
  };
  const C I0 = value(t);
  C sum(0);
  for (int i = 0; i <= n; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    C coef = theta(C(B * t[ui]), p) / theta(A, p);
    for (int j = 0; j <= n; ++j)
      if (j != i) {
        const auto uj = static_cast<std::size_t>(j);
        coef *= theta(C(A * B * t[uj]), p) / detail::nonzero_theta(C(t[ui] / t[uj]), p, "an_diffeq: t_r = t_j p^k");
      }
    std::vector<C> tt = t;
    tt[ui] *= m.q;
    const C term = coef * value(tt);
    detail::track(r.scale, term);
    sum += term;
  }
  detail::track(r.scale, I0);
  r.residual = sum - I0;
  return r;
}

template <class C>
struct TransformationSides {
  C lhs{}, rhs{};
  long long nodes = 0;
  bool converged = false;
};

// Both sides of the A_n symmetry transformation that exchanges f and s,
// each computed by quadrature.
template <class C>
TransformationSides<C> an_transformation_sides(const C& t, const std::vector<C>& f, const std::vector<C>& s,
                                               const Moduli<C>& m, const QuadratureConfig& cfg = {}) {
  using std::abs;
  const int n = static_cast<int>(f.size()) - 2;
  if (n < 1 || s.size() != f.size()) fail(ErrorKind::InvalidSpec, "an_transform: need n+2 f's and n+2 s's");
  const C pq = m.q * m.p;
  C B(1), S(1);
  for (const C& x : f) B *= x;
  for (const C& x : s) S *= x;
  const C tn1 = ipow(t, n + 1);
  auto bad = [&](bool cond, const std::string& what) {
    if (cond) fail(ErrorKind::DomainViolation, "an_transform: " + what);
  };
  bad(!(abs(t) < 1), "|t| < 1 violated");
  for (const C& x : f) bad(!(abs(x) < 1), "|f_j| < 1 violated");
  for (const C& x : s) bad(!(abs(x) < 1), "|s_j| < 1 violated");
  bad(!(abs(pq) < abs(C(tn1 * B))), "|pq| < |t^{n+1} B| violated");
  bad(!(abs(pq) < abs(C(tn1 * S))), "|pq| < |t^{n+1} S| violated");

  const EllipticGamma<C> g(m);
  TransformationSides<C> out;
  out.converged = true;
  auto side = [&](const std::vector<C>& u, const std::vector<C>& v, const C& U, const C& V) {
    // prod Gamma(U/u_j)/Gamma(t^{n+1} U/u_j) * int prod Gamma(t u_j/z_k, v_j z_k)
    //   / prod_{i!=j} Gamma(z_i/z_j) prod_k Gamma(t^{n+1} V z_k, t U/z_k)
    C pre(1);
    for (const C& x : u) pre *= g(C(U / x)) / g(C(tn1 * U / x));
    auto F = [&](const C* z) {
      std::vector<C> Z(z, z + n);
      C prod(1);
      for (int i = 0; i < n; ++i) prod *= z[i];
      Z.push_back(C(1) / prod);
      C r(1);
      for (std::size_t i = 0; i < Z.size(); ++i)
        for (std::size_t j = i + 1; j < Z.size(); ++j) r *= g.recip_pair(C(Z[i] / Z[j]));
      for (const C& zk : Z) {
        for (const C& x : u) r *= g(C(t * x / zk));
        for (const C& x : v) r *= g(C(x * zk));
        r /= g(C(tn1 * V * zk)) * g(C(t * U / zk));
      }
      return r;
    };
    const auto res = torus_integral<C>(F, n, cfg, Constraint::AN_PRODUCT_ONE);
    out.nodes += res.nodes_total;
    out.converged = out.converged && res.converged;
    return pre * res.value;
  };
  out.lhs = side(f, s, B, S);
  out.rhs = side(s, f, S, B);
  return out;
}

// LHS - RHS of the transformation; NotConverged when either quadrature
// stops short of cfg.rel_tol.
template <class C>
IdentityResidual<C> an_transformation_residual(const C& t, const std::vector<C>& f, const std::vector<C>& s,
                                               const Moduli<C>& m, const QuadratureConfig& cfg = {}) {
  const auto sides = an_transformation_sides(t, f, s, m, cfg);
  if (!sides.converged) fail(ErrorKind::NotConverged, "an_transform: quadrature did not converge");
  IdentityResidual<C> r;
  r.residual = sides.lhs - sides.rhs;
  detail::track(r.scale, sides.lhs);
  detail::track(r.scale, sides.rhs);
  r.nodes = sides.nodes;
  return r;
}

}  // namespace ehv
