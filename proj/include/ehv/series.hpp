#pragma once

// Theta hypergeometric series: the general balanced E-series, terminating
// very-well-poised V-series and the summation/transformation identities
// built on them.

#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <optional>
#include <sstream>
#include <utility>
#include <vector>

#include "ehv/error.hpp"
#include "ehv/numeric.hpp"
#include "ehv/report.hpp"
#include "ehv/special_core.hpp"

namespace ehv {

template <class C>
struct SeriesSpec {
  std::vector<C> t;  // numerator parameters t_0..t_s
  std::vector<C> w;  // denominator parameters w_1..w_r (q is implicit)
  std::array<C, 3> alpha{};  // exponent alpha_1 n + alpha_2 n^2 + alpha_3 n^3
  Moduli<C> moduli;
  std::optional<long> n_max;  // explicit cutoff for non-terminating input
};

template <class C>
struct VSpec {
  C t0;
  std::vector<C> t;  // t_1..t_{r-4}
  C x;
  Moduli<C> moduli;
  std::optional<long> N;  // detected from t when absent
};

template <class C>
struct SeriesResult {
  C value{};
  real_t<C> last_term{};
  real_t<C> max_term{};
  long terms = 0;
  bool terminated = false;
  int balance_sign = 0;  // V-series: which square-root sign matched
};

namespace detail {

template <class C>
real_t<C> rel_dev(const C& a, const C& b) {
  using std::abs;
  const real_t<C> s = abs(b);
  return s == 0 ? abs(a) : abs(C(a - b)) / s;
}

inline constexpr double kTerminationTol = 1e-12;
inline constexpr double kBalanceTol = 1e-10;

}  // namespace detail

// Smallest N >= 0 with t = q^{-N} p^{-M} for some M >= 0, if any.
template <class C>
std::optional<long> termination_order(const C& t, const Moduli<C>& m) {
  using std::abs;
  using R = real_t<C>;
  const R tol(detail::kTerminationTol);
  const R floor_mod = R(1) - R(1e-9);
  if (is_zero(m.q)) return std::nullopt;
  C x = t;
  for (long N = 0; N < 100000; ++N) {
    if (abs(x) < floor_mod) break;
    C y = x;
    for (int M = 0; M < 100000; ++M) {
      if (abs(y) < floor_mod) break;
      if (abs(C(y - C(1))) < tol) return N;
      if (is_zero(m.p)) break;
      y *= m.p;
    }
    x *= m.q;
  }
  return std::nullopt;
}

// s = r, alpha_2 = alpha_3 = 0 and t_0...t_s = q w_1...w_r.
template <class C>
bool is_balanced(const SeriesSpec<C>& s) {
  if (s.t.size() != s.w.size() + 1) return false;
  if (!is_zero(s.alpha[1]) || !is_zero(s.alpha[2])) return false;
  C pt(1), pw(s.moduli.q);
  for (const C& v : s.t) pt *= v;
  for (const C& v : s.w) pw *= v;
  return detail::rel_dev(pt, pw) <= real_t<C>(detail::kBalanceTol);
}

template <class C>
SeriesResult<C> sum_E(const SeriesSpec<C>& s,
                      const TruncationPolicy<real_t<C>>& pol = default_policy<C>()) {
  using std::abs;
  using std::exp;
  using R = real_t<C>;
  const Moduli<C>& m = s.moduli;
  if (is_zero(m.q)) fail(ErrorKind::DomainError, "series needs q != 0");
  std::optional<long> N;
  for (const C& v : s.t) {
    if (is_zero(v)) fail(ErrorKind::DomainError, "series parameter is zero");
    auto k = termination_order(v, m);
    if (k && (!N || *k < *N)) N = k;
  }
  long last;
  if (N) {
    last = *N;
  } else if (s.n_max) {
    if (*s.n_max < 1) fail(ErrorKind::InvalidSpec, "n_max must be positive");
    last = *s.n_max;
  } else {
    fail(ErrorKind::NonTerminatingWithoutBound, "series is not terminating and no n_max was given");
  }
  if (s.n_max && N && *s.n_max < last) last = *s.n_max;

  std::vector<C> terms;
  terms.reserve(static_cast<std::size_t>(last) + 1);
  std::vector<C> xt(s.t), xw(s.w);
  C qn = m.q;  // q^{n+1}
  C a(1);
  terms.push_back(a);
  for (long n = 0; n < last; ++n) {
    C num(1), den(1);
    for (C& v : xt) {
      num *= theta(v, m.p, pol);
      v *= m.q;
    }
    den *= theta(qn, m.p, pol);
    for (C& v : xw) {
      den *= theta(v, m.p, pol);
      v *= m.q;
    }
    qn *= m.q;
    if (is_zero(den)) fail(ErrorKind::PoleHit, "series denominator factorial vanishes");
    const R nn(n);
    const C dP = s.alpha[0] + s.alpha[1] * C(R(2) * nn + R(1)) +
                 s.alpha[2] * C(R(3) * nn * nn + R(3) * nn + R(1));
    a *= num / den;
    if (!is_zero(dP)) a *= exp(dP);
    terms.push_back(a);
  }
  if (!N) {
    // tail-decay certificate over the last 10 ratios
    const std::size_t L = terms.size();
    if (L < 12) fail(ErrorKind::NonTerminatingWithoutBound, "n_max too small for a tail certificate");
    for (std::size_t i = L - 10; i < L; ++i) {
      const R d = abs(terms[i - 1]);
      if (d == 0) continue;
      if (!(abs(terms[i]) / d < R(0.9)))
        fail(ErrorKind::NonTerminatingWithoutBound, "term ratios do not certify tail decay");
    }
  }
  SeriesResult<C> r;
  r.value = pairwise_sum(terms);
  r.terms = static_cast<long>(terms.size());
  r.last_term = abs(terms.back());
  r.max_term = 0;
  for (const C& v : terms)
    if (abs(v) > r.max_term) r.max_term = abs(v);
  r.terminated = N.has_value();
  return r;
}

// Checks prod t_m = +- t0^{(r-5)/2} q^{(r-7)/2}; returns the matching sign.
template <class C>
int check_V_balancing(const VSpec<C>& s) {
  using std::sqrt;
  const long r = static_cast<long>(s.t.size()) + 4;
  C prod(1);
  for (const C& v : s.t) prod *= v;
  const C target = ipow(C(sqrt(s.t0)), r - 5) * ipow(C(sqrt(s.moduli.q)), r - 7);
  const real_t<C> tol(detail::kBalanceTol);
  if (detail::rel_dev(prod, target) <= tol) return 1;
  if (detail::rel_dev(prod, C(-target)) <= tol) return -1;
  std::ostringstream os;
  os << "V-series balancing violated (relative deviation "
     << to_d(detail::rel_dev(prod, target)) << ")";
  fail(ErrorKind::BalancingViolation, os.str());
}

template <class C>
SeriesResult<C> sum_V(const VSpec<C>& s,
                      const TruncationPolicy<real_t<C>>& pol = default_policy<C>()) {
  using std::abs;
  using R = real_t<C>;
  const Moduli<C>& m = s.moduli;
  if (is_zero(m.q)) fail(ErrorKind::DomainError, "series needs q != 0");
  if (is_zero(s.t0)) fail(ErrorKind::DomainError, "t0 must be nonzero");
  for (const C& v : s.t)
    if (is_zero(v)) fail(ErrorKind::DomainError, "series parameter is zero");
  std::optional<long> N;
  for (const C& v : s.t) {
    auto k = termination_order(v, m);
    if (k && (!N || *k < *N)) N = k;
  }
  if (!N) fail(ErrorKind::NonTerminatingWithoutBound, "V-series is not terminating: no t_m = q^-N");
  if (s.N && *s.N != *N) {
    std::ostringstream os;
    os << "V-series is not terminating at the requested N=" << *s.N << " (found N=" << *N << ")";
    fail(ErrorKind::NonTerminatingWithoutBound, os.str());
  }
  const int sign = check_V_balancing(s);
  const long last = *N;

  const C th0 = theta(s.t0, m.p, pol);
  if (is_zero(th0)) fail(ErrorKind::PoleHit, "theta(t0;p) vanishes");
  std::vector<C> up(s.t.size() + 1), lo(s.t.size() + 1);
  up[0] = s.t0;
  lo[0] = m.q;
  for (std::size_t j = 0; j < s.t.size(); ++j) {
    up[j + 1] = s.t[j];
    lo[j + 1] = m.q * s.t0 / s.t[j];
  }
  const C qx = m.q * s.x;
  const C q2 = m.q * m.q;
  std::vector<C> terms;
  terms.reserve(static_cast<std::size_t>(last) + 1);
  C F(1);        // running factorial ratio times (qx)^n
  C wp = s.t0;   // t0 q^{2n}
  for (long n = 0;; ++n) {
    terms.push_back(F * theta(wp, m.p, pol) / th0);
    if (n == last) break;
    C num(1), den(1);
    for (std::size_t j = 0; j < up.size(); ++j) {
      num *= theta(up[j], m.p, pol);
      den *= theta(lo[j], m.p, pol);
      up[j] *= m.q;
      lo[j] *= m.q;
    }
    if (is_zero(den)) fail(ErrorKind::PoleHit, "V-series denominator factorial vanishes");
    F *= num / den * qx;
    wp *= q2;
  }
  SeriesResult<C> r;
  r.value = pairwise_sum(terms);
  r.terms = static_cast<long>(terms.size());
  r.last_term = abs(terms.back());
  r.max_term = R(0);
  for (const C& v : terms)
    if (abs(v) > r.max_term) r.max_term = abs(v);
  r.terminated = true;
  r.balance_sign = sign;
  return r;
}

// Convenience: terminating 12V11 (or any r) at x = 1.
template <class C>
SeriesResult<C> sum_V(const C& t0, std::vector<C> t, const Moduli<C>& m,
                      const TruncationPolicy<real_t<C>>& pol = default_policy<C>()) {
  return sum_V(VSpec<C>{t0, std::move(t), C(1), m, std::nullopt}, pol);
}

template <class C>
C frenkel_turaev_rhs(const C& t0, const C& t1, const C& t4, const C& t5, long N,
                     const Moduli<C>& m,
                     const TruncationPolicy<real_t<C>>& pol = default_policy<C>()) {
  const C& q = m.q;
  const C& p = m.p;
  const C num = theta_factorial_multi({C(q * t0), C(q * t0 / (t1 * t4)), C(q * t0 / (t1 * t5)),
                                       C(q * t0 / (t4 * t5))},
                                      p, q, N, pol);
  const C den = theta_factorial_multi({C(q * t0 / (t1 * t4 * t5)), C(q * t0 / t1), C(q * t0 / t4),
                                       C(q * t0 / t5)},
                                      p, q, N, pol);
  if (is_zero(den)) fail(ErrorKind::PoleHit, "Frenkel-Turaev closed form has a vanishing denominator");
  return num / den;
}

// s_0 = q t0^2/(t1 t2 t3), s_i = s_0 t_i / t_0 for i = 1,2,3.
template <class C>
std::array<C, 4> bailey_s_params(const C& t0, const C& t1, const C& t2, const C& t3, const C& q) {
  const C s0 = q * t0 * t0 / (t1 * t2 * t3);
  return {s0, C(s0 * t1 / t0), C(s0 * t2 / t0), C(s0 * t3 / t0)};
}

// Compares 12V11(t0;t1..t7) against prefactor * 12V11(s0;s1,..,s7) where
// (s4,..,s7) is (t4,..,t7) permuted by perm; the prefactor keeps t4, t5.
template <class C>
VerificationReport bailey_transform_check(const std::array<C, 8>& t, long N, const Moduli<C>& m,
                                          const std::array<int, 4>& perm, double tol = 1e-11,
                                          const TruncationPolicy<real_t<C>>& pol = default_policy<C>()) {
  const C& q = m.q;
  const C& p = m.p;
  C prod(1);
  for (int i = 1; i < 8; ++i) prod *= t[static_cast<std::size_t>(i)];
  if (detail::rel_dev(prod, C(t[0] * t[0] * t[0] * q * q)) > real_t<C>(detail::kBalanceTol))
    fail(ErrorKind::BalancingViolation, "Bailey transform needs t1...t7 = t0^3 q^2");
  if (detail::rel_dev(C(t[6] * ipow(q, N)), C(1)) > real_t<C>(detail::kTerminationTol))
    fail(ErrorKind::BalancingViolation, "Bailey transform needs t6 = q^-N");
  std::array<bool, 4> seen{};
  for (int k : perm) {
    if (k < 0 || k > 3 || seen[static_cast<std::size_t>(k)])
      fail(ErrorKind::InvalidSpec, "perm must be a permutation of 0..3");
    seen[static_cast<std::size_t>(k)] = true;
  }
  std::array<C, 4> u;
  for (int k = 0; k < 4; ++k) u[static_cast<std::size_t>(k)] = t[static_cast<std::size_t>(4 + perm[static_cast<std::size_t>(k)])];

  const C lhs = sum_V(t[0], {t[1], t[2], t[3], t[4], t[5], t[6], t[7]}, m, pol).value;
  const auto s = bailey_s_params(t[0], t[1], t[2], t[3], q);
  const C& t0 = t[0];
  const C& a = t[4];
  const C& b = t[5];
  const C pre_num = theta_factorial_multi({C(q * t0), C(q * s[0] / a), C(q * s[0] / b), C(q * t0 / (a * b))}, p, q, N, pol);
  const C pre_den = theta_factorial_multi({C(q * s[0]), C(q * t0 / a), C(q * t0 / b), C(q * s[0] / (a * b))}, p, q, N, pol);
  if (is_zero(pre_den)) fail(ErrorKind::PoleHit, "Bailey prefactor denominator vanishes");
  const C rhs = pre_num / pre_den * sum_V(s[0], {s[1], s[2], s[3], u[0], u[1], u[2], u[3]}, m, pol).value;
  std::ostringstream name;
  name << "bailey N=" << N << " perm=" << perm[0] << perm[1] << perm[2] << perm[3];
  return compare(name.str(), lhs, rhs, tol);
}

template <class C>
struct ContiguousResiduals {
  std::array<C, 3> residual{};
  std::array<real_t<C>, 3> scale{};  // max |coefficient| * max |series term| per relation
  long n = 0;
};

// The three contiguous relations for terminating 12V11 data t = (t0..t7)
// with t6 = q^-n. Series whose coefficient vanishes exactly are skipped.
template <class C>
ContiguousResiduals<C> contiguous_residuals(const std::array<C, 8>& t, const Moduli<C>& m,
                                            const TruncationPolicy<real_t<C>>& pol = default_policy<C>()) {
  using std::abs;
  using R = real_t<C>;
  const C& q = m.q;
  const C& p = m.p;
  auto n_opt = termination_order(t[6], m);
  if (!n_opt) fail(ErrorKind::NonTerminatingWithoutBound, "contiguous relations need t6 = q^-n: not terminating");
  const long n = *n_opt;
  const C t0 = t[0], t6 = t[6], t7 = t[7];
  const std::array<C, 5> T{t[1], t[2], t[3], t[4], t[5]};
  auto th = [&](const C& z) { return theta(z, p, pol); };
  auto E = [&](const C& a0, const std::array<C, 5>& tt, const C& a6, const C& a7) {
    return sum_V(a0, {tt[0], tt[1], tt[2], tt[3], tt[4], a6, a7}, m, pol);
  };
  std::array<C, 5> qT;
  for (int i = 0; i < 5; ++i) qT[static_cast<std::size_t>(i)] = q * T[static_cast<std::size_t>(i)];
  auto prodT = [&](auto f) {
    C r(1);
    for (const C& x : T) r *= f(x);
    return r;
  };
  const C q2t0 = q * q * t0;

  const auto e = E(t0, T, t6, t7);
  const auto a = E(t0, T, C(t6 / q), C(q * t7));
  const auto b = E(q2t0, qT, t6, C(q * t7));

  ContiguousResiduals<C> out;
  out.n = n;
  auto scale_of = [&](std::initializer_list<R> xs) {
    R s(0);
    for (R x : xs)
      if (x > s) s = x;
    return s;
  };

  // relation 1
  auto ratio = [](const C& num, const C& den) {
    if (is_zero(den)) fail(ErrorKind::PoleHit, "contiguous relation coefficient has a vanishing denominator");
    return C(num / den);
  };
  const C c = ratio(th(C(q * t0)) * th(q2t0) * th(C(q * t7 / t6)) * th(C(t6 * t7 / (q * t0))) *
                        prodT([&](const C& x) { return th(x); }),
                    th(C(q * t0 / t6)) * th(C(q2t0 / t6)) * th(C(t0 / t7)) * th(C(t7 / (q * t0))) *
                        prodT([&](const C& x) { return th(C(q * t0 / x)); }));
  out.residual[0] = e.value - a.value - c * b.value;
  out.scale[0] = scale_of({e.max_term, a.max_term, R(abs(c) * b.max_term)});

  // relation 2
  const C c1 = ratio(th(t7) * prodT([&](const C& x) { return th(C(x * t6 / (q * t0))); }),
                     th(C(t6 / (q * t0))) * th(C(t6 / q2t0)) * th(C(t6 / t7)));
  const C c2 = ratio(th(t6) * prodT([&](const C& x) { return th(C(x * t7 / (q * t0))); }),
                     th(C(t7 / (q * t0))) * th(C(t7 / q2t0)) * th(C(t7 / t6)));
  const C cr = ratio(prodT([&](const C& x) { return th(C(q * t0 / x)); }), th(C(q * t0)) * th(q2t0));
  C lhs2 = c1 * b.value;
  R s2 = abs(c1) * b.max_term;
  if (!is_zero(c2)) {
    const auto e2 = E(q2t0, qT, C(q * t6), t7);
    lhs2 += c2 * e2.value;
    s2 = scale_of({s2, R(abs(c2) * e2.max_term)});
  }
  out.residual[1] = lhs2 - cr * e.value;
  out.scale[1] = scale_of({s2, R(abs(cr) * e.max_term)});

  // relation 3
  const C d1 = ratio(th(t7) * th(C(t0 / t7)) * th(C(q * t0 / t7)) * prodT([&](const C& x) { return th(C(q * t0 / (t6 * x))); }),
                     th(C(q * t7 / t6)) * th(C(t7 / t6)));
  const C d2 = ratio(th(t6) * th(C(t0 / t6)) * th(C(q * t0 / t6)) * prodT([&](const C& x) { return th(C(q * t0 / (t7 * x))); }),
                     th(C(q * t6 / t7)) * th(C(t6 / t7)));
  const C d3 = th(C(q * t0 / (t6 * t7))) * prodT([&](const C& x) { return th(x); });
  C r3 = d1 * (a.value - e.value) + d3 * e.value;
  R s3 = scale_of({R(abs(d1) * a.max_term), R(abs(d1) * e.max_term), R(abs(d3) * e.max_term)});
  if (!is_zero(d2)) {
    const auto e3 = E(t0, T, C(q * t6), C(t7 / q));
    r3 += d2 * (e3.value - e.value);
    s3 = scale_of({s3, R(abs(d2) * e3.max_term), R(abs(d2) * e.max_term)});
  }
  out.residual[2] = r3;
  out.scale[2] = s3;
  return out;
}

namespace detail {

// Visits every multi-index in the box prod [0..N_j] in lexicographic order.
inline void for_each_box(const std::vector<long>& Ns, const std::function<void(const std::vector<long>&)>& f) {
  std::vector<long> lam(Ns.size(), 0);
  for (;;) {
    f(lam);
    std::size_t k = Ns.size();
    while (k > 0) {
      --k;
      if (lam[k] < Ns[k]) {
        ++lam[k];
        for (std::size_t j = k + 1; j < Ns.size(); ++j) lam[j] = 0;
        goto next;
      }
    }
    return;
  next:;
  }
}

// Compositions of N into n nonnegative parts, lexicographic order.
inline void for_each_composition(int n, long N, const std::function<void(const std::vector<long>&)>& f) {
  std::vector<long> lam(static_cast<std::size_t>(n), 0);
  std::function<void(int, long)> rec = [&](int i, long rest) {
    if (i == n - 1) {
      lam[static_cast<std::size_t>(i)] = rest;
      f(lam);
      return;
    }
    for (long a = 0; a <= rest; ++a) {
      lam[static_cast<std::size_t>(i)] = a;
      rec(i + 1, rest - a);
    }
  };
  rec(0, N);
}

template <class C>
void store_max_term(const std::vector<C>& terms, real_t<C>* out) {
  using std::abs;
  if (!out) return;
  *out = real_t<C>(0);
  for (const C& v : terms)
    if (abs(v) > *out) *out = abs(v);
}

}  // namespace detail

// A_n Milne-type sum over the box 0 <= lambda_j <= N_j with
// e = q^{1+|N|}/(bcd). Returns (multi-sum, closed form).
template <class C>
std::pair<C, C> milne_sum_sides(const std::vector<C>& ts, const C& b, const C& c, const C& d,
                                const std::vector<long>& Ns, const Moduli<C>& m,
                                const TruncationPolicy<real_t<C>>& pol = default_policy<C>(),
                                real_t<C>* max_term = nullptr) {
  const std::size_t n = ts.size();
  if (n == 0 || Ns.size() != n) fail(ErrorKind::InvalidSpec, "milne: need one N_j per t_j");
  for (long N : Ns)
    if (N < 0) fail(ErrorKind::InvalidSpec, "milne: N_j must be nonnegative");
  const C& q = m.q;
  const C& p = m.p;
  long Nt = 0;
  for (long N : Ns) Nt += N;
  const C e = ipow(q, 1 + Nt) / (b * c * d);
  auto th = [&](const C& z) { return theta(z, p, pol); };
  auto tf = [&](const C& z, long k) { return theta_factorial(z, p, q, k, pol); };

  std::vector<C> terms;
  detail::for_each_box(Ns, [&](const std::vector<long>& lam) {
    long l = 0, wexp = 0;
    for (std::size_t j = 0; j < n; ++j) {
      l += lam[j];
      wexp += static_cast<long>(j + 1) * lam[j];
    }
    // Factor by factor: the separate numerator and denominator products
    // can overflow when |q/e| is large.
    C r = ipow(q, wexp);
    auto mul = [&](const C& a, const C& b) {
      if (is_zero(b)) fail(ErrorKind::PoleHit, "milne: vanishing denominator in a summand");
      r *= a / b;
    };
    for (std::size_t j = 0; j < n; ++j) mul(th(C(ts[j] * ipow(q, lam[j] + l))), th(ts[j]));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) mul(th(C(ts[i] / ts[j] * ipow(q, lam[i] - lam[j]))), th(C(ts[i] / ts[j])));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) mul(tf(C(ts[i] / ts[j] * ipow(q, -Ns[j])), lam[i]), tf(C(q * ts[i] / ts[j]), lam[i]));
    for (std::size_t j = 0; j < n; ++j) mul(tf(ts[j], l), tf(C(ts[j] * ipow(q, 1 + Ns[j])), l));
    mul(tf(b, l), tf(C(q / d), l));
    mul(tf(c, l), tf(C(q / e), l));
    for (std::size_t j = 0; j < n; ++j) {
      mul(tf(C(d * ts[j]), lam[j]), tf(C(ts[j] * q / b), lam[j]));
      mul(tf(C(e * ts[j]), lam[j]), tf(C(ts[j] * q / c), lam[j]));
    }
    terms.push_back(r);
  });
  const C lhs = pairwise_sum(terms);
  detail::store_max_term(terms, max_term);

  C rhs(1);
  auto mul = [&](const C& x, const C& y) {
    if (is_zero(y)) fail(ErrorKind::PoleHit, "milne: closed form denominator vanishes");
    rhs *= x / y;
  };
  mul(tf(C(q / (b * d)), Nt), tf(C(q / d), Nt));
  mul(tf(C(q / (c * d)), Nt), tf(C(q / (b * c * d)), Nt));
  for (std::size_t j = 0; j < n; ++j) {
    mul(tf(C(ts[j] * q), Ns[j]), tf(C(ts[j] * q / b), Ns[j]));
    mul(tf(C(ts[j] * q / (b * c)), Ns[j]), tf(C(ts[j] * q / c), Ns[j]));
  }
  return {lhs, rhs};
}

// Gustafson-Rakha-type sum over compositions of N (conjectural identity).
// t: n parameters with prod t_k = q^-N; tx: three further parameters;
// tg: the global parameter. The closed form depends on the parity of n.
template <class C>
std::pair<C, C> gustafson_rakha_sum_sides(const std::vector<C>& t, const std::array<C, 3>& tx,
                                          const C& tg, long N, const Moduli<C>& m,
                                          const TruncationPolicy<real_t<C>>& pol = default_policy<C>(),
                                          real_t<C>* max_term = nullptr) {
  const int n = static_cast<int>(t.size());
  if (n < 1) fail(ErrorKind::InvalidSpec, "gustafson_rakha: need at least one t");
  if (N < 0) fail(ErrorKind::InvalidSpec, "gustafson_rakha: N must be nonnegative");
  const C& q = m.q;
  const C& p = m.p;
  C prod_t(1);
  for (const C& v : t) prod_t *= v;
  if (detail::rel_dev(C(prod_t * ipow(q, N)), C(1)) > real_t<C>(detail::kBalanceTol))
    fail(ErrorKind::ConstraintViolation, "gustafson_rakha: prod t_k must equal q^-N");
  C P = prod_t;
  for (const C& v : tx) P *= v;
  auto tf = [&](const C& z, long k) { return theta_factorial(z, p, q, k, pol); };
  const auto un = [](int i) { return static_cast<std::size_t>(i); };

  std::vector<C> terms;
  detail::for_each_composition(n, N, [&](const std::vector<long>& lam) {
    C num(1), den(1);
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) num *= tf(C(tg * t[un(i)] * t[un(j)]), lam[un(i)] + lam[un(j)]);
    for (int i = 0; i < n; ++i)
      for (const C& x : tx) num *= tf(C(tg * t[un(i)] * x), lam[un(i)]);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) num *= tf(C(t[un(i)] / t[un(j)]), -lam[un(j)]);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (i != j) den *= tf(C(t[un(i)] / t[un(j)]), lam[un(i)] - lam[un(j)]);
    const C tgn1 = ipow(tg, n + 1);
    for (int j = 0; j < n; ++j) den *= tf(C(tgn1 / t[un(j)] * P), -lam[un(j)]);
    if (is_zero(den)) fail(ErrorKind::PoleHit, "gustafson_rakha: vanishing denominator");
    terms.push_back(num / den);
  });
  const C lhs = pairwise_sum(terms);
  detail::store_max_term(terms, max_term);

  C rhs = tf(C(1), -N);
  if (n % 2 == 0) {
    rhs /= tf(ipow(tg, n / 2), -N);
    const C g = ipow(tg, (n + 2) / 2);
    for (int i = 0; i < 3; ++i)
      for (int j = i + 1; j < 3; ++j) rhs /= tf(C(g * tx[un(i)] * tx[un(j)]), -N);
  } else {
    const C g = ipow(tg, (n + 1) / 2);
    for (const C& x : tx) rhs /= tf(C(g * x), -N);
    rhs /= tf(C(ipow(tg, (n + 3) / 2) * tx[0] * tx[1] * tx[2]), -N);
  }
  return {lhs, rhs};
}

}  // namespace ehv
