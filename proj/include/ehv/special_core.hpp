#pragma once

// Truncated infinite products, the multiplicative theta function
// theta(z;p) = (z;p)_inf (p/z;p)_inf, its finite shifted factorials and the
// conversion to Jacobi theta_1.

#include <cmath>
#include <complex>
#include <initializer_list>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "ehv/error.hpp"
#include "ehv/numeric.hpp"

namespace ehv {

template <class C>
struct Moduli {
  C q;
  C p;

  Moduli(const C& q_, const C& p_) : q(q_), p(p_) {
    using std::abs;
    if (!(abs(q) < 1) || !(abs(p) < 1)) {
      std::ostringstream os;
      os << "moduli must satisfy |q|<1 and |p|<1 (|q|=" << to_d(abs(q))
         << ", |p|=" << to_d(abs(p)) << ")";
      fail(ErrorKind::DomainError, os.str());
    }
  }

  Moduli swapped() const { return Moduli(p, q); }
  bool q_degenerate() const { return is_zero(q); }
  bool p_degenerate() const { return is_zero(p); }
};

template <class R>
struct TruncationPolicy {
  R eps;
  int max_terms;

  void validate() const {
    if (!(eps > 0) || max_terms < 1)
      fail(ErrorKind::InvalidSpec, "truncation policy needs eps>0 and max_terms>=1");
  }
};

template <class C>
TruncationPolicy<real_t<C>> default_policy() {
  using R = real_t<C>;
  if (std::numeric_limits<R>::digits10 >= 30) return {R(1e-34), 4096};
  return {R(1e-16), 4096};
}

namespace detail {

// Factors this close to zero are taken to be exact lattice hits.
template <class C>
inline real_t<C> snap_tol() {
  return real_t<C>(32) * machine_eps<C>();
}

template <class C>
inline C one_minus(const C& x) {
  using std::abs;
  C f = C(1) - x;
  if (abs(f) <= snap_tol<C>()) return C(0);
  return f;
}

// prod_{k<count} (1 - x_k), where x_k = gen(k). Beyond 64 factors the
// product is accumulated as a sum of log(1 - x_k).
constexpr int kLogSpaceThreshold = 64;

template <class C, class Gen>
C product_one_minus(int count, Gen gen) {
  using std::exp;
  if (count <= kLogSpaceThreshold) {
    C r(1);
    for (int k = 0; k < count; ++k) {
      C f = one_minus(gen(k));
      if (is_zero(f)) return C(0);
      r *= f;
    }
    return r;
  }
  C s(0);
  for (int k = 0; k < count; ++k) {
    C x = gen(k);
    if (is_zero(one_minus(x))) return C(0);
    s += log1p_c(C(-x));
  }
  return exp(s);
}

// prod of arbitrary factors with the same log-space switch.
template <class C, class Gen>
C product_of(int count, Gen gen) {
  using std::exp;
  using std::log;
  if (count <= kLogSpaceThreshold) {
    C r(1);
    for (int k = 0; k < count; ++k) r *= gen(k);
    return r;
  }
  C s(0);
  for (int k = 0; k < count; ++k) {
    C f = gen(k);
    if (is_zero(f)) return C(0);
    s += log(f);
  }
  return exp(s);
}

// Smallest K with |z| |b|^K / (1-|b|) < eps (at least 1).
template <class C>
int truncation_length(const C& z, const C& b, const TruncationPolicy<real_t<C>>& pol) {
  using std::abs;
  using std::ceil;
  using std::log;
  using R = real_t<C>;
  const R az = abs(z);
  const R ab = abs(b);
  if (az == 0 || ab == 0) return 1;
  const R target = pol.eps * (R(1) - ab) / az;
  if (target >= 1) return 1;
  const R k = ceil(log(target) / log(ab));
  if (!(k < R(pol.max_terms))) {
    std::ostringstream os;
    os << "q-Pochhammer product needs more than " << pol.max_terms
       << " factors (|b|=" << to_d(ab) << ")";
    fail(ErrorKind::TruncationFailure, os.str());
  }
  const int ki = static_cast<int>(to_d(k));
  return ki < 1 ? 1 : ki;
}

}  // namespace detail

// (z;b)_inf = prod_{k>=0} (1 - z b^k).
template <class C>
C qpochhammer(const C& z, const C& b,
              const TruncationPolicy<real_t<C>>& pol = default_policy<C>()) {
  using std::abs;
  pol.validate();
  if (!(abs(b) < 1))
    fail(ErrorKind::NonConvergent, "q-Pochhammer base must satisfy |b|<1");
  if (is_zero(z)) return C(1);
  if (is_zero(b)) return detail::one_minus(z);
  const int K = detail::truncation_length(z, b, pol);
  // b^k by running multiplication; the tail bound makes the drift irrelevant.
  if (K <= detail::kLogSpaceThreshold) {
    C r(1), x = z;
    for (int k = 0; k < K; ++k) {
      C f = detail::one_minus(x);
      if (is_zero(f)) return C(0);
      r *= f;
      x *= b;
    }
    return r;
  }
  std::vector<C> xs(static_cast<std::size_t>(K));
  C x = z;
  for (int k = 0; k < K; ++k) {
    xs[static_cast<std::size_t>(k)] = x;
    x *= b;
  }
  return detail::product_one_minus<C>(K, [&](int k) { return xs[static_cast<std::size_t>(k)]; });
}

template <class C>
C theta(const C& z, const C& p,
        const TruncationPolicy<real_t<C>>& pol = default_policy<C>()) {
  using std::abs;
  if (is_zero(z)) fail(ErrorKind::DomainError, "theta(z;p) is undefined at z=0");
  if (!(abs(p) < 1)) fail(ErrorKind::NonConvergent, "theta(z;p) needs |p|<1");
  if (is_zero(p)) return detail::one_minus(z);
  C a = qpochhammer(z, p, pol);
  if (is_zero(a)) return a;
  return a * qpochhammer(C(p / z), p, pol);
}

template <class C>
C theta_multi(const std::vector<C>& zs, const C& p,
              const TruncationPolicy<real_t<C>>& pol = default_policy<C>()) {
  for (const C& z : zs)
    if (is_zero(z)) fail(ErrorKind::DomainError, "theta_multi: zero entry");
  return detail::product_of<C>(static_cast<int>(zs.size()),
                               [&](int k) { return theta(zs[static_cast<std::size_t>(k)], p, pol); });
}

template <class C>
C theta_multi(std::initializer_list<C> zs, const C& p,
              const TruncationPolicy<real_t<C>>& pol = default_policy<C>()) {
  return theta_multi(std::vector<C>(zs), p, pol);
}

// theta(z;p;q)_n: prod_{l=0}^{n-1} theta(z q^l;p) for n>=0 and
// 1 / prod_{l=1}^{-n} theta(z q^{-l};p) for n<0.
template <class C>
C theta_factorial(const C& z, const C& p, const C& q, long n,
                  const TruncationPolicy<real_t<C>>& pol = default_policy<C>()) {
  if (is_zero(z)) fail(ErrorKind::DomainError, "theta factorial at z=0");
  if (n == 0) return C(1);
  if (n > 0) {
    std::vector<C> args(static_cast<std::size_t>(n));
    C x = z;
    for (long l = 0; l < n; ++l) {
      args[static_cast<std::size_t>(l)] = x;
      x *= q;
    }
    return detail::product_of<C>(static_cast<int>(n), [&](int k) {
      return theta(args[static_cast<std::size_t>(k)], p, pol);
    });
  }
  if (is_zero(q)) fail(ErrorKind::DomainError, "negative-index factorial needs q != 0");
  const long m = -n;
  std::vector<C> args(static_cast<std::size_t>(m));
  const C qi = C(1) / q;
  C x = z * qi;
  for (long l = 0; l < m; ++l) {
    args[static_cast<std::size_t>(l)] = x;
    x *= qi;
  }
  C den = detail::product_of<C>(static_cast<int>(m), [&](int k) {
    return theta(args[static_cast<std::size_t>(k)], p, pol);
  });
  if (is_zero(den))
    fail(ErrorKind::PoleHit, "negative-index theta factorial hits a zero of theta");
  return C(1) / den;
}

// Product of theta factorials with a common index.
template <class C>
C theta_factorial_multi(std::initializer_list<C> zs, const C& p, const C& q, long n,
                        const TruncationPolicy<real_t<C>>& pol = default_policy<C>()) {
  C r(1);
  for (const C& z : zs) r *= theta_factorial(z, p, q, n, pol);
  return r;
}

// Jacobi theta_1 with q = e^{2 pi i sigma}, p = e^{2 pi i tau}, principal
// branches for p^{1/8} and q^{-u/2}.
template <class C>
C theta1(const C& u, const C& sigma, const C& tau,
         const TruncationPolicy<real_t<C>>& pol = default_policy<C>()) {
  using std::exp;
  using R = real_t<C>;
  if (!(tau.imag() > 0)) fail(ErrorKind::DomainError, "theta1 needs Im(tau) > 0");
  const C I(R(0), R(1));
  const C two_pi_i = C(R(0), R(2) * pi_v<R>());
  const C p = exp(two_pi_i * tau);
  const C p8 = exp(two_pi_i * tau / R(8));
  const C qmhalf = exp(-two_pi_i * sigma * u / R(2));
  const C qu = exp(two_pi_i * sigma * u);
  return p8 * I * qmhalf * qpochhammer(p, p, pol) * theta(qu, p, pol);
}

}  // namespace ehv
