#pragma once

// Elliptic gamma function Gamma(z;q,p), complex-order elliptic shifted
// factorials, the double sine S(u;w1,w2) and the modified gamma G(u;w).

#include <cmath>
#include <complex>
#include <sstream>
#include <vector>

#include "ehv/error.hpp"
#include "ehv/numeric.hpp"
#include "ehv/special_core.hpp"

namespace ehv {

namespace detail {

template <class C>
real_t<C> pole_tol() {
  using R = real_t<C>;
  if (std::numeric_limits<R>::digits10 >= 30) return R(1e-28);
  return R(1e-13);
}

// Raises PoleHit when z sits (relatively) within pole_tol of q^{-j} p^{-k}.
// Only lattice points with |z q^j p^k| >= 1/2 can be close, so the scan is
// short.
template <class C>
void guard_gamma_pole(const C& z, const C& q, const C& p) {
  using std::abs;
  using R = real_t<C>;
  const R half(0.5);
  const R tol = pole_tol<C>();
  C zj = z;
  for (int j = 0; j < 4096; ++j) {
    if (abs(zj) < half) break;
    C zjk = zj;
    for (int k = 0; k < 4096; ++k) {
      if (abs(zjk) < half) break;
      if (abs(C(1) - zjk) < tol) {
        std::ostringstream os;
        os << "elliptic gamma argument is on the pole lattice (j=" << j << ", k=" << k << ")";
        fail(ErrorKind::PoleHit, os.str());
      }
      if (is_zero(p)) break;
      zjk *= p;
    }
    if (is_zero(q)) break;
    zj *= q;
  }
}

}  // namespace detail

// Evaluator bound to a fixed pair of bases. Away from the degenerate cases
// the argument is moved by powers of the larger base b into the annulus
// |w| ~ sqrt|pq| using Gamma(bz) = theta(z;c) Gamma(z), where the series
//   log Gamma(w) = sum_{m>=1} (w^m - (pq/w)^m) / (m (1-q^m)(1-p^m))
// converges like sqrt|c|^m.
template <class C>
class EllipticGamma {
 public:
  using R = real_t<C>;

  explicit EllipticGamma(const Moduli<C>& m,
                         const TruncationPolicy<R>& pol = default_policy<C>())
      : m_(m), pol_(pol) {
    using std::abs;
    using std::ceil;
    using std::log;
    using std::sqrt;
    pol_.validate();
    const bool q0 = m_.q_degenerate();
    const bool p0 = m_.p_degenerate();
    if (q0 && p0) {
      mode_ = Mode::Rational;
      return;
    }
    if (p0) {
      mode_ = Mode::OnlyQ;
      return;
    }
    if (q0) {
      mode_ = Mode::OnlyP;
      return;
    }
    mode_ = Mode::Full;
    if (abs(m_.q) >= abs(m_.p)) {
      b_ = m_.q;
      c_ = m_.p;
    } else {
      b_ = m_.p;
      c_ = m_.q;
    }
    pq_ = m_.q * m_.p;
    log_abs_b_ = log(abs(b_));
    log_target_ = log(abs(pq_)) / R(2);
    const R r = sqrt(abs(c_));
    const R aq = abs(m_.q), ap = abs(m_.p);
    // tail <= 2 r^{M+1} / ((1-r)(1-|q|)(1-|p|)(M+1)) < eps
    const R lhs = pol_.eps * (R(1) - r) * (R(1) - aq) * (R(1) - ap) / R(2);
    R M = ceil(log(lhs) / log(r));
    if (M < R(1)) M = R(1);
    if (!(M < R(pol_.max_terms)))
      fail(ErrorKind::TruncationFailure, "elliptic gamma series needs too many terms");
    const int nterms = static_cast<int>(to_d(M)) + 1;
    coef_.resize(static_cast<std::size_t>(nterms) + 1);
    C qm = m_.q, pm = m_.p;
    for (int k = 1; k <= nterms; ++k) {
      coef_[static_cast<std::size_t>(k)] =
          C(1) / (C(R(k)) * (C(1) - qm) * (C(1) - pm));
      qm *= m_.q;
      pm *= m_.p;
    }
  }

  const Moduli<C>& moduli() const { return m_; }
  const TruncationPolicy<R>& policy() const { return pol_; }

  C operator()(const C& z) const {
    using std::abs;
    using std::exp;
    using std::floor;
    using std::log;
    if (is_zero(z)) fail(ErrorKind::DomainError, "elliptic gamma at z=0");
    detail::guard_gamma_pole(z, m_.q, m_.p);
    switch (mode_) {
      case Mode::Rational:
        return C(1) / (C(1) - z);
      case Mode::OnlyQ:
        return C(1) / qpochhammer(z, m_.q, pol_);
      case Mode::OnlyP:
        return C(1) / qpochhammer(z, m_.p, pol_);
      case Mode::Full:
        break;
    }
    const R shift = (log_target_ - log(abs(z))) / log_abs_b_;
    const long k = static_cast<long>(to_d(floor(shift + R(0.5))));
    C w = z;
    C factor(1);
    if (k > 0) {
      // Gamma(z) = Gamma(b^k z) / prod_{j<k} theta(b^j z; c)
      C den = detail::product_of<C>(static_cast<int>(k), [&](int) {
        C t = theta(w, c_, pol_);
        w *= b_;
        return t;
      });
      factor = C(1) / den;
    } else if (k < 0) {
      // Gamma(z) = prod_{j=1}^{|k|} theta(z b^{-j}; c) Gamma(z b^{-|k|})
      const C binv = C(1) / b_;
      factor = detail::product_of<C>(static_cast<int>(-k), [&](int) {
        w *= binv;
        return theta(w, c_, pol_);
      });
    }
    return factor * exp(series(w));
  }

  // 1 / (Gamma(x) Gamma(1/x)) = -x^{-1} theta(x;p) theta(x;q): entire in x,
  // used for the Gamma(z^2, z^-2) and Gamma(z_i/z_j, z_j/z_i) denominators.
  C recip_pair(const C& x) const {
    if (is_zero(x)) fail(ErrorKind::DomainError, "recip_pair at x=0");
    return -theta(x, m_.p, pol_) * theta(x, m_.q, pol_) / x;
  }

 private:
  enum class Mode { Full, OnlyQ, OnlyP, Rational };

  C series(const C& w) const {
    const C v = pq_ / w;
    C u1 = w, u2 = v, s(0);
    for (std::size_t k = 1; k < coef_.size(); ++k) {
      s += coef_[k] * (u1 - u2);
      u1 *= w;
      u2 *= v;
    }
    return s;
  }

  Moduli<C> m_;
  TruncationPolicy<R> pol_;
  Mode mode_ = Mode::Full;
  C b_{}, c_{}, pq_{};
  R log_abs_b_{}, log_target_{};
  std::vector<C> coef_;
};

template <class C>
C elliptic_gamma(const C& z, const Moduli<C>& m,
                 const TruncationPolicy<real_t<C>>& pol = default_policy<C>()) {
  return EllipticGamma<C>(m, pol)(z);
}

// Reference route: exp of the double log-sum over the (j,k) rectangle,
// each side cut where the geometric tail bound drops below eps.
template <class C>
C elliptic_gamma_lattice(const C& z, const Moduli<C>& m,
                         const TruncationPolicy<real_t<C>>& pol = default_policy<C>()) {
  using std::abs;
  using std::exp;
  using R = real_t<C>;
  if (is_zero(z)) fail(ErrorKind::DomainError, "elliptic gamma at z=0");
  detail::guard_gamma_pole(z, m.q, m.p);
  const C pq = m.q * m.p;
  const R big = abs(z) > abs(pq / z) ? abs(z) : abs(pq / z);
  const C mag(big * R(4));
  const int J = is_zero(m.q) ? 1 : detail::truncation_length(mag, m.q, pol) + 1;
  const int K = is_zero(m.p) ? 1 : detail::truncation_length(mag, m.p, pol) + 1;
  C s(0);
  C qj(1);
  for (int j = 0; j < J; ++j) {
    C qjpk = qj;
    for (int k = 0; k < K; ++k) {
      s -= log1p_c(C(-z * qjpk));
      s += log1p_c(C(-pq * qjpk / z));
      qjpk *= m.p;
    }
    qj *= m.q;
  }
  return exp(s);
}

template <class C>
C elliptic_gamma_multi(const std::vector<C>& zs, const EllipticGamma<C>& g) {
  return detail::product_of<C>(static_cast<int>(zs.size()),
                               [&](int k) { return g(zs[static_cast<std::size_t>(k)]); });
}

template <class C>
C elliptic_gamma_multi(const std::vector<C>& zs, const Moduli<C>& m,
                       const TruncationPolicy<real_t<C>>& pol = default_policy<C>()) {
  return elliptic_gamma_multi(zs, EllipticGamma<C>(m, pol));
}

// theta(z;p;q)_s = Gamma(z q^s) / Gamma(z) for complex order s; q^s uses
// the principal branch unless s is an integer.
template <class C>
C elliptic_factorial_s(const C& z, const C& s, const Moduli<C>& m,
                       const TruncationPolicy<real_t<C>>& pol = default_policy<C>()) {
  using std::floor;
  using R = real_t<C>;
  if (is_zero(m.q)) fail(ErrorKind::DomainError, "complex-order factorial needs q != 0");
  EllipticGamma<C> g(m, pol);
  C qs;
  const R sr = s.real();
  if (s.imag() == 0 && floor(sr) == sr && abs(sr) < R(1e6))
    qs = ipow(m.q, static_cast<long long>(to_d(sr)));
  else
    qs = cpow(m.q, s);
  return g(C(z * qs)) / g(z);
}

// Quasi-periods and the four derived bases
//   q = e^{2 pi i w1/w2}, qt = e^{-2 pi i w2/w1}, p = e^{2 pi i w3/w2}, pt = e^{2 pi i w3/w1}.
template <class C>
struct QuasiPeriods {
  using R = real_t<C>;
  C omega1, omega2, omega3;
  C q, qt, p, pt;
  bool q_ok = false, qt_ok = false, p_ok = false, pt_ok = false;

  QuasiPeriods(const C& w1, const C& w2, const C& w3)
      : omega1(w1), omega2(w2), omega3(w3) {
    using std::abs;
    using std::exp;
    if (is_zero(w1) || is_zero(w2))
      fail(ErrorKind::DomainError, "quasi-periods w1, w2 must be nonzero");
    const C tpi(R(0), R(2) * pi_v<R>());
    q = exp(tpi * w1 / w2);
    qt = exp(-tpi * w2 / w1);
    p = exp(tpi * w3 / w2);
    pt = exp(tpi * w3 / w1);
    q_ok = abs(q) < 1;
    qt_ok = abs(qt) < 1;
    p_ok = abs(p) < 1;
    pt_ok = abs(pt) < 1;
  }

  // Moves w1 off the real ratio axis: w1/w2 -> w1/w2 + i*eps.
  QuasiPeriods perturbed(const R& eps) const {
    return QuasiPeriods(omega1 + C(R(0), eps) * omega2, omega2, omega3);
  }
};

// S(u;w1,w2) = (e^{2 pi i u/w2}; q)_inf / (e^{2 pi i u/w1} qt; qt)_inf.
template <class C>
C double_sine(const C& u, const C& w1, const C& w2,
              const TruncationPolicy<real_t<C>>& pol = default_policy<C>()) {
  using std::abs;
  using std::exp;
  using R = real_t<C>;
  if (is_zero(w1) || is_zero(w2))
    fail(ErrorKind::DomainError, "double sine needs nonzero quasi-periods");
  const C tpi(R(0), R(2) * pi_v<R>());
  const C q = exp(tpi * w1 / w2);
  const C qt = exp(-tpi * w2 / w1);
  if (!(abs(q) < 1) || !(abs(qt) < 1))
    fail(ErrorKind::NonConvergent, "double sine needs |q|<1 and |qt|<1 (Im(w1/w2) != 0)");
  const C num = qpochhammer(C(exp(tpi * u / w2)), q, pol);
  const C den = qpochhammer(C(exp(tpi * u / w1) * qt), qt, pol);
  if (is_zero(den)) fail(ErrorKind::PoleHit, "double sine evaluated at a pole");
  return num / den;
}

namespace detail {

template <class C>
const QuasiPeriods<C>& checked_for_G(const QuasiPeriods<C>& w) {
  if (!w.q_ok || !w.p_ok || !w.pt_ok)
    fail(ErrorKind::NonConvergent, "modified gamma needs |q|,|p|,|pt| < 1");
  return w;
}

}  // namespace detail

// G(u;w) = Gamma(e^{2 pi i u/w2}; q, p) * Gamma(pt e^{-2 pi i u/w1}; qt, pt).
template <class C>
C modified_gamma_G(const C& u, const QuasiPeriods<C>& w,
                   const TruncationPolicy<real_t<C>>& pol = default_policy<C>()) {
  using std::exp;
  using R = real_t<C>;
  detail::checked_for_G(w);
  const C tpi(R(0), R(2) * pi_v<R>());
  const C x = exp(tpi * u / w.omega2);
  const C y = exp(-tpi * u / w.omega1);
  return EllipticGamma<C>(Moduli<C>(w.q, w.p), pol)(x) *
         EllipticGamma<C>(Moduli<C>(w.qt, w.pt), pol)(C(w.pt * y));
}

// The same function as a literal four-factor double product.
template <class C>
C modified_gamma_G_product(const C& u, const QuasiPeriods<C>& w,
                           const TruncationPolicy<real_t<C>>& pol = default_policy<C>()) {
  using std::abs;
  using std::exp;
  using R = real_t<C>;
  detail::checked_for_G(w);
  const C tpi(R(0), R(2) * pi_v<R>());
  const C e2 = exp(tpi * u / w.omega2);
  const C e1 = exp(tpi * u / w.omega1);
  auto len = [&](const C& base) {
    return is_zero(base) ? 1 : detail::truncation_length(C(R(64)), base, pol) + 1;
  };
  const int J1 = len(w.q), K1 = len(w.p), J2 = len(w.qt), K2 = len(w.pt);
  C s(0);
  C qj(1);
  for (int j = 0; j < J1; ++j) {
    C qp = qj;
    for (int k = 0; k < K1; ++k) {
      s += log1p_c(C(-qp * w.q * w.p / e2));
      s -= log1p_c(C(-e2 * qp));
      qp *= w.p;
    }
    qj *= w.q;
  }
  C tj(1);
  for (int j = 0; j < J2; ++j) {
    C tp = tj;
    for (int k = 0; k < K2; ++k) {
      s += log1p_c(C(-e1 * tp * w.qt));
      s -= log1p_c(C(-tp * w.pt / e1));
      tp *= w.pt;
    }
    tj *= w.qt;
  }
  return exp(s);
}

}  // namespace ehv
