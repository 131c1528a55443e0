#pragma once

// Scalar plumbing shared by every module: the real type behind a complex
// scalar, exact-order (pairwise) summation, integer powers and an accurate
// complex log(1+x).

#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <type_traits>
#include <vector>

#include <boost/math/constants/constants.hpp>

namespace ehv {

template <class C>
struct real_of;

template <class R>
struct real_of<std::complex<R>> {
  using type = R;
};

template <class C>
using real_t = typename real_of<C>::type;

using cplx = std::complex<double>;

template <class R>
inline R pi_v() {
  return boost::math::constants::pi<R>();
}

template <class C>
inline real_t<C> machine_eps() {
  return std::numeric_limits<real_t<C>>::epsilon();
}

template <class C>
inline C make_c(const real_t<C>& re, const real_t<C>& im = real_t<C>(0)) {
  return C(re, im);
}

template <class C>
inline C from_cd(const cplx& z) {
  return C(real_t<C>(z.real()), real_t<C>(z.imag()));
}

template <class C>
inline cplx to_cd(const C& z) {
  return cplx(static_cast<double>(z.real()), static_cast<double>(z.imag()));
}

template <class R>
inline double to_d(const R& x) {
  return static_cast<double>(x);
}

// z^n by repeated squaring; negative n inverts at the end.
template <class C>
C ipow(C z, long long n) {
  const bool inv = n < 0;
  unsigned long long k = inv ? static_cast<unsigned long long>(-n)
                             : static_cast<unsigned long long>(n);
  C r(1);
  while (k) {
    if (k & 1u) r *= z;
    z *= z;
    k >>= 1u;
  }
  return inv ? C(1) / r : r;
}

// Principal branch b^e = exp(e log b).
template <class C>
C cpow(const C& b, const C& e) {
  using std::exp;
  using std::log;
  return exp(e * log(b));
}

// log(1+x) for complex x, accurate when |x| is small: the real part goes
// through log1p of 2Re(x)+|x|^2, the imaginary part through atan2.
template <class C>
C log1p_c(const C& x) {
  using std::atan2;
  using std::log1p;
  using R = real_t<C>;
  const R a = x.real();
  const R b = x.imag();
  const R re = log1p(R(2) * a + a * a + b * b) / R(2);
  const R im = atan2(b, R(1) + a);
  return C(re, im);
}

// Fixed-shape pairwise reduction over [first, first+n): the split is always
// at n/2 so the rounding pattern depends only on n.
template <class C>
C pairwise_sum(const C* first, std::size_t n) {
  if (n == 0) return C(0);
  if (n <= 8) {
    C s(0);
    for (std::size_t i = 0; i < n; ++i) s += first[i];
    return s;
  }
  const std::size_t h = n / 2;
  return pairwise_sum(first, h) + pairwise_sum(first + h, n - h);
}

template <class C>
C pairwise_sum(const std::vector<C>& v) {
  return pairwise_sum(v.data(), v.size());
}

template <class C>
bool is_zero(const C& z) {
  return z.real() == 0 && z.imag() == 0;
}

}  // namespace ehv
