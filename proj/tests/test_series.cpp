#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <array>

#include "ehv/extended.hpp"
#include "ehv/series.hpp"
#include "oracles.hpp"

using namespace ehv;
using oracle::cd;
using oracle::rel;
using X = cplx_ext;

namespace {

template <class C>
double rdev(const C& a, const C& b) {
  using std::abs;
  return to_d(abs(C(a - b)) / abs(b));
}

X xc(double re, double im = 0) { return X(real_ext(re), real_ext(im)); }

// (a;q)_n as a plain product
template <class C>
C qfact(const C& a, const C& q, long n) {
  C r(1), w = a;
  for (long k = 0; k < n; ++k, w *= q) r *= C(1) - w;
  return r;
}

// V-series term by term, each term rebuilt from scratch with direct theta products.
template <class C>
C v_oracle(const C& t0, const std::vector<C>& t, const C& x, const C& q, const C& p, long N) {
  C s(0);
  for (long n = 0; n <= N; ++n) {
    C a = oracle::theta(C(t0 * ipow(q, 2 * n)), p) / oracle::theta(t0, p) *
          oracle::theta_fact(t0, p, q, static_cast<int>(n)) / oracle::theta_fact(q, p, q, static_cast<int>(n));
    for (const C& tm : t)
      a *= oracle::theta_fact(tm, p, q, static_cast<int>(n)) / oracle::theta_fact(C(q * t0 / tm), p, q, static_cast<int>(n));
    s += a * ipow(C(q * x), n);
  }
  return s;
}

// The p = 0 very-well-poised series with (a;q)_n in place of theta factorials.
cd w_oracle_p0(cd t0, const std::vector<cd>& t, cd x, cd q, long N) {
  cd s(0);
  for (long n = 0; n <= N; ++n) {
    cd a = (1.0 - t0 * ipow(q, 2 * n)) / (1.0 - t0) * qfact(t0, q, n) / qfact(q, q, n);
    for (const cd& tm : t) a *= qfact(tm, q, n) / qfact(cd(q * t0 / tm), q, n);
    s += a * ipow(cd(q * x), n);
  }
  return s;
}

struct FtData {
  cd t0, t1, t4, t5, t6, t7;
  std::vector<cd> tail() const { return {t1, t4, t5, t6, t7}; }
};

FtData ft_data(oracle::Rng& rng, cd q, long N) {
  FtData d;
  d.t0 = rng.annulus(0.4, 0.7);
  d.t1 = rng.annulus(0.5, 0.9);
  d.t4 = rng.annulus(0.5, 0.9);
  d.t5 = rng.annulus(0.5, 0.9);
  d.t6 = ipow(q, -N);
  d.t7 = q * d.t0 * d.t0 / (d.t1 * d.t4 * d.t5 * d.t6);
  return d;
}

std::array<X, 8> twelve(oracle::Rng& rng, const X& q, long N) {
  std::array<X, 8> t;
  for (int i = 0; i < 6; ++i) {
    const cd v = rng.annulus(i == 0 ? 0.4 : 0.5, i == 0 ? 0.7 : 0.9);
    t[static_cast<std::size_t>(i)] = xc(v.real(), v.imag());
  }
  t[6] = ipow(q, -N);
  X prod(1);
  for (int i = 1; i < 7; ++i) prod *= t[static_cast<std::size_t>(i)];
  t[7] = t[0] * t[0] * t[0] * q * q / prod;
  return t;
}

}  // namespace

TEST_CASE("sum_E: single term, p = 0 basic series and direct summation") {
  const Moduli<cd> m(cd(0.3, 0.1), cd(0.2));
  SeriesSpec<cd> one{{cd(1), cd(0.4)}, {cd(0.5)}, {}, m, std::nullopt};
  const auto r1 = sum_E(one);
  CHECK(r1.value == cd(1));
  CHECK(r1.terms == 1);

  // balanced, terminating at N = 3, p = 0
  const cd q(0.3, 0.1);
  const Moduli<cd> m0(q, cd(0));
  const cd a = ipow(q, -3), b(0.6, 0.2), c(0.5, -0.3), w1(0.7, 0.1);
  const cd w2 = a * b * c / (q * w1);
  SeriesSpec<cd> s0{{a, b, c}, {w1, w2}, {}, m0, std::nullopt};
  CHECK(is_balanced(s0));
  cd ref(0);
  for (long n = 0; n <= 3; ++n)
    ref += qfact(a, q, n) * qfact(b, q, n) * qfact(c, q, n) / (qfact(q, q, n) * qfact(w1, q, n) * qfact(w2, q, n));
  CHECK(rel(sum_E(s0).value, ref) < 1e-13);

  // generic p, with a cubic exponent
  const cd p(0.15, 0.05);
  SeriesSpec<cd> s{{a, b, c}, {w1, w2}, {cd(0.1), cd(0.02, 0.01), cd(-0.003)}, Moduli<cd>(q, p), std::nullopt};
  cd naive(0);
  for (long n = 0; n <= 3; ++n) {
    const cd P = s.alpha[0] * double(n) + s.alpha[1] * double(n * n) + s.alpha[2] * double(n * n * n);
    naive += oracle::theta_fact(a, p, q, static_cast<int>(n)) * oracle::theta_fact(b, p, q, static_cast<int>(n)) *
             oracle::theta_fact(c, p, q, static_cast<int>(n)) /
             (oracle::theta_fact(q, p, q, static_cast<int>(n)) * oracle::theta_fact(w1, p, q, static_cast<int>(n)) *
              oracle::theta_fact(w2, p, q, static_cast<int>(n))) *
             std::exp(P);
  }
  const auto rs = sum_E(s);
  CHECK(rel(rs.value, naive) < 1e-12);
  CHECK(rs.terminated);
  CHECK(rs.terms == 4);
}

TEST_CASE("sum_E: non-terminating input needs a certified cutoff") {
  // p = 0 and e^{alpha_1} = 1/2, so the term ratios tend to 1/2
  const Moduli<cd> m(cd(0.3), cd(0));
  SeriesSpec<cd> s{{cd(0.5), cd(0.4)}, {cd(0.6)}, {cd(std::log(0.5)), cd(0), cd(0)}, m, std::nullopt};
  try {
    sum_E(s);
    FAIL("expected NonTerminatingWithoutBound");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NonTerminatingWithoutBound);
  }
  s.n_max = 80;
  const auto r = sum_E(s);
  CHECK(!r.terminated);
  CHECK(r.last_term < 1e-20);
  cd direct(0);
  for (long n = 0; n <= 80; ++n)
    direct += qfact(cd(0.5), cd(0.3), n) * qfact(cd(0.4), cd(0.3), n) /
              (qfact(cd(0.3), cd(0.3), n) * qfact(cd(0.6), cd(0.3), n)) * std::pow(0.5, double(n));
  CHECK(rel(r.value, direct) < 1e-14);
  s.alpha[0] = cd(0);  // ratios tend to 1: no certificate
  CHECK_THROWS_AS(sum_E(s), Error);
}

TEST_CASE("sum_V: trivial, Frenkel-Turaev and the p = 0 limit") {
  const cd q(0.35, 0.1), p(0.2, -0.1);
  const Moduli<cd> m(q, p);
  oracle::Rng rng(101);

  const FtData d0 = ft_data(rng, q, 0);
  CHECK(sum_V(d0.t0, d0.tail(), m).value == cd(1));
  CHECK(frenkel_turaev_rhs(d0.t0, d0.t1, d0.t4, d0.t5, 0, m) == cd(1));

  for (long N : {1L, 2L, 4L}) {
    const FtData d = ft_data(rng, q, N);
    const auto s = sum_V(d.t0, d.tail(), m);
    CHECK(s.terms == N + 1);
    const cd direct = v_oracle(d.t0, d.tail(), cd(1), q, p, N);
    CHECK(rel(s.value, direct) < 1e-11 * std::max(1.0, s.max_term / std::abs(s.value)));
    CHECK(rel(frenkel_turaev_rhs(d.t0, d.t1, d.t4, d.t5, N, m), direct) <
          1e-11 * std::max(1.0, s.max_term / std::abs(s.value)));
  }

  // p = 0 and p -> 0
  const FtData d = ft_data(rng, q, 3);
  const cd w = w_oracle_p0(d.t0, d.tail(), cd(1), q, 3);
  CHECK(rel(sum_V(d.t0, d.tail(), Moduli<cd>(q, cd(0))).value, w) < 1e-12);
  CHECK(rel(sum_V(d.t0, d.tail(), Moduli<cd>(q, cd(1e-10))).value, w) < 1e-7);
}

TEST_CASE("sum_V: argument x and balancing sign") {
  const cd q(0.4), p(0.1);
  const Moduli<cd> m(q, p);
  oracle::Rng rng(7);
  const FtData d = ft_data(rng, q, 2);
  const cd x(0.7, 0.2);
  const auto s = sum_V(VSpec<cd>{d.t0, d.tail(), x, m, std::nullopt});
  CHECK(rel(s.value, v_oracle(d.t0, d.tail(), x, q, p, 2)) < 1e-12);
  CHECK(s.balance_sign == 1);

  auto bad = d.tail();
  bad[4] *= 1.001;
  try {
    sum_V(d.t0, bad, m);
    FAIL("expected BalancingViolation");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::BalancingViolation);
  }
  auto nonterm = d.tail();
  nonterm[3] = cd(0.5);
  nonterm[4] = q * d.t0 * d.t0 / (nonterm[0] * nonterm[1] * nonterm[2] * nonterm[3]);
  try {
    sum_V(d.t0, nonterm, m);
    FAIL("expected NonTerminatingWithoutBound");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NonTerminatingWithoutBound);
    CHECK(std::string(e.what()).find("not terminating") != std::string::npos);
  }
}

TEST_CASE("sum_V: termination leaves exactly N+1 terms and the next one vanishes") {
  const cd q(0.3, 0.2), p(0.25);
  oracle::Rng rng(9);
  const FtData d = ft_data(rng, q, 3);
  CHECK(sum_V(d.t0, d.tail(), Moduli<cd>(q, p)).terms == 4);
  CHECK(std::abs(oracle::theta_fact(d.t6, p, q, 4)) < 1e-12);
  CHECK(theta_factorial(d.t6, p, q, 4) == cd(0));
}

TEST_CASE("sum_V: total ellipticity in the parameters") {
  const X q = xc(0.35, 0.1), p = xc(0.2, -0.1);
  const Moduli<X> m(q, p);
  oracle::Rng rng(13);
  const auto t = twelve(rng, q, 3);
  const std::vector<X> base{t[1], t[2], t[3], t[4], t[5], t[6], t[7]};
  const X v = sum_V(t[0], base, m).value;
  for (int i = 0; i < 5; ++i) {
    auto moved = base;
    moved[static_cast<std::size_t>(i)] *= p;
    moved[6] /= p;  // keeps the balancing
    CHECK(rdev(sum_V(t[0], moved, m).value, v) < 1e-10);
  }
}

TEST_CASE("Frenkel-Turaev in extended precision") {
  const X q = xc(0.45, 0.2), p = xc(0.3, 0.1);
  const Moduli<X> m(q, p);
  oracle::Rng rng(21);
  for (long N = 1; N <= 6; ++N) {
    const auto t = twelve(rng, q, N);
    const X t7 = q * t[0] * t[0] / (t[1] * t[4] * t[5] * t[6]);
    const X lhs = sum_V(t[0], {t[1], t[4], t[5], t[6], t7}, m).value;
    // rounding scales with the largest term, not with the (possibly tiny) sum
    const auto s = sum_V(t[0], {t[1], t[4], t[5], t[6], t7}, m);
    const X rhs = frenkel_turaev_rhs(t[0], t[1], t[4], t[5], N, m);
    CHECK(to_d(abs(X(lhs - rhs))) < 1e-28 * std::max(to_d(s.max_term), to_d(abs(rhs))));
  }
}

TEST_CASE("Bailey transform") {
  const X q = xc(0.4, 0.15), p = xc(0.25, -0.1);
  const Moduli<X> m(q, p);
  oracle::Rng rng(31);
  const std::array<int, 4> id{0, 1, 2, 3}, swap45{1, 0, 2, 3};

  const auto t0 = twelve(rng, q, 0);
  const auto r0 = bailey_transform_check(t0, 0, m, id);
  CHECK(r0.pass);
  CHECK(std::abs(r0.lhs - 1.0) < 1e-15);

  const auto t3 = twelve(rng, q, 3);
  const auto a = bailey_transform_check(t3, 3, m, id);
  const auto b = bailey_transform_check(t3, 3, m, swap45);
  CHECK(a.pass);
  CHECK(a.rel_err <= 1e-11);
  CHECK(a.rhs == b.rhs);
  std::array<int, 4> perm{0, 1, 2, 3};
  do {
    CHECK(bailey_transform_check(t3, 3, m, perm, 1e-25).pass);
  } while (std::next_permutation(perm.begin(), perm.end()));

  auto bad = t3;
  bad[2] *= xc(1.01);
  CHECK_THROWS_AS(bailey_transform_check(bad, 3, m, id), Error);

  // the s-parameter map is an involution
  const auto s = bailey_s_params(t3[0], t3[1], t3[2], t3[3], q);
  const auto back = bailey_s_params(s[0], s[1], s[2], s[3], q);
  for (int i = 0; i < 4; ++i) CHECK(rdev(back[static_cast<std::size_t>(i)], t3[static_cast<std::size_t>(i)]) < 1e-30);
}

TEST_CASE("contiguous relations") {
  const X q = xc(0.4, 0.15), p = xc(0.25, -0.1);
  const Moduli<X> m(q, p);
  oracle::Rng rng(41);
  for (long n : {0L, 2L, 3L}) {
    const auto t = twelve(rng, q, n);
    const auto r = contiguous_residuals(t, m);
    CHECK(r.n == n);
    for (int k = 0; k < 3; ++k)
      CHECK(to_d(abs(r.residual[static_cast<std::size_t>(k)])) <= 1e-11 * to_d(r.scale[static_cast<std::size_t>(k)]));
  }
  // n = 3 with t6, t7 swapped: relation 3 is symmetric under the exchange.
  // t7 is a q-power as well, so both orderings terminate.
  auto t = twelve(rng, q, 3);
  t[7] = ipow(q, -1);
  X prod(1);
  for (int i = 1; i < 5; ++i) prod *= t[static_cast<std::size_t>(i)];
  t[5] = t[0] * t[0] * t[0] * q * q / (prod * t[6] * t[7]);
  auto sw = t;
  std::swap(sw[6], sw[7]);
  const auto ra = contiguous_residuals(t, m), rb = contiguous_residuals(sw, m);
  const double sc = std::max(to_d(ra.scale[2]), to_d(rb.scale[2]));
  CHECK(to_d(abs(ra.residual[2])) <= 1e-11 * sc);
  CHECK(to_d(abs(rb.residual[2])) <= 1e-11 * sc);
  CHECK(std::abs(to_d(abs(ra.residual[2])) - to_d(abs(rb.residual[2]))) <= 1e-11 * sc);

  // t7/t6 = q puts theta(1) in a relation 3 denominator
  auto sing = t;
  sing[7] = sing[6] * q;
  sing[5] = t[5] * t[7] / sing[7];
  try {
    contiguous_residuals(sing, m);
    FAIL("expected PoleHit");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::PoleHit);
  }

  const Moduli<cd> md(cd(0.4, 0.15), cd(0.25, -0.1));
  std::array<cd, 8> td;
  const auto t0x = twelve(rng, q, 0);
  for (int i = 0; i < 8; ++i) td[static_cast<std::size_t>(i)] = to_cd(t0x[static_cast<std::size_t>(i)]);
  const auto z = contiguous_residuals(td, md);
  for (int k = 0; k < 3; ++k) CHECK(std::abs(z.residual[static_cast<std::size_t>(k)]) <= 1e-12 * z.scale[static_cast<std::size_t>(k)]);
}

namespace {

template <class C>
C milne_oracle(const std::vector<C>& ts, const C& b, const C& c, const C& d, const std::vector<long>& Ns, const C& q,
               const C& p) {
  const std::size_t n = ts.size();
  long Nt = 0;
  for (long N : Ns) Nt += N;
  const C e = ipow(q, 1 + Nt) / (b * c * d);
  auto tf = [&](const C& z, long k) { return oracle::theta_fact(z, p, q, static_cast<int>(k)); };
  auto th = [&](const C& z) { return oracle::theta(z, p); };
  C sum(0);
  std::vector<long> lam(n, 0);
  for (;;) {
    long l = 0, wexp = 0;
    for (std::size_t j = 0; j < n; ++j) {
      l += lam[j];
      wexp += static_cast<long>(j + 1) * lam[j];
    }
    C num = ipow(q, wexp), den(1);
    for (std::size_t j = 0; j < n; ++j) {
      num *= th(C(ts[j] * ipow(q, lam[j] + l)));
      den *= th(ts[j]);
    }
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) {
        num *= th(C(ts[i] / ts[j] * ipow(q, lam[i] - lam[j])));
        den *= th(C(ts[i] / ts[j]));
      }
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        num *= tf(C(ts[i] / ts[j] * ipow(q, -Ns[j])), lam[i]);
        den *= tf(C(q * ts[i] / ts[j]), lam[i]);
      }
    for (std::size_t j = 0; j < n; ++j) {
      num *= tf(ts[j], l);
      den *= tf(C(ts[j] * ipow(q, 1 + Ns[j])), l);
    }
    num *= tf(b, l) * tf(c, l);
    den *= tf(C(q / d), l) * tf(C(q / e), l);
    for (std::size_t j = 0; j < n; ++j) {
      num *= tf(C(d * ts[j]), lam[j]) * tf(C(e * ts[j]), lam[j]);
      den *= tf(C(ts[j] * q / b), lam[j]) * tf(C(ts[j] * q / c), lam[j]);
    }
    sum += num / den;
    std::size_t k = n;
    while (k > 0 && lam[k - 1] == Ns[k - 1]) lam[--k] = 0;
    if (k == 0) break;
    ++lam[k - 1];
  }
  return sum;
}

}  // namespace

TEST_CASE("Milne sum") {
  const cd q(0.4, 0.1), p(0.2, 0.05);
  const Moduli<cd> m(q, p);
  const cd b(0.6, 0.2), c(0.5, -0.3), d(0.7, 0.1);
  const auto zero = milne_sum_sides<cd>({cd(0.5), cd(0.3, 0.4)}, b, c, d, {0, 0}, m);
  CHECK(std::abs(zero.first - 1.0) < 1e-15);
  CHECK(std::abs(zero.second - 1.0) < 1e-15);

  // n = 1 is the Frenkel-Turaev sum with t0 = t and parameters b, c, dt, et, q^-N
  const cd t(0.55, 0.2);
  for (long N = 1; N <= 3; ++N) {
    const auto s1 = milne_sum_sides<cd>({t}, b, c, d, {N}, m);
    const cd t6 = ipow(q, -N), t7 = q * t * t / (b * c * d * t * t6);
    const cd ft = v_oracle(t, {b, c, cd(d * t), t6, t7}, cd(1), q, p, N);
    CHECK(rel(s1.first, ft) < 1e-11);
    CHECK(rel(s1.second, frenkel_turaev_rhs(t, b, c, cd(d * t), N, m)) < 1e-11);
  }

  const std::vector<cd> ts{cd(0.5, 0.1), cd(0.3, 0.4)};
  double mt = 0;
  const auto s2 = milne_sum_sides<cd>(ts, b, c, d, {1, 1}, m, default_policy<cd>(), &mt);
  CHECK(rel(s2.first, milne_oracle(ts, b, c, d, {1, 1}, q, p)) < 1e-12);
  CHECK(rel(s2.first, s2.second) < 1e-11);
  CHECK(mt > 0);

  const X qx = xc(0.4, 0.1), px = xc(0.2, 0.05);
  const std::vector<X> tx{xc(0.5, 0.1), xc(0.3, 0.4), xc(-0.2, 0.6)};
  const auto s3 = milne_sum_sides<X>(tx, xc(0.6, 0.2), xc(0.5, -0.3), xc(0.7, 0.1), {2, 1, 2}, Moduli<X>(qx, px));
  CHECK(rdev(s3.first, s3.second) < 1e-28);
}

namespace {

template <class C>
C gr_oracle(const std::vector<C>& t, const std::array<C, 3>& tx, const C& tg, long N, const C& q, const C& p) {
  const int n = static_cast<int>(t.size());
  auto tf = [&](const C& z, long k) { return oracle::theta_fact(z, p, q, static_cast<int>(k)); };
  C P(1);
  for (const C& v : t) P *= v;
  for (const C& v : tx) P *= v;
  C sum(0);
  std::vector<long> lam(static_cast<std::size_t>(n), 0);
  // all lambda in [0..N]^n, keeping those with |lambda| = N
  for (;;) {
    long tot = 0;
    for (long v : lam) tot += v;
    if (tot == N) {
      C num(1), den(1);
      for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) num *= tf(C(tg * t[i] * t[j]), lam[i] + lam[j]);
      for (int i = 0; i < n; ++i)
        for (const C& x : tx) num *= tf(C(tg * t[i] * x), lam[i]);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) num *= tf(C(t[i] / t[j]), -lam[j]);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          if (i != j) den *= tf(C(t[i] / t[j]), lam[i] - lam[j]);
      for (int j = 0; j < n; ++j) den *= tf(C(ipow(tg, n + 1) / t[j] * P), -lam[j]);
      sum += num / den;
    }
    int k = n;
    while (k > 0 && lam[static_cast<std::size_t>(k - 1)] == N) lam[static_cast<std::size_t>(--k)] = 0;
    if (k == 0) break;
    ++lam[static_cast<std::size_t>(k - 1)];
  }
  return sum;
}

}  // namespace

TEST_CASE("Gustafson-Rakha-type sums") {
  const cd q(0.4, 0.1), p(0.2, 0.05);
  const Moduli<cd> m(q, p);
  const std::array<cd, 3> tx{cd(0.5, 0.2), cd(0.6, -0.3), cd(0.45, 0.4)};
  const cd tg(0.7, 0.1);

  const cd a(0.6, 0.3);
  const auto z = gustafson_rakha_sum_sides<cd>({a, cd(1.0 / a)}, tx, tg, 0, m);
  CHECK(std::abs(z.first - 1.0) < 1e-14);
  CHECK(std::abs(z.second - 1.0) < 1e-14);

  const std::vector<cd> t2{a, cd(1.0 / (a * q))};
  const auto s2 = gustafson_rakha_sum_sides<cd>(t2, tx, tg, 1, m);
  CHECK(rel(s2.first, gr_oracle(t2, tx, tg, 1, q, p)) < 1e-12);
  CHECK(rel(s2.first, s2.second) < 1e-10);

  const std::vector<cd> t3{a, cd(0.5, -0.4), cd(1.0 / (a * cd(0.5, -0.4) * q * q))};
  const auto s3 = gustafson_rakha_sum_sides<cd>(t3, tx, tg, 2, m);
  CHECK(rel(s3.first, gr_oracle(t3, tx, tg, 2, q, p)) < 1e-12);
  CHECK(rel(s3.first, s3.second) < 1e-9);

  CHECK_THROWS_AS(gustafson_rakha_sum_sides<cd>({a, cd(0.5)}, tx, tg, 1, m), Error);
}
