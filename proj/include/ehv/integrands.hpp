#pragma once

// Integrand families over the unit torus and their closed-form evaluations.
// Integrands are bare: the 1/(2 pi i)^n and dz/z measure live in quadrature,
// so the mean over equispaced nodes approximates the integral directly.

#include <array>
#include <cmath>
#include <complex>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "ehv/error.hpp"
#include "ehv/gamma_fn.hpp"
#include "ehv/numeric.hpp"
#include "ehv/special_core.hpp"

namespace ehv {

enum class Family { E, Cn_I, Cn_II, Cn_III, An_I, An_II, An_III, GENERIC_VWP, MINUS_A };

const char* to_string(Family f) noexcept;
Family family_from_string(const std::string& s);

template <class C>
struct ParamSet {
  std::vector<C> t, w, f, s, x;
  std::map<std::string, C> extras;  // scalar t, s, rho, gamma, alpha, beta

  const C& extra(const std::string& key) const {
    auto it = extras.find(key);
    if (it == extras.end()) fail(ErrorKind::InvalidSpec, "missing scalar parameter '" + key + "'");
    return it->second;
  }
  bool has(const std::string& key) const { return extras.count(key) != 0; }
};

template <class C>
struct IntegrandSpec {
  Family family;
  int n;  // rank; 1 for E and the single-variable families
  ParamSet<C> params;
  Moduli<C> moduli;
  int m = 13;  // GENERIC_VWP / MINUS_A order
};

struct DomainCheck {
  std::string name;
  double margin;  // positive when the strict inequality holds
  bool pass;
};

struct ValidationResult {
  bool pass = true;
  std::vector<DomainCheck> checks;

  std::string describe_failures() const {
    std::ostringstream os;
    bool first = true;
    for (const auto& c : checks)
      if (!c.pass) {
        if (!first) os << "; ";
        os << c.name << " (margin " << c.margin << ")";
        first = false;
      }
    return os.str();
  }
};

namespace detail {

inline std::size_t uz(int i) { return static_cast<std::size_t>(i); }

template <class C>
C prod_all(const std::vector<C>& v) {
  C r(1);
  for (const C& x : v) r *= x;
  return r;
}

inline double factorial(int n) {
  double r = 1;
  for (int k = 2; k <= n; ++k) r *= k;
  return r;
}

template <class C>
void require_count(const std::vector<C>& v, std::size_t k, const char* what, Family fam) {
  if (v.size() != k) {
    std::ostringstream os;
    os << to_string(fam) << " needs " << k << " " << what << " parameters, got " << v.size();
    fail(ErrorKind::InvalidSpec, os.str());
  }
}

// (pq)^{e/2} for integer e, via the principal square root.
template <class C>
C pq_half_power(const Moduli<C>& m, long e) {
  using std::sqrt;
  return ipow(C(sqrt(C(m.q * m.p))), e);
}

}  // namespace detail

// Checks parameter counts for the family; throws InvalidSpec.
template <class C>
void check_param_counts(const IntegrandSpec<C>& s) {
  using detail::require_count;
  const auto& P = s.params;
  const std::size_t n = static_cast<std::size_t>(s.n);
  if (s.n < 1) fail(ErrorKind::InvalidSpec, "rank n must be positive");
  for (const auto* v : {&P.t, &P.w, &P.f, &P.s, &P.x})
    for (const C& z : *v)
      if (is_zero(z)) fail(ErrorKind::InvalidSpec, "parameters must be nonzero");
  switch (s.family) {
    case Family::E: require_count(P.t, 5, "t", s.family); break;
    case Family::Cn_I: require_count(P.t, 2 * n + 3, "t", s.family); break;
    case Family::Cn_II: require_count(P.t, 5, "t", s.family); (void)P.extra("t"); break;
    case Family::Cn_III:
      require_count(P.x, n, "x", s.family);
      require_count(P.t, 3, "t", s.family);
      (void)P.extra("t");
      break;
    case Family::An_I:
      require_count(P.t, n + 1, "t", s.family);
      require_count(P.f, n + 2, "f", s.family);
      break;
    case Family::An_II:
      require_count(P.t, 5, "t", s.family);
      (void)P.extra("t");
      (void)P.extra("s");
      break;
    case Family::An_III: require_count(P.t, n + 4, "t", s.family); (void)P.extra("t"); break;
    case Family::GENERIC_VWP:
      if (s.m < 9) fail(ErrorKind::InvalidSpec, "GENERIC_VWP needs m >= 9");
      require_count(P.t, static_cast<std::size_t>(s.m - 8), "t", s.family);
      (void)P.extra("rho");
      break;
    case Family::MINUS_A:
      if (s.m < 7) fail(ErrorKind::InvalidSpec, "MINUS_A needs m >= 7");
      require_count(P.t, static_cast<std::size_t>(s.m - 6), "t", s.family);
      break;
  }
}

// The product written A (or B) in each family's integrand.
template <class C>
C derived_A(const IntegrandSpec<C>& s) {
  const auto& P = s.params;
  const auto& m = s.moduli;
  const int n = s.n;
  switch (s.family) {
    case Family::E:
    case Family::Cn_I: return detail::prod_all(P.t);
    case Family::Cn_II: return ipow(P.extra("t"), 2 * n - 2) * detail::prod_all(P.t);
    case Family::Cn_III: return P.extra("t") * detail::prod_all(P.t) * ipow(m.q, n - 1);
    case Family::An_I: return detail::prod_all(P.t) * detail::prod_all(P.f);
    case Family::An_II: return ipow(C(P.extra("t") * P.extra("s")), n - 1) * detail::prod_all(P.t);
    case Family::An_III: return ipow(P.extra("t"), n + 2) * detail::prod_all(P.t);
    case Family::GENERIC_VWP: return detail::pq_half_power(m, 13 - s.m) * detail::prod_all(P.t);
    case Family::MINUS_A: return detail::pq_half_power(m, 11 - s.m) * detail::prod_all(P.t);
  }
  return C(0);
}

template <class C>
ValidationResult validate_domain(const IntegrandSpec<C>& s) {
  using std::abs;
  ValidationResult out;
  try {
    check_param_counts(s);
  } catch (const Error& e) {
    out.pass = false;
    out.checks.push_back({e.what(), -1.0, false});
    return out;
  }
  auto add = [&](std::string name, double margin) {
    const bool ok = margin > 0;
    out.checks.push_back({std::move(name), margin, ok});
    out.pass = out.pass && ok;
  };
  auto inside = [&](const std::string& label, const std::vector<C>& v) {
    for (std::size_t i = 0; i < v.size(); ++i)
      add("|" + label + std::to_string(i) + "|<1", 1.0 - to_d(abs(v[i])));
  };
  const auto& P = s.params;
  const double pq = to_d(abs(C(s.moduli.q * s.moduli.p)));
  const double A = to_d(abs(derived_A(s)));
  switch (s.family) {
    case Family::E:
    case Family::Cn_I:
      inside("t", P.t);
      add("|pq|<|A|", A - pq);
      break;
    case Family::Cn_II:
      add("|t|<1", 1.0 - to_d(abs(P.extra("t"))));
      inside("t", P.t);
      add("|pq|<|B|", A - pq);
      break;
    case Family::Cn_III: {
      inside("x", P.x);
      inside("t", P.t);
      const double tt = to_d(abs(P.extra("t")));
      for (std::size_t i = 0; i < P.x.size(); ++i)
        add("|t|<|x" + std::to_string(i) + "|", to_d(abs(P.x[i])) - tt);
      add("|pq|<|A|", A - pq);
      break;
    }
    case Family::An_I:
      inside("t", P.t);
      inside("f", P.f);
      add("|pq|<|AB|", A - pq);
      break;
    case Family::An_II:
      add("|t|<1", 1.0 - to_d(abs(P.extra("t"))));
      add("|s|<1", 1.0 - to_d(abs(P.extra("s"))));
      inside("t", P.t);
      add("|pq|<|(ts)^(n-1) prod t|", A - pq);
      break;
    case Family::An_III: {
      const C tg = P.extra("t");
      add("|t|<1", 1.0 - to_d(abs(tg)));
      inside("t", P.t);
      for (std::size_t k = static_cast<std::size_t>(s.n) + 1; k < P.t.size(); ++k)
        add("|t t" + std::to_string(k) + "|<1", 1.0 - to_d(abs(C(tg * P.t[k]))));
      add("|pq|<|A|", A - pq);
      break;
    }
    case Family::GENERIC_VWP: inside("t", P.t); break;
    case Family::MINUS_A:
      inside("t", P.t);
      add("|pq|<|A|", A - pq);
      break;
  }
  return out;
}

// Compiled integrand: caches the gamma evaluator and the parameter products.
template <class C>
class Integrand {
 public:
  using R = real_t<C>;

  explicit Integrand(const IntegrandSpec<C>& spec,
                     const TruncationPolicy<R>& pol = default_policy<C>())
      : s_(spec), g_(spec.moduli, pol), pol_(pol) {
    check_param_counts(s_);
    A_ = derived_A(s_);
    const auto& P = s_.params;
    if (P.has("t")) tg_ = P.extra("t");
    if (P.has("s")) sg_ = P.extra("s");
    if (s_.family == Family::GENERIC_VWP) {
      using std::log;
      const C rho = P.extra("rho");
      gamma_ = P.has("gamma") ? P.extra("gamma") : C(0);
      const C pq = s_.moduli.q * s_.moduli.p;
      const C pt = detail::prod_all(P.t);
      // rho^{(m+1)/2} and rho^{(1-m)/2} through the principal square root
      using std::sqrt;
      const C rh = sqrt(rho);
      vwp_num_ = ipow(rh, s_.m + 1) * ipow(pq, -6) / pt;
      vwp_den_ = ipow(rh, 1 - s_.m) * ipow(pq, 6) * pt;
      vwp_sq_ = (rho / pq) * (rho / pq);
      rho_ = rho;
      logq_ = log(s_.moduli.q);
    }
  }

  const IntegrandSpec<C>& spec() const { return s_; }
  const EllipticGamma<C>& gamma() const { return g_; }
  C A() const { return A_; }

  // Number of free integration variables.
  int dim() const {
    switch (s_.family) {
      case Family::E:
      case Family::GENERIC_VWP:
      case Family::MINUS_A: return 1;
      default: return s_.n;
    }
  }
  bool an_constraint() const {
    return s_.family == Family::An_I || s_.family == Family::An_II || s_.family == Family::An_III;
  }

  C operator()(const C* z) const {
    switch (s_.family) {
      case Family::E: return bc_single(z[0], s_.params.t, A_);
      case Family::Cn_I: return cn_I(z);
      case Family::Cn_II: return cn_II(z);
      case Family::Cn_III: return cn_III(z);
      case Family::An_I: return an_I(z);
      case Family::An_II: return an_II(z);
      case Family::An_III: return an_III(z);
      case Family::GENERIC_VWP: return generic_vwp(z[0]);
      case Family::MINUS_A: return minus_A(z[0]);
    }
    return C(0);
  }

  C operator()(const std::vector<C>& z) const {
    if (static_cast<int>(z.size()) != dim())
      fail(ErrorKind::InvalidSpec, "integrand called with the wrong number of variables");
    return (*this)(z.data());
  }

 private:
  // prod_r Gamma(t_r z, t_r/z) / Gamma(z^2, z^-2, a z, a/z)
  C bc_single(const C& z, const std::vector<C>& ts, const C& a) const {
    const C zi = C(1) / z;
    C r = g_.recip_pair(C(z * z));
    for (const C& t : ts) r *= g_(C(t * z)) * g_(C(t * zi));
    return r / (g_(C(a * z)) * g_(C(a * zi)));
  }

  // 1 / Gamma(zj zk, zj/zk, zk/zj, 1/(zj zk))
  C cross_recip(const C& a, const C& b) const { return g_.recip_pair(C(a * b)) * g_.recip_pair(C(a / b)); }

  C cn_I(const C* z) const {
    const int n = s_.n;
    C r(1);
    for (int j = 0; j < n; ++j)
      for (int k = j + 1; k < n; ++k) r *= cross_recip(z[j], z[k]);
    for (int j = 0; j < n; ++j) r *= bc_single(z[j], s_.params.t, A_);
    return r;
  }

  C cn_II(const C* z) const {
    const int n = s_.n;
    C r(1);
    for (int j = 0; j < n; ++j)
      for (int k = j + 1; k < n; ++k) {
        const C a = z[j] * z[k], b = z[j] / z[k];
        r *= g_(C(tg_ * a)) * g_(C(tg_ * b)) * g_(C(tg_ / b)) * g_(C(tg_ / a)) * cross_recip(z[j], z[k]);
      }
    for (int j = 0; j < n; ++j) r *= bc_single(z[j], s_.params.t, A_);
    return r;
  }

  C cn_III(const C* z) const {
    const int n = s_.n;
    const auto& P = s_.params;
    const C& p = s_.moduli.p;
    C r(1);
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        r *= z[j] * theta(C(z[i] / z[j]), p, pol_) * theta(C(C(1) / (z[i] * z[j])), p, pol_);
    for (int i = 0; i < n; ++i) {
      const C xi = P.x[detail::uz(i)];
      r *= bc_single(z[i], {xi, P.t[0], P.t[1], P.t[2], C(tg_ / xi)}, A_);
    }
    return r;
  }

  static std::vector<C> full_vars(const C* z, int n) {
    std::vector<C> Z(z, z + n);
    C prod(1);
    for (int i = 0; i < n; ++i) prod *= z[i];
    Z.push_back(C(1) / prod);
    return Z;
  }

  C an_I(const C* z) const {
    const auto Z = full_vars(z, s_.n);
    const auto& P = s_.params;
    C r(1);
    for (std::size_t i = 0; i < Z.size(); ++i)
      for (std::size_t j = i + 1; j < Z.size(); ++j) r *= g_.recip_pair(C(Z[i] / Z[j]));
    for (const C& zk : Z) {
      const C zi = C(1) / zk;
      for (const C& t : P.t) r *= g_(C(t * zi));
      for (const C& f : P.f) r *= g_(C(f * zk));
      r /= g_(C(A_ * zk));
    }
    return r;
  }

  C an_II(const C* z) const {
    const auto Z = full_vars(z, s_.n);
    const auto& T = s_.params.t;
    C r(1);
    for (std::size_t i = 0; i < Z.size(); ++i)
      for (std::size_t j = i + 1; j < Z.size(); ++j) {
        const C zz = Z[i] * Z[j];
        r *= g_(C(tg_ * zz)) * g_(C(sg_ / zz)) * g_.recip_pair(C(Z[i] / Z[j]));
      }
    for (const C& zk : Z) {
      const C zi = C(1) / zk;
      r *= g_(C(T[0] * zk)) * g_(C(T[1] * zk)) * g_(C(T[2] * zk)) * g_(C(T[3] * zi)) * g_(C(T[4] * zi));
      r /= g_(C(A_ * zk));
    }
    return r;
  }

  C an_III(const C* z) const {
    const int n = s_.n;
    const auto Z = full_vars(z, n);
    const auto& T = s_.params.t;
    C r(1);
    for (std::size_t i = 0; i < Z.size(); ++i)
      for (std::size_t j = i + 1; j < Z.size(); ++j)
        r *= g_(C(tg_ * Z[i] * Z[j])) * g_.recip_pair(C(Z[i] / Z[j]));
    for (const C& zk : Z) {
      const C zi = C(1) / zk;
      for (int k = 0; k <= n; ++k) r *= g_(C(T[detail::uz(k)] * zi));
      for (int k = n + 1; k < n + 4; ++k) r *= g_(C(tg_ * T[detail::uz(k)] * zk));
      r /= g_(C(A_ * zi));
    }
    return r;
  }

  // z = q^y with the principal logarithm; 1/Gamma(z^-2) = Gamma(pq z^2).
  C generic_vwp(const C& z) const {
    using std::exp;
    using std::log;
    const C pq = s_.moduli.q * s_.moduli.p;
    C r = g_(C(pq * z * z));
    for (const C& t : s_.params.t) r *= g_(C(t * z)) / g_(C(rho_ * z / t));
    r *= g_(C(vwp_num_ * z));
    r /= g_(C(vwp_sq_ * z * z)) * g_(C(vwp_den_ * z));
    if (!is_zero(gamma_)) r *= exp(gamma_ * log(z) / logq_);
    return r;
  }

  C minus_A(const C& z) const { return bc_single(z, s_.params.t, C(-A_)); }

  IntegrandSpec<C> s_;
  EllipticGamma<C> g_;
  TruncationPolicy<R> pol_;
  C A_{};
  C tg_{}, sg_{};
  C rho_{}, gamma_{}, vwp_num_{}, vwp_den_{}, vwp_sq_{}, logq_{};
};

// Single-point conveniences with the operation names used in the docs.
template <class C>
C delta_E(const C& z, const IntegrandSpec<C>& s) {
  return Integrand<C>(s)(&z);
}

template <class C>
C delta(const std::vector<C>& z, const IntegrandSpec<C>& s) {
  return Integrand<C>(s)(z);
}

template <class C>
C generic_vwp_integrand(const C& z, int m, const std::vector<C>& t, const C& rho, const C& gamma,
                        const Moduli<C>& mod, C* A_out = nullptr) {
  IntegrandSpec<C> s{Family::GENERIC_VWP, 1, {}, mod, m};
  s.params.t = t;
  s.params.extras["rho"] = rho;
  s.params.extras["gamma"] = gamma;
  Integrand<C> f(s);
  if (A_out) *A_out = f.A();
  return f(&z);
}

// The eight parameters +-(pq)^{1/2}, +-q^{1/2}p, +-p^{1/2}q, +-pq.
template <class C>
std::vector<C> doubling_parameters(const Moduli<C>& m) {
  using std::sqrt;
  const C a = sqrt(C(m.q * m.p)), b = sqrt(m.q) * m.p, c = sqrt(m.p) * m.q, d = m.q * m.p;
  return {a, C(-a), b, C(-b), c, C(-c), d, C(-d)};
}

// (p;p)_inf (q;q)_inf
template <class C>
C pq_pochhammer(const Moduli<C>& m, const TruncationPolicy<real_t<C>>& pol = default_policy<C>()) {
  return qpochhammer(m.p, m.p, pol) * qpochhammer(m.q, m.q, pol);
}

template <class C>
C rhs_an_II(const ParamSet<C>& P, int n, const EllipticGamma<C>& g, const C& norm);
template <class C>
C rhs_an_III(const ParamSet<C>& P, int n, const EllipticGamma<C>& g, const C& norm);

namespace detail {

template <class C>
C rhs_E(const std::vector<C>& t, const EllipticGamma<C>& g, const C& pp_qq) {
  const C A = prod_all(t);
  C r = C(2) / pp_qq;
  for (std::size_t i = 0; i < t.size(); ++i)
    for (std::size_t j = i + 1; j < t.size(); ++j) r *= g(C(t[i] * t[j]));
  for (const C& x : t) r /= g(C(A / x));
  return r;
}

}  // namespace detail

// Closed-form value of the torus integral (mean of the bare integrand).
template <class C>
C rhs_closed_form(const IntegrandSpec<C>& s,
                  const TruncationPolicy<real_t<C>>& pol = default_policy<C>()) {
  using detail::uz;
  check_param_counts(s);
  const EllipticGamma<C> g(s.moduli, pol);
  const C ppqq = pq_pochhammer(s.moduli, pol);
  const auto& P = s.params;
  const auto& q = s.moduli.q;
  const auto& p = s.moduli.p;
  const int n = s.n;
  const C norm = C(detail::factorial(n + 1)) / ipow(ppqq, n);  // A_n families
  switch (s.family) {
    case Family::E: return detail::rhs_E(P.t, g, ppqq);
    case Family::Cn_I: {
      const C A = derived_A(s);
      C r = C(std::pow(2.0, n) * detail::factorial(n)) / ipow(ppqq, n);
      for (std::size_t i = 0; i < P.t.size(); ++i)
        for (std::size_t j = i + 1; j < P.t.size(); ++j) r *= g(C(P.t[i] * P.t[j]));
      for (const C& x : P.t) r /= g(C(A / x));
      return r;
    }
    case Family::Cn_II: {
      const C B = derived_A(s);
      const C t = P.extra("t");
      C r = C(std::pow(2.0, n) * detail::factorial(n)) / ipow(ppqq, n);
      for (int j = 1; j <= n; ++j) {
        r *= g(ipow(t, j)) / g(t);
        const C tj1 = ipow(t, j - 1);
        for (int a = 0; a < 5; ++a)
          for (int b = a + 1; b < 5; ++b) r *= g(C(tj1 * P.t[uz(a)] * P.t[uz(b)]));
        const C t1j = ipow(t, 1 - j);
        for (const C& x : P.t) r /= g(C(t1j * B / x));
      }
      return r;
    }
    case Family::Cn_III: {
      const C A = derived_A(s);
      const C t = P.extra("t");
      const auto& x = P.x;
      const auto& T = P.t;
      C r = C(std::pow(2.0, n)) / ipow(ppqq, n);
      for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
          r *= x[uz(j)] * theta(C(x[uz(i)] / x[uz(j)]), p, pol) * theta(C(t / (x[uz(i)] * x[uz(j)])), p, pol);
      r *= ipow(g(t), n);
      for (int i = 0; i < n; ++i) {
        const C qi = ipow(q, i);
        for (int a = 0; a < 3; ++a)
          for (int b = a + 1; b < 3; ++b) r *= g(C(T[uz(a)] * T[uz(b)] * qi));
        r /= g(C(A / x[uz(i)])) * g(C(A * x[uz(i)] / t));
        for (int k = 0; k < 3; ++k)
          r *= g(C(x[uz(i)] * T[uz(k)])) * g(C(t * T[uz(k)] / x[uz(i)])) / g(C(A / (qi * T[uz(k)])));
      }
      return r;
    }
    case Family::An_I: {
      const C A = detail::prod_all(P.t), B = detail::prod_all(P.f);
      C r = norm * g(A);
      for (const C& f : P.f) r *= g(C(B / f)) / g(C(A * B / f));
      for (const C& t : P.t) {
        r /= g(C(t * B));
        for (const C& f : P.f) r *= g(C(t * f));
      }
      return r;
    }
    case Family::An_II: return rhs_an_II(P, n, g, norm);
    case Family::An_III: return rhs_an_III(P, n, g, norm);
    case Family::GENERIC_VWP:
    case Family::MINUS_A: break;
  }
  fail(ErrorKind::UnsupportedFamily, std::string("no closed form for family ") + to_string(s.family));
}

template <class C>
C rhs_an_II(const ParamSet<C>& P, int n, const EllipticGamma<C>& g, const C& norm) {
  using detail::uz;
  const C tg = P.extra("t"), s = P.extra("s");
  const auto& tt = P.t;
  const C t1 = tt[0], t2 = tt[1], t3 = tt[2], t4 = tt[3], t5 = tt[4];
  const std::array<C, 3> T{t1, t2, t3};
  const C t45 = t4 * t5, P3 = t1 * t2 * t3, P5 = P3 * t45, ts = tg * s;
  auto pw = [](const C& b, int e) { return ipow(b, e); };
  C r = norm;
  if (n % 2 == 1) {
    const int m = (n + 1) / 2;
    r *= g(pw(tg, m)) * g(pw(s, m)) * g(C(pw(s, m - 1) * t45));
    for (int i = 0; i < 3; ++i)
      for (int j = i + 1; j < 3; ++j) r *= g(C(pw(tg, m - 1) * T[uz(i)] * T[uz(j)]));
    for (const C& tk : {t4, t5}) r /= g(C(pw(tg, 2 * m - 2) * pw(s, m - 1) * P3 * tk));
    for (int j = 1; j <= m; ++j) {
      for (const C& a : T)
        for (const C& b : {t4, t5}) r *= g(C(pw(ts, j - 1) * a * b));
      for (int i = 0; i < 3; ++i)
        for (int l = i + 1; l < 3; ++l) r /= g(C(pw(ts, m + j - 2) * T[uz(i)] * T[uz(l)] * t45));
    }
    for (int j = 1; j < m; ++j) {
      r *= g(pw(ts, j)) * g(C(pw(tg, j) * pw(s, j - 1) * t45));
      for (int i = 0; i < 3; ++i)
        for (int l = i + 1; l < 3; ++l) r *= g(C(pw(tg, j - 1) * pw(s, j) * T[uz(i)] * T[uz(l)]));
      for (const C& tk : {t4, t5}) r /= g(C(pw(tg, m + j - 2) * pw(s, m + j - 1) * P3 * tk));
    }
  } else {
    const int m = n / 2;
    for (const C& a : T) r *= g(C(pw(tg, m) * a));
    for (const C& b : {t4, t5}) r *= g(C(pw(s, m) * b));
    r *= g(C(pw(tg, m - 1) * P3));
    r /= g(C(pw(tg, 2 * m - 1) * pw(s, m - 1) * P5)) * g(C(pw(tg, 2 * m - 1) * pw(s, m) * P3));
    for (int j = 1; j <= m; ++j) {
      r *= g(pw(ts, j)) * g(C(pw(tg, j) * pw(s, j - 1) * t45));
      for (const C& a : T)
        for (const C& b : {t4, t5}) r *= g(C(pw(ts, j - 1) * a * b));
      for (const C& tk : {t4, t5}) r /= g(C(pw(tg, m + j - 2) * pw(s, m + j - 1) * P5 / tk));
      for (int i = 0; i < 3; ++i)
        for (int l = i + 1; l < 3; ++l)
          r *= g(C(pw(tg, j - 1) * pw(s, j) * T[uz(i)] * T[uz(l)])) /
               g(C(pw(ts, m + j - 1) * T[uz(i)] * T[uz(l)] * t45));
    }
  }
  return r;
}

template <class C>
C rhs_an_III(const ParamSet<C>& P, int n, const EllipticGamma<C>& g, const C& norm) {
  using detail::uz;
  const C tg = P.extra("t");
  const auto& tt = P.t;
  auto prod_range = [&](int a, int b) {
    C r(1);
    for (int k = a; k < b; ++k) r *= tt[uz(k)];
    return r;
  };
  C r = norm;
  if (n % 2 == 1) {
    const int l = (n + 1) / 2;
    const C P2 = prod_range(0, 2 * l), Pall = prod_range(0, 2 * l + 3);
    const C tl = ipow(tg, l);
    r *= g(tl) * g(P2) / g(C(tl * P2));
    for (int i = 0; i < 2 * l; ++i) {
      for (int j = 2 * l; j < 2 * l + 3; ++j) r *= g(C(tg * tt[uz(i)] * tt[uz(j)]));
      for (int j = i + 1; j < 2 * l; ++j) r *= g(C(tg * tt[uz(i)] * tt[uz(j)]));
      r /= g(C(ipow(tg, 2 * l + 1) / tt[uz(i)] * Pall));
    }
    const C tl1 = ipow(tg, l + 1);
    for (int i = 2 * l; i < 2 * l + 3; ++i) {
      for (int j = i + 1; j < 2 * l + 3; ++j) r *= g(C(tl1 * tt[uz(i)] * tt[uz(j)]));
      r /= g(C(tl1 / tt[uz(i)] * Pall));
    }
  } else {
    const int l = n / 2;
    const C P1 = prod_range(0, 2 * l + 1), Pall = prod_range(0, 2 * l + 4), Pt = prod_range(2 * l + 1, 2 * l + 4);
    const C tl2 = ipow(tg, l + 2);
    r *= g(P1) * g(C(tl2 * Pt)) / g(C(tl2 * Pall));
    for (int i = 0; i < 2 * l + 1; ++i) {
      for (int j = 2 * l + 1; j < 2 * l + 4; ++j) r *= g(C(tg * tt[uz(i)] * tt[uz(j)]));
      for (int j = i + 1; j < 2 * l + 1; ++j) r *= g(C(tg * tt[uz(i)] * tt[uz(j)]));
      r /= g(C(ipow(tg, 2 * l + 2) / tt[uz(i)] * Pall));
    }
    const C tl1 = ipow(tg, l + 1);
    for (int i = 2 * l + 1; i < 2 * l + 4; ++i) r *= g(C(tl1 * tt[uz(i)])) / g(C(tl1 * tt[uz(i)] * P1));
  }
  return r;
}

// Interior pole generators: the points c for which c q^j p^k (j,k >= 0) are
// poles that the unit circle must enclose. Cross-variable poles are omitted.
template <class C>
std::vector<C> interior_pole_generators(const IntegrandSpec<C>& s) {
  const auto& P = s.params;
  const C pq = s.moduli.q * s.moduli.p;
  const C A = derived_A(s);
  std::vector<C> out;
  switch (s.family) {
    case Family::E:
    case Family::Cn_I:
    case Family::Cn_II:
      out = P.t;
      if (s.family == Family::Cn_II) out.push_back(P.extra("t"));
      out.push_back(C(pq / A));
      break;
    case Family::Cn_III: {
      const C t = P.extra("t");
      for (const C& x : P.x) {
        out.push_back(x);
        out.push_back(C(t / x));
      }
      for (const C& v : P.t) out.push_back(v);
      out.push_back(C(pq / A));
      break;
    }
    case Family::An_I:
      out = P.t;
      for (const C& f : P.f) out.push_back(f);
      out.push_back(C(pq / A));
      break;
    case Family::An_II:
      out = P.t;
      out.push_back(C(pq / A));
      break;
    case Family::An_III: {
      const C tg = P.extra("t");
      for (int k = 0; k <= s.n; ++k) out.push_back(P.t[detail::uz(k)]);
      for (int k = s.n + 1; k < s.n + 4; ++k) out.push_back(C(tg * P.t[detail::uz(k)]));
      out.push_back(C(pq / A));
      break;
    }
    case Family::GENERIC_VWP: out = P.t; break;
    case Family::MINUS_A:
      out = P.t;
      out.push_back(C(-pq / A));
      break;
  }
  return out;
}

}  // namespace ehv
