#pragma once

// Equispaced (trapezoid) rules on the unit circle and on the torus T^n with
// node doubling. The value approximates (2 pi i)^{-n} \oint f dz_1/z_1 ...,
// i.e. the mean of f over the grid. Rows of the outermost index may run on
// several threads; row sums are combined by a fixed pairwise tree, so the
// result does not depend on the worker count.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <exception>
#include <limits>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "ehv/error.hpp"
#include "ehv/numeric.hpp"

namespace ehv {

struct QuadratureConfig {
  int nodes_per_dim = 0;  // 0 selects the per-dimension default
  int max_doublings = 4;
  double rel_tol = 1e-12;
  double abs_scale = 0.0;  // convergence is judged against max(|value|, abs_scale)
  int workers = 1;
};

template <class C>
struct QuadratureResult {
  C value{};
  double est_error = 0.0;  // |change over the last doubling|
  double abs_mean = 0.0;  // mean of |f| at the final level
  long long nodes_used = 0;  // grid size at the final level
  long long nodes_total = 0;  // evaluations over all levels
  int dim = 1;
  bool converged = false;
};

enum class Constraint { NONE, AN_PRODUCT_ONE };

inline int default_nodes(int dim) {
  switch (dim) {
    case 1: return 128;
    case 2: return 96;
    default: return 64;
  }
}

// Total-evaluation budget from EHV_MAX_NODES (default 1e7).
inline long long max_nodes_budget() {
  if (const char* s = std::getenv("EHV_MAX_NODES")) {
    char* end = nullptr;
    const double v = std::strtod(s, &end);
    if (end != s && v > 0) return static_cast<long long>(v);
  }
  return 10'000'000LL;
}

namespace detail {

template <class C>
std::vector<C> circle_nodes(int N) {
  using std::cos;
  using std::sin;
  using R = real_t<C>;
  std::vector<C> z(static_cast<std::size_t>(N));
  const R two_pi = R(2) * pi_v<R>();
  for (int k = 0; k < N; ++k) {
    const R a = two_pi * R(k) / R(N);
    z[static_cast<std::size_t>(k)] = C(cos(a), sin(a));
  }
  return z;
}

inline long long ipow_ll(long long b, int e) {
  long long r = 1;
  for (int i = 0; i < e; ++i) r *= b;
  return r;
}

// Mean of f (and of |f|) over the N^n grid. Row i fixes the first coordinate.
template <class C, class F>
std::pair<C, double> grid_mean(const F& f, int n, int N, int workers) {
  using std::abs;
  using R = real_t<C>;
  const std::vector<C> z = circle_nodes<C>(N);
  const long long inner = ipow_ll(N, n - 1);
  std::vector<C> rows(static_cast<std::size_t>(N));
  std::vector<double> mags(static_cast<std::size_t>(N));
  auto do_row = [&](int i) {
    std::vector<C> vals(static_cast<std::size_t>(inner));
    std::vector<C> pt(static_cast<std::size_t>(n));
    pt[0] = z[static_cast<std::size_t>(i)];
    for (long long k = 0; k < inner; ++k) {
      long long rem = k;
      for (int d = n - 1; d >= 1; --d) {
        pt[static_cast<std::size_t>(d)] = z[static_cast<std::size_t>(rem % N)];
        rem /= N;
      }
      vals[static_cast<std::size_t>(k)] = f(pt.data());
    }
    rows[static_cast<std::size_t>(i)] = pairwise_sum(vals);
    double a = 0.0;
    for (const C& v : vals) a += to_d(abs(v));
    mags[static_cast<std::size_t>(i)] = a;
  };
  if (workers <= 1) {
    for (int i = 0; i < N; ++i) do_row(i);
  } else {
    std::atomic<int> next{0};
    std::exception_ptr err;
    std::atomic<bool> failed{false};
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (;;) {
          const int i = next.fetch_add(1);
          if (i >= N || failed.load()) return;
          try {
            do_row(i);
          } catch (...) {
            if (!failed.exchange(true)) err = std::current_exception();
            return;
          }
        }
      });
    for (auto& t : pool) t.join();
    if (err) std::rethrow_exception(err);
  }
  const double cnt = static_cast<double>(N) * static_cast<double>(inner);
  return {pairwise_sum(rows) / C(R(cnt)), pairwise_sum(mags) / cnt};
}

}  // namespace detail

// f takes a pointer to n coordinates. For AN_PRODUCT_ONE the integrand
// receives the n free variables and forms z_{n+1} itself.
template <class C, class F>
QuadratureResult<C> torus_integral(const F& f, int n, const QuadratureConfig& cfg,
                                   Constraint = Constraint::NONE) {
  using std::abs;
  if (n < 1) fail(ErrorKind::InvalidSpec, "torus dimension must be positive");
  int N = cfg.nodes_per_dim > 0 ? cfg.nodes_per_dim : default_nodes(n);
  if (N < 8) fail(ErrorKind::InvalidSpec, "nodes_per_dim must be at least 8");
  if (!(cfg.rel_tol > 0)) fail(ErrorKind::InvalidSpec, "rel_tol must be positive");
  if (cfg.max_doublings < 0) fail(ErrorKind::InvalidSpec, "max_doublings must be nonnegative");
  const long long budget = max_nodes_budget();
  QuadratureResult<C> r;
  r.dim = n;
  auto level = [&](int nodes) {
    const long long cnt = detail::ipow_ll(nodes, n);
    if (r.nodes_total + cnt > budget)
      fail(ErrorKind::ResourceLimit, "quadrature would exceed EHV_MAX_NODES=" + std::to_string(budget));
    r.nodes_total += cnt;
    r.nodes_used = cnt;
    auto [mean, mag] = detail::grid_mean<C>(f, n, nodes, cfg.workers);
    r.abs_mean = mag;
    return mean;
  };
  // Changes below this are rounding noise and cannot shrink further.
  const double noise = 64.0 * to_d(machine_eps<C>());
  C v = level(N);
  r.value = v;
  r.est_error = std::numeric_limits<double>::infinity();
  for (int d = 0; d < cfg.max_doublings; ++d) {
    N *= 2;
    const C w = level(N);
    r.est_error = to_d(abs(C(w - v)));
    r.value = w;
    v = w;
    if (r.est_error <= cfg.rel_tol * std::max(to_d(abs(w)), cfg.abs_scale) || r.est_error <= noise * r.abs_mean) {
      r.converged = true;
      break;
    }
  }
  return r;
}

template <class C, class F>
QuadratureResult<C> circle_integral(const F& f, const QuadratureConfig& cfg) {
  return torus_integral<C>([&](const C* z) { return f(z[0]); }, 1, cfg);
}

// For f(z) = f(1/z): uses the nodes 0..N/2 only,
// mean = (f(1) + f(-1) + 2 sum_{0<k<N/2} f(z_k)) / N.
template <class C, class F>
C half_circle_mean(const F& f, int N) {
  using R = real_t<C>;
  if (N < 8 || N % 2) fail(ErrorKind::InvalidSpec, "half-circle rule needs an even N >= 8");
  const std::vector<C> z = detail::circle_nodes<C>(N);
  std::vector<C> vals;
  vals.reserve(static_cast<std::size_t>(N / 2 + 1));
  vals.push_back(f(z[0]));
  for (int k = 1; k < N / 2; ++k) vals.push_back(C(R(2)) * f(z[static_cast<std::size_t>(k)]));
  vals.push_back(f(z[static_cast<std::size_t>(N / 2)]));
  return pairwise_sum(vals) / C(R(N));
}

}  // namespace ehv
