#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>

#include "ehv/extended.hpp"
#include "ehv/integrands.hpp"
#include "ehv/quadrature.hpp"
#include "oracles.hpp"

using namespace ehv;
using oracle::cd;
using oracle::rel;

namespace {

IntegrandSpec<cd> e_spec() {
  IntegrandSpec<cd> s{Family::E, 1, {}, Moduli<cd>(cd(0.3, 0.05), cd(0.2, -0.04))};
  s.params.t = {cd(0.85, 0.1), cd(0.8, -0.3), cd(-0.7, 0.4), cd(0.2, 0.83), cd(-0.6, -0.6)};
  return s;
}

}  // namespace

TEST_CASE("circle rule on monomials") {
  QuadratureConfig cfg;
  cfg.nodes_per_dim = 16;
  cfg.max_doublings = 1;
  const auto one = circle_integral<cd>([](cd) { return cd(1); }, cfg);
  CHECK(one.value == cd(1));
  CHECK(one.converged);
  for (int k : {1, -1, 5, -7, 15}) {
    const auto r = circle_integral<cd>([k](cd z) { return ipow(z, k); }, cfg);
    CHECK(std::abs(r.value) < 1e-15);
  }
  // z^N aliases to 1 on N nodes: only the doubled grid resolves it
  cfg.max_doublings = 0;
  CHECK(std::abs(circle_integral<cd>([](cd z) { return ipow(z, 16); }, cfg).value - 1.0) < 1e-13);
}

TEST_CASE("torus rule on monomials") {
  QuadratureConfig cfg;
  cfg.nodes_per_dim = 8;
  cfg.max_doublings = 1;
  CHECK(std::abs(torus_integral<cd>([](const cd*) { return cd(1); }, 2, cfg).value - 1.0) < 1e-15);
  CHECK(std::abs(torus_integral<cd>([](const cd* z) { return z[0] / z[1]; }, 2, cfg).value) < 1e-15);
  CHECK(std::abs(torus_integral<cd>([](const cd* z) { return z[0] * z[1] * z[2]; }, 3, cfg).value) < 1e-15);
}

TEST_CASE("E integral reaches its closed form") {
  const auto s = e_spec();
  REQUIRE(validate_domain(s).pass);
  const Integrand<cd> f(s);
  QuadratureConfig cfg;
  cfg.rel_tol = 1e-13;
  const auto r = circle_integral<cd>([&](cd z) { return f(&z); }, cfg);
  CHECK(r.converged);
  CHECK(r.est_error <= cfg.rel_tol * std::abs(r.value) + 1e-14 * r.abs_mean);
  CHECK(rel(r.value, rhs_closed_form(s)) < 1e-12);
  // z <-> 1/z symmetry: the half circle gives the same mean
  CHECK(rel(half_circle_mean<cd>([&](cd z) { return f(&z); }, 512), r.value) < 1e-13);
}

TEST_CASE("geometric convergence under doubling") {
  const auto s = e_spec();
  const Integrand<cd> f(s);
  const cd exact = rhs_closed_form(s);
  double prev = 0;
  for (int N : {64, 128, 256}) {
    QuadratureConfig cfg;
    cfg.nodes_per_dim = N;
    cfg.max_doublings = 0;
    const double err = std::abs(circle_integral<cd>([&](cd z) { return f(&z); }, cfg).value - exact);
    if (N > 64 && prev > 1e-13 * std::abs(exact)) CHECK(err <= 0.5 * prev);
    prev = err;
  }
}

TEST_CASE("Cn_I at n = 2 reaches its closed form") {
  IntegrandSpec<cd> s{Family::Cn_I, 2, {}, Moduli<cd>(cd(0.3), cd(0.2, 0.05))};
  s.params.t = {cd(0.8, 0.1), cd(0.7, -0.3), cd(-0.6, 0.4), cd(0.2, 0.75), cd(-0.55, -0.5), cd(0.1, -0.8), cd(-0.8, 0.05)};
  REQUIRE(validate_domain(s).pass);
  const Integrand<cd> f(s);
  QuadratureConfig cfg;
  cfg.max_doublings = 2;
  cfg.rel_tol = 1e-11;
  const auto r = torus_integral<cd>([&](const cd* z) { return f(z); }, 2, cfg);
  CHECK(r.converged);
  CHECK(rel(r.value, rhs_closed_form(s)) < 1e-10);
}

TEST_CASE("results do not depend on the worker count") {
  IntegrandSpec<cd> s{Family::Cn_I, 2, {}, Moduli<cd>(cd(0.3), cd(0.2, 0.05))};
  s.params.t = {cd(0.8, 0.1), cd(0.7, -0.3), cd(-0.6, 0.4), cd(0.2, 0.75), cd(-0.55, -0.5), cd(0.1, -0.8), cd(-0.8, 0.05)};
  const Integrand<cd> f(s);
  QuadratureConfig cfg;
  cfg.nodes_per_dim = 48;
  cfg.max_doublings = 1;
  std::vector<cd> vals;
  for (int w : {1, 2, 8}) {
    cfg.workers = w;
    vals.push_back(torus_integral<cd>([&](const cd* z) { return f(z); }, 2, cfg).value);
  }
  CHECK(vals[0] == vals[1]);
  CHECK(vals[0] == vals[2]);
}

TEST_CASE("non-convergence is reported, budget overrun raises") {
  QuadratureConfig cfg;
  cfg.nodes_per_dim = 8;
  cfg.max_doublings = 1;
  // pole at 0.99 makes the 8 and 16 node rules disagree
  const auto r = circle_integral<cd>([](cd z) { return 1.0 / (1.0 - 0.99 / z); }, cfg);
  CHECK(!r.converged);
  CHECK(r.nodes_used == 16);
  CHECK(r.nodes_total == 24);

  setenv("EHV_MAX_NODES", "1000", 1);
  cfg.nodes_per_dim = 32;
  try {
    torus_integral<cd>([](const cd*) { return cd(1); }, 2, cfg);
    FAIL("expected ResourceLimit");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ResourceLimit);
  }
  unsetenv("EHV_MAX_NODES");

  cfg.nodes_per_dim = 4;
  CHECK_THROWS_AS(circle_integral<cd>([](cd) { return cd(1); }, cfg), Error);
  cfg.nodes_per_dim = 16;
  cfg.rel_tol = 0;
  CHECK_THROWS_AS(circle_integral<cd>([](cd) { return cd(1); }, cfg), Error);
}

TEST_CASE("extended precision circle rule") {
  QuadratureConfig cfg;
  cfg.nodes_per_dim = 16;
  cfg.max_doublings = 1;
  const auto r = circle_integral<cplx_ext>([](const cplx_ext& z) { return cplx_ext(z * z * z); }, cfg);
  CHECK(to_d(abs(r.value)) < 1e-32);
}
