#pragma once

// Verification reports: one named comparison of two complex values, with the
// error measures, the node count and a digest of the inputs. Serialised with
// a fixed field order and fixed float formatting so identical runs give
// byte-identical output.

#include <complex>
#include <string>
#include <string_view>
#include <vector>

#include "ehv/numeric.hpp"

namespace ehv {

struct VerificationReport {
  std::string name;
  cplx lhs{};
  cplx rhs{};
  double abs_err = 0.0;
  double rel_err = 0.0;
  double tol = 0.0;
  bool pass = false;
  long long nodes = 0;
  double runtime_ms = 0.0;
  std::string params_digest;
};

// Error measures are taken in the working precision before rounding to double.
// rel_err falls back to abs_err when rhs is exactly zero.
template <class C>
VerificationReport compare(std::string name, const C& lhs, const C& rhs, double tol) {
  using std::abs;
  using R = real_t<C>;
  VerificationReport r;
  r.name = std::move(name);
  r.lhs = to_cd(lhs);
  r.rhs = to_cd(rhs);
  const R ae = abs(C(lhs - rhs));
  const R ar = abs(rhs);
  r.abs_err = to_d(ae);
  r.rel_err = ar == 0 ? r.abs_err : to_d(ae / ar);
  r.tol = tol;
  r.pass = r.rel_err <= tol;
  return r;
}

// %.17g with ".0" appended to integral output and -0 printed as 0.
std::string format_double(double x);

std::string fnv1a_hex(std::string_view data);

// Digest of a list of complex values (formatted, then hashed).
std::string digest_values(const std::vector<cplx>& vals, std::string_view tag = {});

std::string to_json(const VerificationReport& r, bool timing = true);

std::string complex_json(const cplx& z);

}  // namespace ehv
