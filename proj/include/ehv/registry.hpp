#pragma once

// Named verification checks and evaluable functions behind the command-line
// tool. Every check runs in double or in quad precision; parameters come from
// a JSON file, or are drawn from a seeded generator and rejected until they
// satisfy the relevant domain and contour conditions.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ehv/numeric.hpp"
#include "ehv/report.hpp"

namespace ehv {

// {q, p, t, f, s, x, w, z, extras}; complex numbers as [re, im] or plain reals.
struct ParamFile {
  std::optional<cplx> q, p;
  std::vector<cplx> t, f, s, x, w, z;
  std::map<std::string, cplx> extras;

  // All values in a fixed order (for digests).
  std::vector<cplx> flatten() const;
};

ParamFile parse_params(const std::string& json_text);
ParamFile load_params(const std::string& path);
std::string params_to_json(const ParamFile& pf);

enum class Precision { Standard, Extended };

struct VerifyOptions {
  ParamFile params;
  std::optional<double> tol;
  std::uint64_t seed = 1;
  int nodes = 0;  // starting nodes per dimension; 0 = per-check default
  std::optional<int> n, m;
  int draws = 0;  // 0 = per-check default
  Precision precision = Precision::Standard;
  int workers = 1;
};

struct VerifyOutcome {
  std::vector<VerificationReport> reports;
  long long rejections = 0;  // sampler draws rejected by domain / contour checks
  ParamFile drawn;  // first parameter set actually used
};

const std::vector<std::string>& registry_names();
bool in_registry(const std::string& name);

VerifyOutcome run_verify(const std::string& name, const VerifyOptions& opts);

// Resolves the parameters the check would use without running it.
ParamFile resolve_params(const std::string& name, const VerifyOptions& opts);

const std::vector<std::string>& eval_names();

// Evaluates a named function; n is the rank or order where one is needed.
cplx run_eval(const std::string& fn, const ParamFile& pf, std::optional<int> n, Precision precision);

}  // namespace ehv
