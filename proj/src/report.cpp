#include "ehv/report.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <sstream>

namespace ehv {

std::string format_double(double x) {
  if (std::isnan(x)) return "\"nan\"";
  if (std::isinf(x)) return x > 0 ? "\"inf\"" : "\"-inf\"";
  if (x == 0.0) return "0.0";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  std::string s(buf);
  if (s.find_first_of(".eE") == std::string::npos) s += ".0";
  return s;
}

std::string fnv1a_hex(std::string_view data) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string digest_values(const std::vector<cplx>& vals, std::string_view tag) {
  std::string s(tag);
  for (const cplx& v : vals) {
    s += '|';
    s += format_double(v.real());
    s += ',';
    s += format_double(v.imag());
  }
  return fnv1a_hex(s);
}

std::string complex_json(const cplx& z) {
  return "{\"re\":" + format_double(z.real()) + ",\"im\":" + format_double(z.imag()) + "}";
}

namespace {

std::string quote(const std::string& s) {
  std::string o = "\"";
  for (char c : s) {
    switch (c) {
      case '"': o += "\\\""; break;
      case '\\': o += "\\\\"; break;
      case '\n': o += "\\n"; break;
      default: o += c;
    }
  }
  return o + "\"";
}

}  // namespace

std::string to_json(const VerificationReport& r, bool timing) {
  std::ostringstream os;
  os << "{\"name\":" << quote(r.name) << ",\"lhs\":" << complex_json(r.lhs)
     << ",\"rhs\":" << complex_json(r.rhs) << ",\"abs_err\":" << format_double(r.abs_err)
     << ",\"rel_err\":" << format_double(r.rel_err) << ",\"tol\":" << format_double(r.tol)
     << ",\"pass\":" << (r.pass ? "true" : "false") << ",\"nodes\":" << r.nodes
     << ",\"runtime_ms\":" << format_double(timing ? r.runtime_ms : 0.0)
     << ",\"params_digest\":" << quote(r.params_digest) << "}";
  return os.str();
}

}  // namespace ehv
