#include "ehv/integrands.hpp"

namespace ehv {

const char* to_string(Family f) noexcept {
  switch (f) {
    case Family::E: return "E";
    case Family::Cn_I: return "Cn_I";
    case Family::Cn_II: return "Cn_II";
    case Family::Cn_III: return "Cn_III";
    case Family::An_I: return "An_I";
    case Family::An_II: return "An_II";
    case Family::An_III: return "An_III";
    case Family::GENERIC_VWP: return "GENERIC_VWP";
    case Family::MINUS_A: return "MINUS_A";
  }
  return "?";
}

Family family_from_string(const std::string& s) {
  for (Family f : {Family::E, Family::Cn_I, Family::Cn_II, Family::Cn_III, Family::An_I, Family::An_II,
                   Family::An_III, Family::GENERIC_VWP, Family::MINUS_A})
    if (s == to_string(f)) return f;
  fail(ErrorKind::InvalidSpec, "unknown integrand family '" + s + "'");
}

}  // namespace ehv
