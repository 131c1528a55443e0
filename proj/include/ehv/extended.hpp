#pragma once

// Quad-precision scalar for the extended mode. Needs GNU extensions for
// __float128 and linking against libquadmath.

#include <boost/multiprecision/complex128.hpp>
#include <boost/multiprecision/float128.hpp>

#include "ehv/numeric.hpp"

namespace ehv {

using real_ext = boost::multiprecision::float128;
using cplx_ext = boost::multiprecision::complex128;

template <>
struct real_of<cplx_ext> {
  using type = real_ext;
};

}  // namespace ehv
