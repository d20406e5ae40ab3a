#pragma once

#include <gtest/gtest.h>

#include "jmod/parse.hpp"
#include "jmod/real.hpp"
#include "jmod/context.hpp"
#include "oracles.hpp"

namespace testing_util {

inline const jmod::PrecisionContext& ctx() {
  static const jmod::PrecisionContext c;
  return c;
}

inline jmod::Complex cz(const char* s, long bits = 400) { return jmod::parse_complex(s, bits); }

inline jmod::Real pow2(long e) { return jmod::Real::pow2(e, 400); }

}  // namespace testing_util
