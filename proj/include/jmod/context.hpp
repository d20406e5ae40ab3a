#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "jmod/error.hpp"
#include "jmod/real.hpp"

namespace jmod {

/// Working precision and the engineering knobs shared by every module.
///
/// `tol` defaults to 2^(-bits/2). Internal evaluation runs `guard_bits` above
/// `bits` so that quantities compared against `tol` carry spare accuracy.
struct PrecisionContext {
  long bits = 256;
  std::optional<Real> tol_override;
  std::int64_t height_bound = 1'000'000;
  int nmax = 8;
  long guard_bits = 32;

  static PrecisionContext with_bits(long bits) {
    PrecisionContext ctx;
    ctx.bits = bits;
    return ctx;
  }

  long work_bits() const noexcept { return bits + guard_bits; }

  Real tol() const {
    if (tol_override) return tol_override->at_precision(work_bits());
    return Real::pow2(-(bits / 2), work_bits());
  }

  void validate() const {
    if (bits < 64) fail(ErrorKind::invalid_argument, "precision must be at least 64 bits");
    if (height_bound < 1) fail(ErrorKind::invalid_argument, "height bound must be >= 1");
    if (nmax < 1) fail(ErrorKind::invalid_argument, "nmax must be >= 1");
    if (tol_override) {
      if (tol_override->sign() <= 0 || !(*tol_override < 1))
        fail(ErrorKind::invalid_argument, "tolerance must lie in (0, 1)");
    }
  }
};

}  // namespace jmod
