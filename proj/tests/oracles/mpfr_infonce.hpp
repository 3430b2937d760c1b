#pragma once

// Arbitrary-precision (256-bit MPFR) evaluation of the contrastive loss
// formula, used to pin the double-precision implementation.

#include <mpfr.h>

#include <vector>

namespace oracles {

inline double infonce_mpfr(double s_positive, const std::vector<double>& s_negatives,
                           double tau, mpfr_prec_t prec = 256) {
  mpfr_t sum, term, pos, t, result;
  mpfr_inits2(prec, sum, term, pos, t, result, (mpfr_ptr) nullptr);
  mpfr_set_d(t, tau, MPFR_RNDN);

  // pos = exp(s+ / tau)
  mpfr_set_d(pos, s_positive, MPFR_RNDN);
  mpfr_div(pos, pos, t, MPFR_RNDN);
  mpfr_exp(pos, pos, MPFR_RNDN);

  mpfr_set(sum, pos, MPFR_RNDN);
  for (double s : s_negatives) {
    mpfr_set_d(term, s, MPFR_RNDN);
    mpfr_div(term, term, t, MPFR_RNDN);
    mpfr_exp(term, term, MPFR_RNDN);
    mpfr_add(sum, sum, term, MPFR_RNDN);
  }

  // result = -log(pos / sum)
  mpfr_div(result, pos, sum, MPFR_RNDN);
  mpfr_log(result, result, MPFR_RNDN);
  mpfr_neg(result, result, MPFR_RNDN);

  double out = mpfr_get_d(result, MPFR_RNDN);
  mpfr_clears(sum, term, pos, t, result, (mpfr_ptr) nullptr);
  return out;
}

}  // namespace oracles
