#pragma once

// Number in system: the generating function
//   F~(z) = (1 - rho)(1 - z) T(z) / (T(z) - z),  T(z) = Theta(lambda (1 - z)),
// its exact Maclaurin coefficients, and the closed-form moments.

#include "mg1/qmodel.hpp"

#include <complex>
#include <vector>

namespace mg1 {

/// Maclaurin coefficients of T(z) = Theta(lambda (1 - z)) up to z^L.
std::vector<ExpLinComb> service_pgf_coefficients(const QueueModel& model, std::size_t L);

/// Exact F~(z) at rational z; z = 1 gives 1. Error("pole") when T(z) = z.
ExpRatio pgf_eval(const QueueModel& model, const Rational& z);
/// Numeric F~(z); for |1 - z| < 1e-3 the removable singularity is cancelled
/// through the service-moment expansion of T.
std::complex<double> pgf_eval(const QueueModel& model, std::complex<double> z);
BigComplex pgf_eval(const QueueModel& model, const BigComplex& z, unsigned precision_bits);

struct QueueLengthDist {
    /// P{L = l} for l = 0..L. Each is a ratio of exponential sums; for
    /// deterministic and exponential service the denominator is 1.
    std::vector<ExpRatio> probabilities;
    Rational mean;
    Rational variance;
};

/// Exact power-series division of numerator by denominator, truncated at L.
QueueLengthDist pgf_series(const QueueModel& model, std::size_t L);

struct QlenMoments {
    Rational mean;
    Rational variance;
};

QlenMoments qlen_moments(const QueueModel& model);

/// Successive ratios p_{l+1} / p_l. `limit_estimate` is the Aitken
/// extrapolation of the last three ratios; it is a diagnostic only.
struct RatioDiagnostics {
    std::vector<double> ratios;
    double last_ratio = 0.0;
    double limit_estimate = 0.0;
};

RatioDiagnostics ratio_diagnostics(const std::vector<double>& probabilities);
RatioDiagnostics ratio_diagnostics(const QueueModel& model, std::size_t L);

/// p_l by the trapezoidal rule for the Cauchy integral on |z| = radius,
/// with `points` nodes; independent of the series division.
BigFloat pgf_coefficient_contour(const QueueModel& model, std::size_t l, const BigFloat& radius,
                                 std::size_t points, unsigned precision_bits);

}  // namespace mg1
