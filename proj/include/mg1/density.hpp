#pragma once

// Queries over a solved waiting-time density: pointwise values, the CDF,
// quantiles, the mode, moments by integration and the exponential tail.

#include "mg1/ddesolve.hpp"

#include <optional>
#include <string>
#include <vector>

namespace mg1 {

/// Smallest working precision (256 * 2^k bits) at which every segment
/// evaluates to `digits` significant digits on probe points; memoised.
unsigned working_bits(const WaitingTimeDensity& d, int digits = 30);

/// f(x) for 0 < x <= x_max. The value is computed at P and 2P bits and P
/// doubles until both agree to `digits` significant digits.
BigFloat eval_density(const WaitingTimeDensity& d, const BigFloat& x, int digits = 15,
                      unsigned* bits_used = nullptr);
/// Same at a rational point; the segment comes from the exact x, so grid
/// points use the right-hand segment.
BigFloat eval_density(const WaitingTimeDensity& d, const Rational& x, int digits = 15, unsigned* bits_used = nullptr);
/// Exact f(x) at a rational point (right-hand segment at grid points).
ExpConst density_exact(const WaitingTimeDensity& d, const Rational& x);
/// f(x-) using the segment to the left of x.
BigFloat eval_density_left(const WaitingTimeDensity& d, const BigFloat& x, unsigned precision_bits);
/// Unguarded evaluation at a fixed precision.
BigFloat eval_density_at(const WaitingTimeDensity& d, const BigFloat& x, unsigned precision_bits);
BigFloat eval_derivative_at(const WaitingTimeDensity& d, const BigFloat& x, unsigned precision_bits);

/// P{W <= x}: atom plus exact segment integrals.
ExpConst cdf_exact(const WaitingTimeDensity& d, const Rational& x);
BigFloat eval_cdf(const WaitingTimeDensity& d, const BigFloat& x, int digits = 15);
BigFloat eval_cdf_at(const WaitingTimeDensity& d, const BigFloat& x, unsigned precision_bits);
BigFloat survival(const WaitingTimeDensity& d, const BigFloat& x, int digits = 15);

/// Inverse CDF; 0 when p <= atom mass. Error("out_of_range") when
/// p >= cdf(x_max).
BigFloat quantile(const WaitingTimeDensity& d, const BigFloat& p, double tolerance = 1e-12);

enum class ModeKind { Interior, Corner, Boundary, LeftLimit };
std::string to_string(ModeKind kind);

struct ModeResult {
    BigFloat x;
    BigFloat value;
    ModeKind kind = ModeKind::Interior;
    std::size_t segment = 0;
};

/// Maximiser of the density on (0, x_max], excluding the atom.
ModeResult mode(const WaitingTimeDensity& d);

struct TailAsymptote {
    BigFloat decay_rate;
    std::optional<BigFloat> prefactor;
    std::optional<BigFloat> tau;      ///< deterministic service only
    std::optional<BigFloat> fitted_rate;
    /// max/min - 1 of survival(x) exp(decay x) over the fit window
    std::optional<BigFloat> relative_variation;
    std::string method;
    double fit_lo = 0.0;
    double fit_hi = 0.0;
};

/// Positive root gamma of lambda (M_S(gamma) - 1) = gamma.
BigFloat adjustment_coefficient(const QueueModel& model, unsigned precision_bits = kDefaultPrecisionBits);
/// Root tau > 1 of tau exp(-rho (tau - 1)) = 1.
BigFloat md1_tau(const Rational& rho, unsigned precision_bits = kDefaultPrecisionBits);
TailAsymptote tail_asymptote(const WaitingTimeDensity& d);

struct NumericMoments {
    BigFloat mass;  ///< atom + integral + tail
    BigFloat mean;
    BigFloat variance;
    BigFloat second;
    BigFloat tail_mass;  ///< estimated mass beyond x_max
};

/// Exact integrals of x^k f on [0, x_max] plus an exponential tail
/// correction C exp(-gamma x) matched to f(x_max).
NumericMoments numeric_moments(const WaitingTimeDensity& d);

/// Double-precision CDF on [0, inf): cubic Hermite on nodes aligned to the
/// segment grid, exponential tail beyond x_max.
class CdfTable {
public:
    explicit CdfTable(const WaitingTimeDensity& d, unsigned nodes_per_unit = 768);
    double operator()(double x) const;
    double atom() const { return atom_; }
    double x_max() const { return x_max_; }

private:
    std::vector<double> x_;
    std::vector<double> cdf_;
    std::vector<double> left_density_;   ///< density just right of node i, used on [x_i, x_{i+1}]
    std::vector<double> right_density_;  ///< density just left of node i+1
    double atom_ = 0.0;
    double x_max_ = 0.0;
    double tail_survival_ = 0.0;
    double tail_rate_ = 0.0;
};

}  // namespace mg1
