#pragma once

// Queue parameterisation: arrival rate, service law, derived load quantities,
// service transform and moments, and the closed-form waiting-time results.

#include "mg1/exactnum.hpp"

#include <complex>
#include <optional>
#include <string>

namespace mg1 {

enum class ServiceKind { Uniform, Deterministic, Exponential };

std::string to_string(ServiceKind kind);

struct ServiceDistribution {
    ServiceKind kind = ServiceKind::Exponential;
    Rational a{0};   ///< lower end (Uniform) or the constant (Deterministic)
    Rational b{0};   ///< upper end (Uniform)
    Rational rate{0};  ///< Exponential rate

    /// Requires 0 <= a < b.
    static ServiceDistribution uniform(Rational a, Rational b);
    /// Requires a > 0.
    static ServiceDistribution deterministic(Rational a);
    /// Requires mu > 0.
    static ServiceDistribution exponential(Rational mu);

    std::string describe() const;
};

struct ServiceMoments {
    Rational mean;    ///< 1/mu
    Rational xi;      ///< E[S^2]
    Rational eta;     ///< E[S^3]
    Rational sigma2;  ///< xi - 1/mu^2
};

struct BoundaryValues {
    Rational f0plus;       ///< f(0+) = kappa
    Rational fprime0plus;  ///< f'(0+)
    /// Derivative jump at x = b when a = 0.
    std::optional<Rational> corner_jump;
    /// Density jump at x = a for deterministic service.
    std::optional<Rational> value_jump;
};

class QueueModel {
public:
    /// Throws Error("unstable") when rho >= 1 and Error("invalid_argument")
    /// when lambda <= 0.
    QueueModel(Rational lambda, ServiceDistribution service);

    const Rational& lambda() const { return lambda_; }
    const ServiceDistribution& service() const { return service_; }
    const Rational& mu() const { return mu_; }
    const Rational& rho() const { return rho_; }
    /// rho * (mu - lambda), the density just above zero.
    const Rational& kappa() const { return kappa_; }
    Rational atom_mass() const { return 1 - rho_; }

    std::string describe() const;

private:
    Rational lambda_;
    ServiceDistribution service_;
    Rational mu_;
    Rational rho_;
    Rational kappa_;
};

ServiceMoments service_moments(const QueueModel& model);

/// Theta(s): the service-time Laplace transform, exact at rational s.
ExpLinComb service_transform(const QueueModel& model, const Rational& s);
/// Numeric Theta at complex s; near s = 0 a Maclaurin branch is used.
std::complex<double> service_transform(const QueueModel& model, std::complex<double> s);
BigComplex service_transform(const QueueModel& model, const BigComplex& s);
/// Service moment generating function E[exp(gamma S)] = Theta(-gamma), for real gamma.
BigFloat service_mgf(const QueueModel& model, const BigFloat& gamma);
BigFloat service_mgf_derivative(const QueueModel& model, const BigFloat& gamma);

/// F(s) = (1 - rho) s / (s - lambda + lambda Theta(s)), exact at rational s.
/// Error("pole") when the denominator vanishes.
ExpRatio waiting_transform(const QueueModel& model, const Rational& s);
ExpRatio waiting_transform_alt(const QueueModel& model, const Rational& s);
std::complex<double> waiting_transform(const QueueModel& model, std::complex<double> s);
std::complex<double> waiting_transform_alt(const QueueModel& model, std::complex<double> s);
BigComplex waiting_transform(const QueueModel& model, const BigComplex& s);
BigComplex waiting_transform_alt(const QueueModel& model, const BigComplex& s);

struct WaitMoments {
    Rational mean;
    Rational variance;
};

/// Exact mean and variance of the waiting time in queue.
WaitMoments wq_moments(const QueueModel& model);

BoundaryValues boundary_values(const QueueModel& model);

/// Closed-form M/M/1 waiting-time law: atom 1 - rho at zero plus
/// kappa * exp(-(mu - lambda) x).
struct MM1Reference {
    Rational atom;
    Rational coefficient;  ///< kappa
    Rational decay;        ///< mu - lambda
    BigFloat median;       ///< 0 when the atom holds at least half the mass
    double mode = 0.0;     ///< always the boundary 0

    BigFloat density(const BigFloat& x) const;
    BigFloat cdf(const BigFloat& x) const;
};

MM1Reference mm1_reference(const QueueModel& model, unsigned precision_bits = kDefaultPrecisionBits);

}  // namespace mg1
