#include "mg1/qmodel.hpp"

#include <cmath>

namespace mg1 {

std::string to_string(ServiceKind kind) {
    switch (kind) {
        case ServiceKind::Uniform:
            return "uniform";
        case ServiceKind::Deterministic:
            return "deterministic";
        case ServiceKind::Exponential:
            return "exponential";
    }
    return "unknown";
}

ServiceDistribution ServiceDistribution::uniform(Rational a, Rational b) {
    if (a < 0 || !(a < b)) throw Error("invalid_argument", "uniform service needs 0 <= a < b");
    ServiceDistribution s;
    s.kind = ServiceKind::Uniform;
    s.a = std::move(a);
    s.b = std::move(b);
    return s;
}

ServiceDistribution ServiceDistribution::deterministic(Rational a) {
    if (a <= 0) throw Error("invalid_argument", "deterministic service needs a > 0");
    ServiceDistribution s;
    s.kind = ServiceKind::Deterministic;
    s.a = a;
    s.b = std::move(a);
    return s;
}

ServiceDistribution ServiceDistribution::exponential(Rational mu) {
    if (mu <= 0) throw Error("invalid_argument", "exponential service needs mu > 0");
    ServiceDistribution s;
    s.kind = ServiceKind::Exponential;
    s.rate = std::move(mu);
    return s;
}

std::string ServiceDistribution::describe() const {
    switch (kind) {
        case ServiceKind::Uniform:
            return "Uniform[" + a.get_str() + "," + b.get_str() + "]";
        case ServiceKind::Deterministic:
            return "Deterministic[" + a.get_str() + "]";
        case ServiceKind::Exponential:
            return "Exponential[" + rate.get_str() + "]";
    }
    return "?";
}

QueueModel::QueueModel(Rational lambda, ServiceDistribution service)
    : lambda_(std::move(lambda)), service_(std::move(service)) {
    if (lambda_ <= 0) throw Error("invalid_argument", "arrival rate must be positive");
    switch (service_.kind) {
        case ServiceKind::Uniform:
            mu_ = Rational(2) / (service_.a + service_.b);
            break;
        case ServiceKind::Deterministic:
            mu_ = Rational(1) / service_.a;
            break;
        case ServiceKind::Exponential:
            mu_ = service_.rate;
            break;
    }
    mu_.canonicalize();
    rho_ = lambda_ / mu_;
    rho_.canonicalize();
    if (rho_ >= 1)
        throw Error("unstable", "traffic intensity rho = " + rho_.get_str() + " is not below 1", describe());
    kappa_ = rho_ * (mu_ - lambda_);
    kappa_.canonicalize();
}

std::string QueueModel::describe() const {
    return "lambda=" + lambda_.get_str() + " service=" + service_.describe();
}

ServiceMoments service_moments(const QueueModel& model) {
    const auto& s = model.service();
    ServiceMoments m;
    m.mean = 1 / model.mu();
    switch (s.kind) {
        case ServiceKind::Uniform:
        case ServiceKind::Deterministic:
            m.xi = (s.a * s.a + s.a * s.b + s.b * s.b) / 3;
            m.eta = (s.a + s.b) * (s.a * s.a + s.b * s.b) / 4;
            break;
        case ServiceKind::Exponential:
            m.xi = 2 / (s.rate * s.rate);
            m.eta = 6 / (s.rate * s.rate * s.rate);
            break;
    }
    m.sigma2 = m.xi - m.mean * m.mean;
    m.mean.canonicalize();
    m.xi.canonicalize();
    m.eta.canonicalize();
    m.sigma2.canonicalize();
    return m;
}

ExpLinComb service_transform(const QueueModel& model, const Rational& s) {
    const auto& d = model.service();
    switch (d.kind) {
        case ServiceKind::Uniform: {
            if (s == 0) return ExpLinComb(1);
            ExpLinComb e = ExpLinComb::exp_term(1, -d.a * s) - ExpLinComb::exp_term(1, -d.b * s);
            return e * Rational(1 / ((d.b - d.a) * s));
        }
        case ServiceKind::Deterministic:
            return ExpLinComb::exp_term(1, -d.a * s);
        case ServiceKind::Exponential:
            if (s == -d.rate) throw Error("pole", "service transform pole at s = " + s.get_str());
            return ExpLinComb(Rational(d.rate / (d.rate + s)));
    }
    return {};
}

namespace {

// Generic kernels shared by the double and BigFloat complex paths.
template <class C, class R>
struct Kernels;

template <>
struct Kernels<std::complex<double>, double> {
    using C = std::complex<double>;
    static C from(const Rational& r) { return {r.get_d(), 0.0}; }
    static C cexp(const C& z) { return std::exp(z); }
    static double cabs(const C& z) { return std::abs(z); }
    static double eps() { return 1e-18; }
};

template <>
struct Kernels<BigComplex, BigFloat> {
    using C = BigComplex;
    static C from(const Rational& r) { return {to_bigfloat(r), BigFloat(0)}; }
    static C cexp(const C& z) { return exp(z); }
    static BigFloat cabs(const C& z) { return abs(z); }
    static BigFloat eps() {
        return boost::multiprecision::pow(BigFloat(2), -static_cast<int>(digits10_to_bits(BigFloat::default_precision()) + 8));
    }
};

template <class C, class R>
C theta_numeric(const QueueModel& model, const C& s) {
    using K = Kernels<C, R>;
    const auto& d = model.service();
    switch (d.kind) {
        case ServiceKind::Uniform: {
            if (K::cabs(s) == 0) return K::from(1);
            // Theta(s) = exp(-a s) * (1 - exp(-w)) / w with w = (b - a) s
            const C w = K::from(d.b - d.a) * s;
            const C shift = d.a == 0 ? K::from(1) : K::cexp(K::from(0) - K::from(d.a) * s);
            if (K::cabs(w) < R(1e-3)) {
                C sum = K::from(0);
                C power = K::from(1);
                Rational fact = 1;
                for (int n = 0; n < 200; ++n) {
                    fact *= (n + 1);
                    const C term = power * K::from(Rational(1 / fact));
                    sum = sum + term;
                    if (K::cabs(term) < K::eps() * K::cabs(sum)) break;
                    power = power * (K::from(0) - w);
                }
                return shift * sum;
            }
            return shift * (K::from(1) - K::cexp(K::from(0) - w)) / w;
        }
        case ServiceKind::Deterministic:
            return K::cexp(K::from(0) - K::from(d.a) * s);
        case ServiceKind::Exponential:
            return K::from(d.rate) / (K::from(d.rate) + s);
    }
    return K::from(0);
}

template <class C, class R>
C waiting_numeric(const QueueModel& model, const C& s) {
    using K = Kernels<C, R>;
    if (K::cabs(s) == 0) return K::from(1);
    const C theta = theta_numeric<C, R>(model, s);
    const C lambda = K::from(model.lambda());
    const C den = s - lambda + lambda * theta;
    if (K::cabs(den) == 0) throw Error("pole", "waiting-time transform has a pole");
    return K::from(model.atom_mass()) * s / den;
}

}  // namespace

std::complex<double> service_transform(const QueueModel& model, std::complex<double> s) {
    return theta_numeric<std::complex<double>, double>(model, s);
}

BigComplex service_transform(const QueueModel& model, const BigComplex& s) {
    return theta_numeric<BigComplex, BigFloat>(model, s);
}

BigFloat service_mgf(const QueueModel& model, const BigFloat& gamma) {
    const BigComplex v = service_transform(model, BigComplex{-gamma, BigFloat(0)});
    return v.re;
}

BigFloat service_mgf_derivative(const QueueModel& model, const BigFloat& gamma) {
    const auto& d = model.service();
    switch (d.kind) {
        case ServiceKind::Uniform: {
            if (gamma == 0) return to_bigfloat(Rational(1) / model.mu());
            const BigFloat a = to_bigfloat(d.a);
            const BigFloat b = to_bigfloat(d.b);
            const BigFloat w = b - a;
            const BigFloat eb = boost::multiprecision::exp(b * gamma);
            const BigFloat ea = boost::multiprecision::exp(a * gamma);
            return (b * eb - a * ea) / (w * gamma) - (eb - ea) / (w * gamma * gamma);
        }
        case ServiceKind::Deterministic: {
            const BigFloat a = to_bigfloat(d.a);
            return a * boost::multiprecision::exp(a * gamma);
        }
        case ServiceKind::Exponential: {
            const BigFloat mu = to_bigfloat(d.rate);
            return mu / ((mu - gamma) * (mu - gamma));
        }
    }
    return BigFloat(0);
}

ExpRatio waiting_transform(const QueueModel& model, const Rational& s) {
    if (s == 0) return ExpRatio(ExpLinComb(1));
    const ExpLinComb theta = service_transform(model, s);
    ExpLinComb den = ExpLinComb(Rational(s - model.lambda())) + theta * model.lambda();
    if (den.is_zero()) throw Error("pole", "waiting-time transform pole at s = " + s.get_str());
    return {ExpLinComb(Rational(model.atom_mass() * s)), std::move(den)};
}

ExpRatio waiting_transform_alt(const QueueModel& model, const Rational& s) {
    const ExpRatio f = waiting_transform(model, s);
    return {f.num() - f.den() * model.atom_mass(), f.den()};
}

std::complex<double> waiting_transform(const QueueModel& model, std::complex<double> s) {
    return waiting_numeric<std::complex<double>, double>(model, s);
}

std::complex<double> waiting_transform_alt(const QueueModel& model, std::complex<double> s) {
    return waiting_transform(model, s) - model.atom_mass().get_d();
}

BigComplex waiting_transform(const QueueModel& model, const BigComplex& s) {
    return waiting_numeric<BigComplex, BigFloat>(model, s);
}

BigComplex waiting_transform_alt(const QueueModel& model, const BigComplex& s) {
    BigComplex f = waiting_transform(model, s);
    f.re -= to_bigfloat(model.atom_mass());
    return f;
}

WaitMoments wq_moments(const QueueModel& model) {
    const Rational& lambda = model.lambda();
    WaitMoments w;
    if (model.service().kind == ServiceKind::Exponential) {
        const Rational& mu = model.mu();
        w.mean = lambda / (mu * (mu - lambda));
        w.variance = lambda * (2 * mu - lambda) / (mu * mu * (mu - lambda) * (mu - lambda));
    } else {
        const ServiceMoments m = service_moments(model);
        const Rational idle = model.atom_mass();
        w.mean = lambda * m.xi / (2 * idle);
        w.variance = lambda * m.eta / (3 * idle) + lambda * lambda * m.xi * m.xi / (4 * idle * idle);
    }
    w.mean.canonicalize();
    w.variance.canonicalize();
    return w;
}

BoundaryValues boundary_values(const QueueModel& model) {
    BoundaryValues v;
    v.f0plus = model.kappa();
    const auto& s = model.service();
    const Rational& lambda = model.lambda();
    switch (s.kind) {
        case ServiceKind::Uniform:
            if (s.a == 0) {
                v.fprime0plus = model.kappa() * (lambda - model.mu() / 2);
                v.corner_jump = Rational(lambda * model.atom_mass() / s.b);
            } else {
                v.fprime0plus = model.kappa() * lambda;
            }
            break;
        case ServiceKind::Deterministic:
            v.fprime0plus = model.kappa() * lambda;
            v.value_jump = Rational(-lambda * model.atom_mass());
            break;
        case ServiceKind::Exponential:
            v.fprime0plus = -model.kappa() * (model.mu() - lambda);
            break;
    }
    v.fprime0plus.canonicalize();
    if (v.corner_jump) v.corner_jump->canonicalize();
    if (v.value_jump) v.value_jump->canonicalize();
    return v;
}

BigFloat MM1Reference::density(const BigFloat& x) const {
    return to_bigfloat(coefficient) * boost::multiprecision::exp(-to_bigfloat(decay) * x);
}

BigFloat MM1Reference::cdf(const BigFloat& x) const {
    if (x < 0) return BigFloat(0);
    const BigFloat rho = 1 - to_bigfloat(atom);
    return 1 - rho * boost::multiprecision::exp(-to_bigfloat(decay) * x);
}

MM1Reference mm1_reference(const QueueModel& model, unsigned precision_bits) {
    if (model.service().kind != ServiceKind::Exponential)
        throw Error("invalid_argument", "M/M/1 reference needs exponential service");
    PrecisionScope scope(precision_bits);
    MM1Reference r;
    r.atom = model.atom_mass();
    r.coefficient = model.kappa();
    r.decay = model.mu() - model.lambda();
    const Rational ratio = 2 * model.lambda() / model.mu();
    if (ratio > 1) {
        r.median = boost::multiprecision::log(to_bigfloat(ratio)) / to_bigfloat(r.decay);
    } else {
        r.median = 0;
    }
    return r;
}

}  // namespace mg1
