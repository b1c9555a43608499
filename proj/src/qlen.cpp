#include "mg1/qlen.hpp"

#include <boost/math/constants/constants.hpp>

#include <cmath>

namespace mg1 {

namespace {

// E[S^k] for k = 0..K
std::vector<Rational> raw_moments(const QueueModel& model, std::size_t K) {
    const auto& s = model.service();
    std::vector<Rational> m(K + 1);
    for (std::size_t k = 0; k <= K; ++k) {
        switch (s.kind) {
            case ServiceKind::Uniform: {
                Rational bk = 1, ak = 1;
                for (std::size_t i = 0; i <= k; ++i) {
                    bk *= s.b;
                    ak *= s.a;
                }
                m[k] = (bk - ak) / (Rational(static_cast<unsigned long>(k + 1)) * (s.b - s.a));
                break;
            }
            case ServiceKind::Deterministic: {
                Rational ak = 1;
                for (std::size_t i = 0; i < k; ++i) ak *= s.a;
                m[k] = ak;
                break;
            }
            case ServiceKind::Exponential: {
                Rational f = 1;
                for (std::size_t i = 1; i <= k; ++i) f *= Rational(static_cast<unsigned long>(i)) / s.rate;
                m[k] = f;
                break;
            }
        }
    }
    return m;
}

// (T(z) - z) / (1 - z) = 1 + sum_{k>=1} (-lambda)^k m_k w^{k-1} / k!, w = 1 - z
template <class C>
C reduced_denominator(const QueueModel& model, const C& w, std::size_t K) {
    const auto m = raw_moments(model, K);
    C sum = C(1);
    C wp = C(1);  // w^{k-1}
    Rational coef = 1;  // (-lambda)^k / k!
    for (std::size_t k = 1; k <= K; ++k) {
        coef *= -model.lambda();
        coef /= static_cast<unsigned long>(k);
        const Rational c = coef * m[k];
        if constexpr (std::is_same_v<C, std::complex<double>>)
            sum += c.get_d() * wp;
        else
            sum = sum + wp * to_bigfloat(c);
        wp = wp * w;
    }
    return sum;
}

}  // namespace

std::vector<ExpLinComb> service_pgf_coefficients(const QueueModel& model, std::size_t L) {
    const auto& s = model.service();
    const Rational& lambda = model.lambda();
    std::vector<ExpLinComb> theta;
    theta.reserve(L + 1);
    switch (s.kind) {
        case ServiceKind::Uniform: {
            // (e^{-a lambda} e^{a lambda z} - e^{-b lambda} e^{b lambda z}) / ((b - a) lambda (1 - z))
            const Rational scale = 1 / ((s.b - s.a) * lambda);
            const Rational al = s.a * lambda;
            const Rational bl = s.b * lambda;
            Rational ap = 1, bp = 1;  // (a lambda)^m / m!
            ExpLinComb acc;
            for (std::size_t m = 0; m <= L; ++m) {
                if (m > 0) {
                    ap *= al;
                    ap /= static_cast<unsigned long>(m);
                    bp *= bl;
                    bp /= static_cast<unsigned long>(m);
                }
                acc += ExpLinComb::exp_term(ap * scale, -al);
                acc -= ExpLinComb::exp_term(bp * scale, -bl);
                theta.push_back(acc);
            }
            break;
        }
        case ServiceKind::Deterministic: {
            const Rational al = s.a * lambda;
            Rational ap = 1;
            for (std::size_t m = 0; m <= L; ++m) {
                if (m > 0) {
                    ap *= al;
                    ap /= static_cast<unsigned long>(m);
                }
                theta.push_back(ExpLinComb::exp_term(ap, -al));
            }
            break;
        }
        case ServiceKind::Exponential: {
            // mu / (mu + lambda) * (lambda / (mu + lambda))^m
            const Rational r = lambda / (s.rate + lambda);
            Rational c = s.rate / (s.rate + lambda);
            for (std::size_t m = 0; m <= L; ++m) {
                theta.push_back(ExpLinComb(c));
                c *= r;
            }
            break;
        }
    }
    return theta;
}

ExpRatio pgf_eval(const QueueModel& model, const Rational& z) {
    if (z == 1) return ExpRatio(ExpLinComb(1));
    const ExpLinComb T = service_transform(model, Rational(model.lambda() * (1 - z)));
    const ExpLinComb den = T - ExpLinComb(z);
    if (den.is_zero()) throw Error("pole", "generating function has a pole", "z=" + to_string(z));
    return {T * Rational(model.atom_mass() * (1 - z)), den};
}

std::complex<double> pgf_eval(const QueueModel& model, std::complex<double> z) {
    const std::complex<double> w = 1.0 - z;
    const std::complex<double> T = service_transform(model, model.lambda().get_d() * w);
    const double atom = model.atom_mass().get_d();
    if (std::abs(w) < 1e-3) return atom * T / reduced_denominator(model, w, 24);
    const std::complex<double> den = T - z;
    if (den == 0.0) throw Error("pole", "generating function has a pole");
    return atom * w * T / den;
}

BigComplex pgf_eval(const QueueModel& model, const BigComplex& z, unsigned precision_bits) {
    PrecisionScope scope(precision_bits);
    const BigComplex one{BigFloat(1), BigFloat(0)};
    const BigComplex w = one - z;
    const BigComplex T = service_transform(model, w * to_bigfloat(model.lambda()));
    const BigFloat atom = to_bigfloat(model.atom_mass());
    if (abs(w) < BigFloat("1e-3")) {
        // terms shrink at least like (2e-3 lambda)^k
        const std::size_t K = precision_bits / 4 + 16;
        return (T * atom) / reduced_denominator(model, w, K);
    }
    const BigComplex den = T - z;
    if (den.re == 0 && den.im == 0) throw Error("pole", "generating function has a pole");
    return (w * T * atom) / den;
}

QueueLengthDist pgf_series(const QueueModel& model, std::size_t L) {
    const auto theta = service_pgf_coefficients(model, L);
    const Rational atom = model.atom_mass();
    std::vector<ExpLinComb> N(L + 1), D(L + 1);
    for (std::size_t n = 0; n <= L; ++n) {
        N[n] = theta[n] * atom;
        if (n > 0) N[n] -= theta[n - 1] * atom;
        D[n] = theta[n];
        if (n == 1) D[n] -= ExpLinComb(1);
    }
    QueueLengthDist out;
    if (D[0].is_monomial()) {
        std::vector<ExpLinComb> p(L + 1);
        for (std::size_t l = 0; l <= L; ++l) {
            ExpLinComb acc = N[l];
            for (std::size_t j = 1; j <= l; ++j) acc -= D[j] * p[l - j];
            p[l] = acc.divided_by_monomial(D[0]);
            out.probabilities.emplace_back(p[l]);
        }
    } else {
        // p_l = P_l / D_0^{l+1} with P_l = N_l D_0^l - sum_j D_j P_{l-j} D_0^{j-1}
        std::vector<ExpLinComb> pow{ExpLinComb(1)};
        for (std::size_t k = 1; k <= L + 1; ++k) pow.push_back(pow.back() * D[0]);
        std::vector<ExpLinComb> P(L + 1);
        for (std::size_t l = 0; l <= L; ++l) {
            ExpLinComb acc = N[l] * pow[l];
            for (std::size_t j = 1; j <= l; ++j) acc -= D[j] * P[l - j] * pow[j - 1];
            P[l] = acc;
            out.probabilities.emplace_back(P[l], pow[l + 1]);
        }
    }
    const QlenMoments m = qlen_moments(model);
    out.mean = m.mean;
    out.variance = m.variance;
    return out;
}

QlenMoments qlen_moments(const QueueModel& model) {
    const ServiceMoments sm = service_moments(model);
    const Rational& lambda = model.lambda();
    const Rational& rho = model.rho();
    const Rational one_minus = 1 - rho;
    const Rational core = rho * rho + lambda * lambda * sm.sigma2;
    QlenMoments out;
    out.mean = rho + core / (2 * one_minus);
    out.variance = rho * one_minus + (3 - 2 * rho) * core / (2 * one_minus) + core * core / (4 * one_minus) +
                   lambda * lambda * lambda * sm.eta / (3 * one_minus) +
                   lambda * lambda * lambda * lambda * rho * sm.xi * sm.xi / (4 * one_minus * one_minus);
    return out;
}

RatioDiagnostics ratio_diagnostics(const std::vector<double>& p) {
    if (p.size() < 4) throw Error("invalid_argument", "ratio diagnostics need at least four probabilities");
    RatioDiagnostics out;
    for (std::size_t l = 0; l + 1 < p.size(); ++l) out.ratios.push_back(p[l + 1] / p[l]);
    const std::size_t n = out.ratios.size();
    out.last_ratio = out.ratios.back();
    const double r0 = out.ratios[n - 3], r1 = out.ratios[n - 2], r2 = out.ratios[n - 1];
    const double denom = r2 - 2 * r1 + r0;
    out.limit_estimate = std::abs(denom) > 1e-300 ? r2 - (r2 - r1) * (r2 - r1) / denom : r2;
    return out;
}

RatioDiagnostics ratio_diagnostics(const QueueModel& model, std::size_t L) {
    if (L < 3) throw Error("invalid_argument", "ratio diagnostics need L >= 3");
    const auto dist = pgf_series(model, L);
    std::vector<double> p;
    for (const auto& e : dist.probabilities) p.push_back(e.eval_stable(17).convert_to<double>());
    return ratio_diagnostics(p);
}

BigFloat pgf_coefficient_contour(const QueueModel& model, std::size_t l, const BigFloat& radius, std::size_t points,
                                 unsigned precision_bits) {
    PrecisionScope scope(precision_bits);
    const BigFloat two_pi = 2 * boost::math::constants::pi<BigFloat>();
    BigFloat sum = 0;
    for (std::size_t k = 0; k < points; ++k) {
        const BigFloat angle = two_pi * k / points;
        const BigComplex z{radius * boost::multiprecision::cos(angle), radius * boost::multiprecision::sin(angle)};
        const BigComplex v = pgf_eval(model, z, precision_bits);
        // v * exp(-i l angle)
        const BigFloat t = -angle * l;
        sum += v.re * boost::multiprecision::cos(t) - v.im * boost::multiprecision::sin(t);
    }
    return sum / (points * boost::multiprecision::pow(radius, static_cast<int>(l)));
}

}  // namespace mg1
