#pragma once

// Shared fixtures and small independent builders for the unit tests.

#include "mg1/ddesolve.hpp"
#include "mg1/qmodel.hpp"

#include <cstdint>
#include <random>

namespace mg1::testing {

inline Rational R(const char* s) { return parse_rational(s); }

inline QueueModel case_one_model() { return {2, ServiceDistribution::uniform(R("1/12"), R("7/12"))}; }
inline QueueModel case_two_model() { return {2, ServiceDistribution::uniform(0, R("2/3"))}; }
inline QueueModel case_three_model() { return {2, ServiceDistribution::deterministic(R("1/3"))}; }
inline QueueModel mm1_model() { return {2, ServiceDistribution::exponential(3)}; }

/// Real term R * exp(q + slope x) * x^power.
inline ExpPoly real_term(const char* coef, unsigned power, const char* slope, const char* q) {
    return ExpPoly::term(ExactComplex(R(coef)), power, ExactComplex(R(slope)), 0, R(q));
}

/// K * exp(u (x - s)) [A cos(v (x - s)) + B sin(v (x - s))] x^power, with
/// v = sqrt(vsq); A and B are given as rational multiples of 1 and sqrt(vsq).
inline ExpPoly trig_term(const Rational& K, const Rational& u, const Rational& vsq, const Rational& s,
                         const QuadExt& A, const QuadExt& B, unsigned power) {
    const QuadExt v = QuadExt::sqrt(vsq);
    const QuadExt half(Rational(1, 2));
    // A cos + B sin = e^{ivy} (A - iB)/2 + e^{-ivy} (A + iB)/2
    const ExactComplex plus(half * A * QuadExt(K), -(half * B * QuadExt(K)));
    const ExactComplex minus(half * A * QuadExt(K), half * B * QuadExt(K));
    ExpPoly out = ExpPoly::term(plus, power, ExactComplex(QuadExt(u), v), s);
    out += ExpPoly::term(minus, power, ExactComplex(QuadExt(u), -v), s);
    return out;
}

inline QuadExt surd(long rational_part, long sqrt2_part) {
    return QuadExt(Rational(rational_part)) + QuadExt(Rational(sqrt2_part)) * QuadExt::sqrt(2);
}

/// Uniform rational in [lo, hi) with denominator 2^20 + 7 (off every grid).
inline Rational random_rational(std::mt19937_64& rng, const Rational& lo, const Rational& hi) {
    const unsigned long den = (1ul << 20) + 7;
    std::uniform_int_distribution<unsigned long> d(0, den - 1);
    return lo + (hi - lo) * Rational(static_cast<long>(d(rng)), den);
}

}  // namespace mg1::testing
