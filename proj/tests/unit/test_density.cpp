#include "doctest.h"
#include "helpers.hpp"

#include "mg1/density.hpp"

#include <cmath>

using namespace mg1;
using namespace mg1::testing;
namespace mp = boost::multiprecision;

namespace {

const WaitingTimeDensity& case_one() {
    static const WaitingTimeDensity d = solve_case_one(case_one_model());
    return d;
}
const WaitingTimeDensity& case_two() {
    static const WaitingTimeDensity d = solve_case_two(case_two_model());
    return d;
}
const WaitingTimeDensity& case_three() {
    static const WaitingTimeDensity d = solve_case_three(case_three_model());
    return d;
}
const WaitingTimeDensity& mm1() {
    static const WaitingTimeDensity d = solve_mm1(mm1_model());
    return d;
}

std::vector<const WaitingTimeDensity*> all_cases() { return {&case_one(), &case_two(), &case_three(), &mm1()}; }

BigFloat big(const char* s) {
    PrecisionScope scope(kDefaultPrecisionBits);
    return BigFloat(s);
}

BigFloat big(const Rational& r) {
    PrecisionScope scope(kDefaultPrecisionBits);
    return to_bigfloat(r);
}

bool near(const BigFloat& a, const BigFloat& b, const char* tol) {
    PrecisionScope scope(kDefaultPrecisionBits);
    return abs(a - b) <= BigFloat(tol);
}

// coefficient of x^power exp(q + slope x) with rational slope
Rational coefficient(const ExpPoly& f, const char* slope, unsigned power, const char* q) {
    for (const auto& [key, c] : f.terms()) {
        if (key.power == power && key.slope == ExactComplex(R(slope)) && key.offset == R(q)) {
            REQUIRE(c.is_rational());
            return c.re().rational_part();
        }
    }
    FAIL("term not present");
    return 0;
}

}  // namespace

TEST_CASE("density values at the first grid points") {
    PrecisionScope scope(256);
    const BigFloat e16 = mp::exp(BigFloat(1) / 6);
    CHECK(near(eval_density(case_one(), big(R("1/12")), 40), BigFloat(2) / 3 * e16, "1e-38"));
    const BigFloat x16 = to_bigfloat(R("1/6"));
    CHECK(near(eval_density(case_one(), x16, 40), -e16 / 9 + BigFloat(2) / 3 * mp::exp(BigFloat(1) / 3), "1e-38"));

    ExpConst want;
    want.add(ExactComplex(R("2/3")), ExactComplex(R("1/6")));
    CHECK(density_exact(case_one(), R("1/12")) == want);
}

TEST_CASE("density outside the solved range is an error") {
    CHECK_THROWS_AS(eval_density(case_one(), big("4.01")), Error);
    CHECK_THROWS_AS(eval_cdf(case_one(), big("-0.1")), Error);
    try {
        eval_density(case_one(), big("5"));
    } catch (const Error& e) {
        CHECK(std::string(e.code()) == "out_of_range");
    }
}

TEST_CASE("cdf at the ends of the range") {
    for (const auto* d : all_cases()) {
        CAPTURE(to_string(d->tag()));
        CHECK(near(eval_cdf(*d, big("0")), big(R("1/3")), "1e-30"));
        const BigFloat top = eval_cdf(*d, big("4"));
        CHECK(top <= 1);
        CHECK(top >= big("0.98"));
        // survival at x_max agrees with the tail correction used for the moments
        const BigFloat tail = numeric_moments(*d).tail_mass;
        CHECK(abs((1 - top) / tail - 1) < big("1e-3"));
    }
    PrecisionScope scope(256);
    CHECK(near(eval_cdf(mm1(), big("4"), 30), 1 - BigFloat(2) / 3 * mp::exp(BigFloat(-4)), "1e-28"));
}

TEST_CASE("medians") {
    CHECK(near(quantile(case_one(), big("0.5")), big("0.21673428"), "1e-8"));
    PrecisionScope scope(256);
    CHECK(near(quantile(mm1(), big("0.5")), mp::log(BigFloat(4) / 3), "1e-10"));
    CHECK(quantile(case_two(), big("0.2")) == 0);
    CHECK(quantile(case_three(), big("0.2")) == 0);
    CHECK_THROWS_AS(quantile(case_one(), big("0.9999999999")), Error);
}

TEST_CASE("mode of case one equals the closed form") {
    const ModeResult m = mode(case_one());
    PrecisionScope scope(256);
    const BigFloat e = mp::exp(BigFloat(1) / 6);
    const BigFloat closed = (1 + 3 * e - mp::sqrt(3 * e * (7 - 3 * e))) / 6;
    CHECK(m.kind == ModeKind::Interior);
    CHECK(near(m.x, big("0.17405980"), "1e-8"));
    CHECK(near(m.x, closed, "1e-20"));
}

TEST_CASE("mode kinds for the other cases") {
    const ModeResult m3 = mode(case_three());
    CHECK(m3.kind == ModeKind::LeftLimit);
    CHECK(near(m3.x, big(R("1/3")), "1e-20"));
    // no later segment exceeds f(a-)
    PrecisionScope scope(256);
    const BigFloat peak = eval_density_left(case_three(), big(R("1/3")), 256);
    for (int i = 1; i < 400; ++i) {
        const BigFloat x = BigFloat(i) / 100 + BigFloat(1) / 1000;
        if (x > 4) break;
        CHECK(eval_density_at(case_three(), x, 256) <= peak);
    }
    const ModeResult mm = mode(mm1());
    CHECK(mm.kind == ModeKind::Boundary);
    CHECK(mm.x == 0);
    const ModeResult m2 = mode(case_two());
    CHECK(m2.x > 0);
    CHECK(m2.x < to_bigfloat(R("2/3")));
}

TEST_CASE("moments by density integration") {
    const NumericMoments one = numeric_moments(case_one());
    CHECK(near(one.mean, big(R("19/48")), "1e-6"));
    CHECK(near(one.variance, big(R("1883/6912")), "1e-6"));
    for (const auto* d : all_cases()) {
        CAPTURE(to_string(d->tag()));
        const NumericMoments m = numeric_moments(*d);
        const WaitMoments w = wq_moments(d->model());
        CHECK(near(m.mass, big("1"), "1e-6"));
        CHECK(near(m.mean, big(w.mean), "1e-6"));
        CHECK(near(m.variance, big(w.variance), "1e-6"));
    }
    const NumericMoments m = numeric_moments(mm1());
    CHECK(near(m.mean, big(R("2/3")), "1e-6"));
    CHECK(near(m.variance, big(R("8/9")), "1e-6"));
}

TEST_CASE("deterministic tail constant") {
    PrecisionScope scope(256);
    const BigFloat tau = md1_tau(R("2/3"));
    CHECK(tau > BigFloat("2.1"));
    CHECK(tau < BigFloat("2.2"));
    CHECK(abs(tau * mp::exp(-(BigFloat(2) / 3) * (tau - 1)) - 1) < BigFloat("1e-12"));

    const TailAsymptote t = tail_asymptote(case_three());
    REQUIRE(t.tau.has_value());
    CHECK(near(t.decay_rate, 2 * (tau - 1), "1e-20"));
    const BigFloat rho = BigFloat(2) / 3;
    const BigFloat ratio = survival(case_three(), big("4")) * mp::exp(2 * (tau - 1) * 4) * (tau * rho - 1) / (1 - rho);
    CHECK(abs(ratio - 1) < BigFloat("0.05"));
}

TEST_CASE("heavy traffic drives tau to one") {
    PrecisionScope scope(256);
    const BigFloat t = md1_tau(R("999/1000"));
    CHECK(t > 1);
    CHECK(t < BigFloat("1.01"));
}

TEST_CASE("uniform tails decay at the adjustment coefficient") {
    for (const auto* d : {&case_one(), &case_two()}) {
        CAPTURE(to_string(d->tag()));
        const TailAsymptote t = tail_asymptote(*d);
        REQUIRE(t.fitted_rate.has_value());
        const BigFloat gamma = adjustment_coefficient(d->model());
        // three significant figures
        CHECK(abs(*t.fitted_rate / gamma - 1) < BigFloat("5e-4"));
        CHECK(near(t.decay_rate, gamma, "1e-20"));
        PrecisionScope scope(256);
        const BigFloat lhs = d->model().lambda().get_d() * (service_mgf(d->model(), gamma) - 1);
        CHECK(abs(lhs - gamma) < BigFloat("1e-30"));
    }
    const TailAsymptote t1 = tail_asymptote(case_one());
    REQUIRE(t1.relative_variation.has_value());
    CHECK(t1.fit_lo == doctest::Approx(2.5));
    CHECK(t1.fit_hi == doctest::Approx(4.0));
    CHECK(*t1.relative_variation < BigFloat("0.02"));
}

TEST_CASE("cancellation in f_24 at x = 2") {
    const auto& d = case_one();
    const ExpPoly& f24 = d.segment(24).f;
    CHECK(f24.size() == 348u);
    Integer L = 1;
    for (const auto& [key, c] : f24.terms()) {
        REQUIRE(c.is_rational());
        L = lcm(L, Integer(c.re().rational_part().get_den()));
    }
    // numerators over the common denominator L exp(4)
    const Rational n0 = coefficient(f24, "0", 0, "0") * Rational(L);
    const Rational n1 = coefficient(f24, "2", 0, "-4") * Rational(L);
    CHECK(n0 == R("-31343712612206064875238458599056650210472221756256360"));
    CHECK(n1 == R("1235688973308606091819588575256480179309880006812893184"));
    PrecisionScope scope(256);
    const BigFloat e4 = mp::exp(BigFloat(4));
    const BigFloat v0 = to_bigfloat(n0) * e4;
    const BigFloat v1 = to_bigfloat(n1) * e4;  // exp(2x) at x = 2
    CHECK(abs(v0 / BigFloat("-1.7113e54") - 1) < BigFloat("5e-5"));
    CHECK(abs(v1 / BigFloat("6.7466e55") - 1) < BigFloat("5e-5"));

    const unsigned P = working_bits(d, 15);
    const BigFloat at_p = eval_density_at(d, BigFloat(2), P);
    const BigFloat at_2p = eval_density_at(d, BigFloat(2), 2 * P);
    CHECK(at_p > 0);
    CHECK(abs(at_p - at_2p) / abs(at_2p) < BigFloat("1e-15"));
    CHECK(near(eval_density(d, big("2")), at_2p, "1e-16"));
}

TEST_CASE("property: quantile inverts the cdf") {
    std::mt19937_64 rng(7);
    for (const auto* d : all_cases()) {
        CAPTURE(to_string(d->tag()));
        for (int i = 0; i < 25; ++i) {
            const Rational xr = random_rational(rng, R("1/100"), 3);
            const BigFloat x = big(xr);
            const BigFloat p = eval_cdf(*d, x, 30);
            CHECK(near(quantile(*d, p), x, "1e-11"));
        }
    }
}

TEST_CASE("property: cdf monotone, density nonnegative, cdf' = density") {
    std::mt19937_64 rng(99);
    PrecisionScope scope(256);
    for (const auto* d : all_cases()) {
        CAPTURE(to_string(d->tag()));
        const unsigned bits = working_bits(*d, 30);
        BigFloat prev = eval_cdf_at(*d, BigFloat(0), bits);
        for (int i = 1; i <= 400; ++i) {
            const BigFloat x = BigFloat(i) / 100;
            const BigFloat c = eval_cdf_at(*d, x, bits);
            CHECK(c >= prev);
            CHECK(eval_density_at(*d, x, bits) >= 0);
            prev = c;
        }
        const BigFloat h("1e-20");
        for (int i = 0; i < 30; ++i) {
            const BigFloat x = to_bigfloat(random_rational(rng, R("1/100"), R("39/10")));
            const BigFloat fd = (eval_cdf_at(*d, x + h, bits) - eval_cdf_at(*d, x - h, bits)) / (2 * h);
            CHECK(abs(fd - eval_density_at(*d, x, bits)) < BigFloat("1e-18"));
        }
    }
}

TEST_CASE("double-precision cdf table") {
    for (const auto* d : all_cases()) {
        CAPTURE(to_string(d->tag()));
        const CdfTable t(*d);
        CHECK(t.atom() == doctest::Approx(1.0 / 3.0));
        CHECK(t(0.0) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
        CHECK(t(-1.0) == 0.0);
        for (int i = 1; i < 80; ++i) {
            const double x = i * 0.05 + 0.0007;
            CHECK(std::abs(t(x) - eval_cdf(*d, BigFloat(x)).convert_to<double>()) < 1e-9);
        }
        CHECK(t(10.0) > t(4.0));
        CHECK(t(10.0) <= 1.0);
    }
}

TEST_CASE("rational points take the right-hand segment") {
    // f(1/3-) = (2/3) e^{2/3}, f(1/3+) = f(1/3-) - 2/3
    PrecisionScope scope(256);
    const BigFloat left = BigFloat(2) / 3 * mp::exp(BigFloat(2) / 3);
    CHECK(near(eval_density_left(case_three(), big(R("1/3")), 256), left, "1e-30"));
    CHECK(near(eval_density(case_three(), R("1/3"), 30), left - BigFloat(2) / 3, "1e-29"));
    CHECK(near(eval_density(case_one(), R("1/6"), 30), density_exact(case_one(), R("1/6")).eval(256), "1e-29"));
}
