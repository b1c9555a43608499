#include "doctest.h"
#include "helpers.hpp"

#include "mg1/density.hpp"

using namespace mg1;
using namespace mg1::testing;

TEST_CASE("case one fragments f_1 and f_2 as printed") {
    const auto d = solve_case_one(case_one_model(), {.x_max = R("1/4")});
    ExpPoly f1 = real_term("2/3", 0, "2", "0");
    f1 += real_term("1/9", 0, "2", "-1/6");
    f1 += real_term("-4/3", 1, "2", "-1/6");
    CHECK(d.segment(1).f == f1);

    ExpPoly f2 = ExpPoly::constant(ExactComplex(R("-2/3")));
    f2 += real_term("2/3", 0, "2", "0");
    f2 += real_term("25/27", 0, "2", "-1/3");
    f2 += real_term("1/9", 0, "2", "-1/6");
    f2 += real_term("-16/9", 1, "2", "-1/3");
    f2 += real_term("-4/3", 1, "2", "-1/6");
    f2 += real_term("4/3", 2, "2", "-1/3");
    CHECK(d.segment(2).f == f2);
}

TEST_CASE("case one boundary values") {
    const auto d = solve_case_one(case_one_model(), {.x_max = R("1/4")});
    ExpConst expected;
    expected.add(ExactComplex(R("2/3")), ExactComplex(R("1/6")));
    CHECK(d.segment(1).f.value_at(R("1/12")) == expected);
    CHECK(d.segment(0).f.value_at(R("1/12")) == expected);
    // f_1(1/6) = -(1/9) e^{1/6} + (2/3) e^{1/3}
    ExpConst f16;
    f16.add(ExactComplex(R("-1/9")), ExactComplex(R("1/6")));
    f16.add(ExactComplex(R("2/3")), ExactComplex(R("1/3")));
    CHECK(d.segment(1).f.value_at(R("1/6")) == f16);
}

TEST_CASE("case one term count n(n+5)/2") {
    const auto d = solve_case_one(case_one_model(), {.x_max = R("35/12")});
    for (std::size_t n = 1; n <= 35; ++n) {
        CAPTURE(n);
        CHECK(d.segment(n).f.size() == n * (n + 5) / 2);
    }
}

TEST_CASE("case two fragments g_0, g_1, g_2 as printed") {
    const auto d = solve_case_two(case_two_model(), {.x_max = R("4/3")});
    const Rational s0 = 0;
    const Rational s1 = R("2/3");
    const Rational s2 = R("4/3");
    const ExpPoly g0 = trig_term(R("1/6"), 1, 2, s0, surd(4, 0), surd(0, -1), 0);
    CHECK(d.segment(0).f == g0);

    ExpPoly g1 = g0;
    g1 += trig_term(R("-1/24"), 1, 2, s1, surd(4, 0), surd(0, -1), 0);
    g1 += trig_term(R("1/4"), 1, 2, s1, surd(1, 0), surd(0, 2), 1);
    CHECK(d.segment(1).f == g1);

    ExpPoly g1p = trig_term(R("1/6"), 1, 2, s0, surd(2, 0), surd(0, -5), 0);
    g1p += trig_term(R("1/24"), 1, 2, s1, surd(4, 0), surd(0, 17), 0);
    g1p += trig_term(R("1/4"), 1, 2, s1, surd(5, 0), surd(0, 1), 1);
    CHECK(d.segment(1).f.derivative() == g1p);

    ExpPoly g2 = g1;
    g2 += trig_term(R("-1/192"), 1, 2, s2, surd(8, 0), surd(0, -29), 0);
    g2 += trig_term(R("1/32"), 1, 2, s2, surd(17, 0), surd(0, -2), 1);
    g2 += trig_term(R("-3/32"), 1, 2, s2, surd(4, 0), surd(0, -1), 2);
    CHECK(d.segment(2).f == g2);
    CHECK(d.segment(2).f.is_real_valued());
}

TEST_CASE("case three matches Erlang symbolically") {
    const auto model = case_three_model();
    const auto d = solve_case_three(model, {.x_max = R("10/3")});
    for (std::size_t n = 0; n <= 10; ++n) {
        CAPTURE(n);
        CHECK(d.segment(n).f == erlang_md1(model, n));
    }
}

TEST_CASE("atom equals the integral of the extended first segment") {
    const auto model = case_one_model();
    const ExpPoly f0 = ExpPoly::term(ExactComplex(model.kappa()), 0, ExactComplex(model.lambda()));
    ExpConst atom;
    atom.add(ExactComplex(model.atom_mass()), ExactComplex(0));
    CHECK(integral_from_minus_infinity(f0, 0) == atom);
    CHECK_THROWS_AS(integral_from_minus_infinity(real_term("1", 0, "-1", "0"), 0), Error);
}

namespace {

// cdf including the atom, 0 below zero
BigFloat cdf_or_zero(const WaitingTimeDensity& d, const BigFloat& x, unsigned bits) {
    if (x < 0) return BigFloat(0);
    return eval_cdf_at(d, x, bits);
}

// f'(x) - lambda f(x) + lambda P{x - b < W <= x - a} / (b - a); the atom
// enters through the cdf when x - b < 0 <= x - a.
BigFloat uniform_residual(const WaitingTimeDensity& d, const BigFloat& x, unsigned bits) {
    PrecisionScope scope(bits);
    const auto& svc = d.model().service();
    const BigFloat lambda = to_bigfloat(d.model().lambda());
    const BigFloat a = to_bigfloat(svc.a), b = to_bigfloat(svc.b);
    const BigFloat mass = cdf_or_zero(d, x - a, bits) - cdf_or_zero(d, x - b, bits);
    return eval_derivative_at(d, x, bits) - lambda * eval_density_at(d, x, bits) + lambda * mass / (b - a);
}

// f'(x) - lambda f(x) + lambda f(x - a), x off the jump at a
BigFloat deterministic_residual(const WaitingTimeDensity& d, const BigFloat& x, unsigned bits) {
    PrecisionScope scope(bits);
    const BigFloat lambda = to_bigfloat(d.model().lambda());
    const BigFloat a = to_bigfloat(d.model().service().a);
    const BigFloat lagged = x - a > 0 ? eval_density_at(d, x - a, bits) : BigFloat(0);
    return eval_derivative_at(d, x, bits) - lambda * eval_density_at(d, x, bits) + lambda * lagged;
}

}  // namespace

TEST_CASE("corner and jump values at the first grid point") {
    const auto two = solve_case_two(case_two_model(), {.x_max = R("8/3")});
    const Rational h2 = R("2/3");
    const ExpConst corner = two.segment(1).f.derivative().value_at(h2) - two.segment(0).f.derivative().value_at(h2);
    CHECK(corner.to_lincomb() == ExpLinComb(1));
    for (std::size_t n = 1; n < two.segments().size(); ++n) {
        CAPTURE(n);
        const Rational g = h2 * static_cast<long>(n);
        CHECK((two.segment(n).f.value_at(g) - two.segment(n - 1).f.value_at(g)).is_zero());
        if (n > 1) {
            CHECK((two.segment(n).f.derivative().value_at(g) - two.segment(n - 1).f.derivative().value_at(g))
                      .is_zero());
        }
    }

    const auto three = solve_case_three(case_three_model(), {.x_max = R("10/3")});
    const Rational h3 = R("1/3");
    const ExpConst jump = three.segment(1).f.value_at(h3) - three.segment(0).f.value_at(h3);
    CHECK(jump.to_lincomb() == ExpLinComb(R("-2/3")));
    for (std::size_t n = 2; n < three.segments().size(); ++n) {
        CAPTURE(n);
        const Rational g = h3 * static_cast<long>(n);
        CHECK((three.segment(n).f.value_at(g) - three.segment(n - 1).f.value_at(g)).is_zero());
    }

    const auto one = solve_case_one(case_one_model(), {.x_max = R("2")});
    for (std::size_t n = 1; n < one.segments().size(); ++n) {
        CAPTURE(n);
        const Rational g = R("1/12") * static_cast<long>(n);
        CHECK((one.segment(n).f.value_at(g) - one.segment(n - 1).f.value_at(g)).is_zero());
    }
}

TEST_CASE("case three equals Erlang numerically at random points") {
    const auto model = case_three_model();
    const auto d = solve_case_three(model, {.x_max = R("11/3")});
    std::mt19937_64 rng(11);
    const unsigned bits = 256;
    PrecisionScope scope(bits);
    const BigFloat tol("1e-30");
    for (std::size_t n = 0; n <= 10; ++n) {
        const NumericExpPoly erlang(erlang_md1(model, n), bits);
        const auto& seg = d.segment(n);
        for (int i = 0; i < 100; ++i) {
            const BigFloat x = to_bigfloat(random_rational(rng, seg.lo, seg.hi));
            const BigFloat diff = abs(eval_density_at(d, x, bits) - erlang.eval(x));
            CAPTURE(n);
            CHECK(diff < tol);
        }
    }
}

TEST_CASE("integro-differential residual over the first twelve segments") {
    const unsigned bits = 256;
    PrecisionScope scope(bits);
    const BigFloat tol("1e-30");
    std::mt19937_64 rng(2024);
    const auto one = solve_case_one(case_one_model(), {.x_max = R("13/12")});
    const auto two = solve_case_two(case_two_model(), {.x_max = R("26/3")});
    const auto three = solve_case_three(case_three_model(), {.x_max = R("13/3")});
    for (const auto* d : {&one, &two, &three}) {
        const bool deterministic = d->model().service().kind == ServiceKind::Deterministic;
        BigFloat worst = 0;
        for (std::size_t n = 0; n < 12; ++n) {
            const auto& seg = d->segment(n);
            for (int i = 0; i < 200; ++i) {
                const BigFloat x = to_bigfloat(random_rational(rng, seg.lo, seg.hi));
                if (x == 0) continue;
                const BigFloat r = deterministic ? deterministic_residual(*d, x, bits) : uniform_residual(*d, x, bits);
                worst = std::max(worst, BigFloat(abs(r)));
            }
        }
        CAPTURE(to_string(d->tag()));
        CAPTURE(format_float(worst, 6));
        CHECK(worst < tol);
    }
}

namespace {

std::string error_code(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    return "";
}

}  // namespace

TEST_CASE("solver argument checks") {
    // gcd(1/1000003, 1/2) has denominator above the default cap
    const QueueModel fine(1, ServiceDistribution::uniform(R("1/1000003"), R("1/2")));
    CHECK(error_code([&] { solve(fine); }) == "grid_too_fine");
    CHECK(error_code([&] { solve(case_one_model(), {.x_max = 0}); }) == "invalid_argument");
    CHECK(error_code([&] { solve(case_one_model(), {.x_max = 100, .max_segments = 50}); }) == "too_many_segments");
    CHECK(error_code([&] { solve_case_two(case_one_model()); }) == "invalid_argument");
    CHECK(error_code([&] { solve_case_three(mm1_model()); }) == "invalid_argument");
    CHECK(error_code([&] { erlang_md1(case_one_model(), 1); }) == "invalid_argument");
    // rho >= 1 never reaches the solver
    CHECK(error_code([&] { solve({3, ServiceDistribution::uniform(R("1/12"), R("7/12"))}); }) == "unstable");
    const auto d = solve(case_three_model(), {.x_max = 1});
    CHECK(error_code([&] { d.segment_index(Rational(2)); }) == "out_of_range");
    CHECK(error_code([&] { d.segment_index(Rational(-1, 2)); }) == "out_of_range");
    CHECK(case_of(case_two_model()) == CaseTag::Two);
    CHECK(to_string(CaseTag::MM1) == "mm1");
}
