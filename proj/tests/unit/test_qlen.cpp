#include "doctest.h"
#include "helpers.hpp"

#include "mg1/qlen.hpp"

#include <cmath>
#include <initializer_list>
#include <utility>

using namespace mg1;
using namespace mg1::testing;
namespace mp = boost::multiprecision;

namespace {

// sum of c * e^{q} from (c, q) string pairs
ExpLinComb lc(std::initializer_list<std::pair<const char*, const char*>> terms) {
    ExpLinComb out;
    for (const auto& [c, q] : terms) out += ExpLinComb::exp_term(R(c), R(q));
    return out;
}

double value(const ExpRatio& r) { return r.eval_stable(20).convert_to<double>(); }

const QueueLengthDist& uniform_dist() {
    static const QueueLengthDist d = pgf_series(case_one_model(), 60);
    return d;
}
const QueueLengthDist& deterministic_dist() {
    static const QueueLengthDist d = pgf_series(case_three_model(), 60);
    return d;
}

}  // namespace

TEST_CASE("M/U/1 probabilities") {
    const auto& p = uniform_dist().probabilities;
    CHECK(p[0] == ExpRatio(ExpLinComb(R("1/3"))));
    const ExpRatio p1(lc({{"1", "0"}, {"-1", "1"}, {"1", "7/6"}}), lc({{"-3", "0"}, {"3", "1"}}));
    CHECK(p[1] == p1);
    const double table[] = {0.333333, 0.289628, 0.177042, 0.096164, 0.050209, 0.025950};
    for (int l = 0; l <= 5; ++l) {
        CAPTURE(l);
        CHECK(std::abs(value(p[l]) - table[l]) < 1e-6);
    }
}

TEST_CASE("M/D/1 probabilities as printed") {
    const auto& p = deterministic_dist().probabilities;
    const ExpLinComb want[] = {
        lc({{"1/3", "0"}}),
        lc({{"-1/3", "0"}, {"1/3", "2/3"}}),
        lc({{"-5/9", "2/3"}, {"3/9", "4/3"}}),
        lc({{"8/27", "2/3"}, {"-21/27", "4/3"}, {"9/27", "2"}}),
        lc({{"-22/243", "2/3"}, {"180/243", "4/3"}, {"-243/243", "2"}, {"81/243", "8/3"}}),
        lc({{"14/729", "2/3"}, {"-312/729", "4/3"}, {"972/729", "2"}, {"-891/729", "8/3"}, {"243/729", "10/3"}}),
    };
    const double table[] = {0.333333, 0.315911, 0.182481, 0.089494, 0.042035, 0.019607};
    for (int l = 0; l <= 5; ++l) {
        CAPTURE(l);
        REQUIRE(p[l].is_lincomb());
        CHECK(p[l].num() == want[l]);
        CHECK(std::abs(value(p[l]) - table[l]) < 1e-6);
    }
}

TEST_CASE("M/M/1 probabilities are geometric") {
    const auto d = pgf_series(mm1_model(), 20);
    Rational p = R("1/3");
    for (std::size_t l = 0; l <= 20; ++l) {
        CAPTURE(l);
        CHECK(d.probabilities[l] == ExpRatio(ExpLinComb(p)));
        p *= R("2/3");
    }
}

TEST_CASE("queue-length moments") {
    const QlenMoments u = qlen_moments(case_one_model());
    CHECK(u.mean == R("35/24"));
    CHECK(u.variance == R("4547/1728"));
    const QlenMoments d = qlen_moments(case_three_model());
    CHECK(d.mean == R("4/3"));
    CHECK(d.variance == R("56/27"));
    // M/M/1: rho / (1 - rho) and rho / (1 - rho)^2
    const QlenMoments m = qlen_moments(mm1_model());
    CHECK(m.mean == 2);
    CHECK(m.variance == 6);
    CHECK(uniform_dist().mean == R("35/24"));
}

TEST_CASE("p_0 = 1 - rho for every model") {
    const std::vector<QueueModel> models{case_one_model(),
                                         case_two_model(),
                                         case_three_model(),
                                         mm1_model(),
                                         {1, ServiceDistribution::uniform(R("1/5"), 1)},
                                         {R("1/2"), ServiceDistribution::deterministic(R("7/4"))}};
    for (const auto& m : models) {
        CAPTURE(m.describe());
        const auto d = pgf_series(m, 2);
        CHECK(d.probabilities[0].reduced() == ExpRatio(ExpLinComb(m.atom_mass())));
        CHECK(std::abs(value(d.probabilities[0]) - m.atom_mass().get_d()) < 1e-15);
    }
}

TEST_CASE("property: partial sums increase to one") {
    PrecisionScope scope(256);
    for (const auto* dist : {&uniform_dist(), &deterministic_dist()}) {
        BigFloat sum = 0, prev = 0, first_moment = 0;
        for (std::size_t l = 0; l < dist->probabilities.size(); ++l) {
            const BigFloat p = dist->probabilities[l].eval_stable(30);
            CHECK(p > 0);
            sum += p;
            first_moment += p * static_cast<unsigned>(l);
            CHECK(sum > prev);
            CHECK(sum < 1);
            prev = sum;
            if (l == 30) CHECK(sum > BigFloat(1) - BigFloat("1e-4"));
        }
        CHECK(abs(first_moment - to_bigfloat(dist->mean)) < BigFloat("1e-6"));
    }
}

TEST_CASE("series coefficients agree with the Cauchy contour integral") {
    PrecisionScope scope(256);
    const BigFloat radius("0.5");
    for (const auto& m : {case_one_model(), case_two_model(), case_three_model(), mm1_model()}) {
        CAPTURE(m.describe());
        const auto d = pgf_series(m, 5);
        for (std::size_t l = 0; l <= 5; ++l) {
            CAPTURE(l);
            const BigFloat contour = pgf_coefficient_contour(m, l, radius, 192, 256);
            const BigFloat series = d.probabilities[l].eval(256);
            CHECK(abs(contour - series) < BigFloat("1e-20"));
        }
    }
}

TEST_CASE("generating function values") {
    for (const auto& m : {case_one_model(), case_three_model(), mm1_model()}) {
        CAPTURE(m.describe());
        CHECK(pgf_eval(m, Rational(0)).reduced() == ExpRatio(ExpLinComb(R("1/3"))));
        CHECK(pgf_eval(m, Rational(1)) == ExpRatio(ExpLinComb(1)));
        const std::complex<double> near_one = pgf_eval(m, std::complex<double>(1.0 - 1e-9, 0.0));
        CHECK(std::abs(near_one - 1.0) < 1e-8);
        const std::complex<double> off = pgf_eval(m, std::complex<double>(1.0 - 2e-3, 0.0));
        const std::complex<double> in = pgf_eval(m, std::complex<double>(1.0 - 5e-4, 0.0));
        CHECK(std::abs(off - in) < 1e-2);
    }
    // M/M/1: (1 - rho) / (1 - rho z)
    const std::complex<double> z(0.3, 0.4);
    const std::complex<double> want = (1.0 / 3.0) / (1.0 - (2.0 / 3.0) * z);
    CHECK(std::abs(pgf_eval(mm1_model(), z) - want) < 1e-14);
    PrecisionScope scope(256);
    const BigComplex bz{BigFloat("0.3"), BigFloat("0.4")};
    const BigComplex bv = pgf_eval(mm1_model(), bz, 256);
    const BigComplex bw = BigComplex{BigFloat(1) / 3, BigFloat(0)} /
                          (BigComplex{BigFloat(1), BigFloat(0)} - bz * (BigFloat(2) / 3));
    CHECK(abs(bv - bw) < BigFloat("1e-70"));
}

TEST_CASE("ratio diagnostics") {
    const RatioDiagnostics r = ratio_diagnostics(case_one_model(), 6);
    const double want[] = {0.868886, 0.611272, 0.543172, 0.522116, 0.516838};
    for (int i = 0; i < 5; ++i) CHECK(std::abs(r.ratios[i] - want[i]) < 1e-5);
    std::vector<double> geo;
    for (int l = 0; l < 10; ++l) geo.push_back((1 - 0.4) * std::pow(0.4, l));
    const RatioDiagnostics g = ratio_diagnostics(geo);
    for (double x : g.ratios) CHECK(x == doctest::Approx(0.4).epsilon(1e-14));
    CHECK(g.limit_estimate == doctest::Approx(0.4));
    const RatioDiagnostics dd = ratio_diagnostics(case_three_model(), 6);
    CHECK(dd.ratios[0] == doctest::Approx(0.315911 / 0.333333).epsilon(1e-5));
    CHECK_THROWS_AS(ratio_diagnostics(std::vector<double>{0.5, 0.25}), Error);
    CHECK_THROWS_AS(ratio_diagnostics(case_one_model(), 2), Error);
}
