#include "doctest.h"
#include "helpers.hpp"

#include <random>

using namespace mg1;
using namespace mg1::testing;
namespace mp = boost::multiprecision;

namespace {

// p + q sqrt(d) with small random rational parts
QuadExt random_quad(std::mt19937_64& rng, long d) {
    std::uniform_int_distribution<long> num(-40, 40), den(1, 17);
    const Rational p(num(rng), den(rng));
    const Rational q(num(rng), den(rng));
    return QuadExt(p) + QuadExt(q) * QuadExt::sqrt(d);
}

}  // namespace

TEST_CASE("rationals parse and stay in lowest terms") {
    CHECK(R("6/8") == Rational(3, 4));
    CHECK(R("6/8").get_den() == 4);
    CHECK(R("-7/12") == Rational(-7, 12));
    CHECK(R("0.25") == Rational(1, 4));
    CHECK(R("1e-3") == Rational(1, 1000));
    CHECK(R("0.0509") == Rational(509, 10000));
    CHECK(R("0.050700") == Rational(507, 10000));
    CHECK(R(" 3 ") == 3);
    CHECK_THROWS_AS(R("1/0"), Error);
    CHECK_THROWS_AS(R("abc"), Error);
    CHECK_THROWS_AS(R("1.5x"), Error);
    const Rational r = R("10/-4");
    CHECK(r.get_den() > 0);
    CHECK(r == Rational(-5, 2));
}

TEST_CASE("rational gcd of the Case One service bounds") {
    CHECK(rational_gcd(R("1/12"), R("7/12")) == R("1/12"));
    CHECK(rational_gcd(R("1/3"), R("1/2")) == R("1/6"));
    CHECK_THROWS_AS(rational_gcd(0, 1), Error);
}

TEST_CASE("quadratic extension closure and folding") {
    const QuadExt s2 = QuadExt::sqrt(2);
    CHECK(QuadExt(1) + s2 == QuadExt(Rational(1), Rational(1), Integer(2)));
    CHECK(s2 * s2 == QuadExt(2));
    CHECK((s2 * s2).is_rational());
    CHECK(QuadExt::sqrt(4) == QuadExt(2));
    CHECK(QuadExt::sqrt(4).is_rational());
    CHECK(QuadExt::sqrt(R("9/4")) == QuadExt(R("3/2")));
    // sqrt(8) = 2 sqrt(2)
    CHECK(QuadExt::sqrt(8) == QuadExt(2) * s2);
    CHECK(QuadExt::sqrt(0).is_zero());
    CHECK_THROWS_AS(QuadExt(1) / QuadExt(0), Error);
    CHECK_THROWS_AS(s2 + QuadExt::sqrt(3), Error);
    CHECK((QuadExt(1) + s2).sign() == 1);
    CHECK((QuadExt(1) - s2).sign() == -1);
    CHECK((QuadExt(3) - QuadExt(2) * s2).sign() == 1);  // 3 > 2.828
}

TEST_CASE("property: field axioms on random Q(sqrt 2) triples") {
    std::mt19937_64 rng(5);
    for (int i = 0; i < 300; ++i) {
        const QuadExt a = random_quad(rng, 2), b = random_quad(rng, 2), c = random_quad(rng, 2);
        CHECK((a + b) + c == a + (b + c));
        CHECK((a * b) * c == a * (b * c));
        CHECK(a * (b + c) == a * b + a * c);
        CHECK(a * b == b * a);
        if (!b.is_zero()) CHECK((a / b) * b == a);
        CHECK(a * a.conj() == QuadExt(a.rational_part() * a.rational_part() - 2 * a.surd_part() * a.surd_part()));
    }
}

TEST_CASE("property: exact complex arithmetic") {
    std::mt19937_64 rng(6);
    for (int i = 0; i < 200; ++i) {
        const ExactComplex a(random_quad(rng, 2), random_quad(rng, 2));
        const ExactComplex b(random_quad(rng, 2), random_quad(rng, 2));
        CHECK(a * b == b * a);
        if (!b.is_zero()) CHECK((a / b) * b == a);
        CHECK((a * a.conj()).is_real());
    }
}

TEST_CASE("service variance of the Case One law by rational arithmetic") {
    const Rational xi = R("19/144");
    const Rational mu = 3;
    CHECK(xi - 1 / (mu * mu) == R("1/48"));
    // E[S^2] for U[1/12, 7/12] from (b^3 - a^3) / (3 (b - a))
    const Rational a = R("1/12"), b = R("7/12");
    CHECK((b * b * b - a * a * a) / (3 * (b - a)) == xi);
}

TEST_CASE("floating evaluation") {
    const ExpLinComb c = ExpLinComb::exp_term(R("4/3"), R("1/6"));
    const BigFloat v = c.eval(128);
    {
        PrecisionScope scope(256);
        const BigFloat want = BigFloat(4) / 3 * mp::exp(BigFloat(1) / 6);
        CHECK(abs(v - want) < BigFloat("1e-37"));
    }
    CHECK(format_float(v, 7) == "1.575147");
    CHECK(eval_float(Rational(0), 200) == 0);
    CHECK(eval_float(QuadExt(0), 64) == 0);
    PrecisionScope scope(512);
    const BigFloat s2 = eval_float(QuadExt::sqrt(2), 256);
    CHECK(abs(s2 - mp::sqrt(BigFloat(2))) < BigFloat("1e-76"));
}

TEST_CASE("property: evaluation at P and 2P agrees to P - 4 bits") {
    std::mt19937_64 rng(8);
    for (int i = 0; i < 100; ++i) {
        const QuadExt x = random_quad(rng, 7);
        if (x.is_zero()) continue;
        for (unsigned P : {64u, 128u, 256u}) {
            const BigFloat lo = eval_float(x, P);
            const BigFloat hi = eval_float(x, 2 * P);
            PrecisionScope scope(2 * P);
            CHECK(abs(lo - hi) <= abs(hi) * mp::ldexp(BigFloat(1), -static_cast<int>(P) + 4));
        }
    }
}

TEST_CASE("precision scope restores the previous precision") {
    const auto before = BigFloat::default_precision();
    {
        PrecisionScope a(1024);
        CHECK(BigFloat::default_precision() >= 300u);
        {
            PrecisionScope b(64);
            CHECK(BigFloat::default_precision() < 30u);
        }
        CHECK(BigFloat::default_precision() >= 300u);
    }
    CHECK(BigFloat::default_precision() == before);
    PrecisionScope big(1024);
    const BigFloat x = mp::exp(BigFloat(1));
    CHECK(with_precision(x, 64).precision() < 30u);
}

TEST_CASE("exponential combinations") {
    ExpLinComb a = ExpLinComb::exp_term(2, R("1/3"));
    a += ExpLinComb::exp_term(-2, R("1/3"));
    CHECK(a.is_zero());
    const ExpLinComb e = ExpLinComb::exp_term(1, 1);
    const ExpLinComb prod = e * ExpLinComb::exp_term(3, R("1/6"));
    CHECK(prod == ExpLinComb::exp_term(3, R("7/6")));
    CHECK(prod.divided_by_monomial(e) == ExpLinComb::exp_term(3, R("1/6")));
    CHECK(ExpLinComb(5).is_rational());

    // (1 - e + e^{7/6}) / (-3 + 3e) written with a common factor
    ExpLinComb num = ExpLinComb(1) - ExpLinComb::exp_term(1, 1) + ExpLinComb::exp_term(1, R("7/6"));
    ExpLinComb den = ExpLinComb(-3) + ExpLinComb::exp_term(3, 1);
    const ExpRatio r(num * ExpLinComb::exp_term(R("1/2"), R("1/3")), den * ExpLinComb::exp_term(R("1/2"), R("1/3")));
    CHECK(r == ExpRatio(num, den));
    const ExpRatio red = r.reduced();
    CHECK(red.num() * den == num * red.den());
    CHECK(red.num().size() <= num.size());
    CHECK_THROWS_AS(ExpRatio(num, ExpLinComb()), Error);
}
