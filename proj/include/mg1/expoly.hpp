#pragma once

// Exponential polynomials: finite sums of c * x^k * exp(q + beta (x - s)),
// the exact representation of every density fragment.
//
// Keys are canonical: when beta is rational the shift is folded into the
// rational offset q, so two expressions are equal as functions exactly when
// their term maps are equal.

#include "mg1/exactnum.hpp"

#include <map>
#include <string>
#include <vector>

namespace mg1 {

struct ExpKey {
    ExactComplex slope;  ///< beta
    Rational shift;      ///< s
    Rational offset;     ///< q
    unsigned power = 0;  ///< k

    friend bool operator==(const ExpKey& a, const ExpKey& b) {
        return a.slope == b.slope && a.shift == b.shift && a.offset == b.offset && a.power == b.power;
    }
};

struct ExpKeyLess {
    bool operator()(const ExpKey& a, const ExpKey& b) const;
};

/// Sum of c_i * exp(E_i) with exact complex exponents E_i; the value of an
/// exponential polynomial at a rational point.
class ExpConst {
public:
    const std::map<ExactComplex, ExactComplex, StructuralLess>& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }
    void add(const ExactComplex& coef, const ExactComplex& exponent);
    ExpConst& operator+=(const ExpConst& o);
    ExpConst& operator-=(const ExpConst& o);
    friend ExpConst operator-(ExpConst a, const ExpConst& b) { return a -= b; }
    friend bool operator==(const ExpConst& a, const ExpConst& b) { return a.terms_ == b.terms_; }

    /// Exact conversion when every coefficient and exponent is rational.
    ExpLinComb to_lincomb() const;
    BigComplex eval_complex(unsigned precision_bits) const;
    /// Real part.
    BigFloat eval(unsigned precision_bits) const;
    std::string to_string() const;

private:
    std::map<ExactComplex, ExactComplex, StructuralLess> terms_;
};

class ExpPoly {
public:
    using TermMap = std::map<ExpKey, ExactComplex, ExpKeyLess>;

    ExpPoly() = default;
    /// coef * x^power * exp(offset + slope (x - shift))
    static ExpPoly term(ExactComplex coef, unsigned power, ExactComplex slope, Rational shift = 0,
                        Rational offset = 0);
    static ExpPoly constant(ExactComplex c) { return term(std::move(c), 0, ExactComplex(0)); }

    const TermMap& terms() const { return terms_; }
    std::size_t size() const { return terms_.size(); }
    bool is_zero() const { return terms_.empty(); }
    unsigned max_power() const;

    void add(ExactComplex coef, unsigned power, ExactComplex slope, Rational shift = 0, Rational offset = 0);
    ExpPoly& operator+=(const ExpPoly& o);
    ExpPoly& operator-=(const ExpPoly& o);
    ExpPoly& operator*=(const ExactComplex& c);
    friend ExpPoly operator+(ExpPoly a, const ExpPoly& b) { return a += b; }
    friend ExpPoly operator-(ExpPoly a, const ExpPoly& b) { return a -= b; }
    friend ExpPoly operator*(ExpPoly a, const ExactComplex& c) { return a *= c; }
    friend ExpPoly operator*(const ExactComplex& c, ExpPoly a) { return a *= c; }
    ExpPoly operator-() const;
    friend bool operator==(const ExpPoly& a, const ExpPoly& b) { return a.terms_ == b.terms_; }

    ExpPoly derivative() const;
    /// Indefinite integral with zero constant; term-wise repeated integration by parts.
    ExpPoly antiderivative() const;
    /// x -> f(x - delta)
    ExpPoly shifted(const Rational& delta) const;
    /// x^m * f(x)
    ExpPoly times_x_power(unsigned m) const;
    /// (x - x0) * f(x)
    ExpPoly times_linear(const Rational& x0) const;

    /// f(x0) * exp(rate (x - x0)) as an exponential polynomial. Throws
    /// Error("not_representable") when the product cannot be written with
    /// rational offset and shift.
    ExpPoly transport(const Rational& x0, const ExactComplex& rate) const;
    /// Exact value at a rational point.
    ExpConst value_at(const Rational& x0) const;

    /// True when every term with a non-real slope or coefficient has its
    /// conjugate partner, so the function is real valued.
    bool is_real_valued() const;

    /// Human-readable form; conjugate pairs are shown as exp * [A cos + B sin].
    std::string to_string() const;

private:
    TermMap terms_;
};

/// Numeric form of an ExpPoly compiled at a fixed working precision: one
/// polynomial with complex coefficients per distinct slope.
class NumericExpPoly {
public:
    NumericExpPoly() = default;
    NumericExpPoly(const ExpPoly& f, unsigned precision_bits);

    unsigned precision_bits() const { return bits_; }
    /// Real part of f(x); x must carry at least this working precision.
    BigFloat eval(const BigFloat& x) const;
    /// Largest absolute term value at x, used to report cancellation.
    BigFloat magnitude(const BigFloat& x) const;

private:
    struct Block {
        bool real = true;
        BigFloat slope_re;
        BigFloat slope_im;
        std::vector<BigFloat> re;
        std::vector<BigFloat> im;
        std::vector<BigFloat> abs_max;
    };
    std::vector<Block> blocks_;
    unsigned bits_ = 0;
};

/// Particular plus homogeneous solution of
///   y^(m) = sum_{j<m} coeffs[j] y^(j) + forcing(x),  m = coeffs.size() in {1, 2},
/// with y^(j)(x0) equal to the value of initial[j] at x0.
ExpPoly solve_linear_segment(const std::vector<Rational>& coeffs, const ExpPoly& forcing, const Rational& x0,
                             const std::vector<ExpPoly>& initial);

/// Roots of r^m - sum_j coeffs[j] r^j for m in {1, 2}.
std::vector<ExactComplex> characteristic_roots(const std::vector<Rational>& coeffs);

}  // namespace mg1
