#pragma once

// Exact scalars (rationals, elements of Q(sqrt D) and their complex pairs),
// exponential linear combinations sum r_i * exp(q_i), and arbitrary precision
// floating evaluation.

#include <gmpxx.h>

#include <boost/multiprecision/mpfr.hpp>

#include <compare>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>

namespace mg1 {

using Rational = mpq_class;
using Integer = mpz_class;
using BigFloat = boost::multiprecision::mpfr_float;

class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message, std::string context = {})
        : std::runtime_error(message), code_(std::move(code)), context_(std::move(context)) {}

    const std::string& code() const noexcept { return code_; }
    const std::string& context() const noexcept { return context_; }

private:
    std::string code_;
    std::string context_;
};

/// Parses "3", "-7/12", "0.25" or "1e-3" into an exact rational.
Rational parse_rational(std::string_view text);
std::string to_string(const Rational& r);
/// Greatest common divisor of two positive rationals (largest g with a/g, b/g integers).
Rational rational_gcd(const Rational& a, const Rational& b);
bool is_integer(const Rational& r);
int compare(const Rational& a, const Rational& b);

/// p + q*sqrt(D) where D is a squarefree integer > 1, or D == 0 for a pure rational.
class QuadExt {
public:
    QuadExt() = default;
    QuadExt(long v) : p_(v) {}  // NOLINT(google-explicit-constructor)
    QuadExt(Rational p) : p_(std::move(p)) { p_.canonicalize(); }  // NOLINT
    QuadExt(Rational p, Rational q, Integer squarefree_d);

    /// sqrt(d) for d >= 0; folds perfect squares so the result may be rational.
    static QuadExt sqrt(const Rational& d);

    const Rational& rational_part() const { return p_; }
    const Rational& surd_part() const { return q_; }
    const Integer& radicand() const { return d_; }

    bool is_rational() const { return q_ == 0; }
    bool is_zero() const { return p_ == 0 && q_ == 0; }
    /// Exact sign (uses p^2 vs q^2 D comparison); -1, 0, 1.
    int sign() const;
    Rational to_rational() const;

    QuadExt conj() const;
    QuadExt operator-() const;
    QuadExt& operator+=(const QuadExt& o);
    QuadExt& operator-=(const QuadExt& o);
    QuadExt& operator*=(const QuadExt& o);
    QuadExt& operator/=(const QuadExt& o);
    friend QuadExt operator+(QuadExt a, const QuadExt& b) { return a += b; }
    friend QuadExt operator-(QuadExt a, const QuadExt& b) { return a -= b; }
    friend QuadExt operator*(QuadExt a, const QuadExt& b) { return a *= b; }
    friend QuadExt operator/(QuadExt a, const QuadExt& b) { return a /= b; }
    friend bool operator==(const QuadExt& a, const QuadExt& b);
    /// Structural total order, used for map keys only.
    friend bool structurally_less(const QuadExt& a, const QuadExt& b);

    BigFloat eval() const;
    std::string to_string() const;

private:
    void normalize();
    Integer merge_radicand(const QuadExt& o) const;

    Rational p_{0};
    Rational q_{0};
    Integer d_{0};
};

/// re + i*im with both parts in a common Q(sqrt D).
class ExactComplex {
public:
    ExactComplex() = default;
    ExactComplex(long v) : re_(v) {}          // NOLINT
    ExactComplex(Rational v) : re_(std::move(v)) {}  // NOLINT
    ExactComplex(QuadExt re) : re_(std::move(re)) {}  // NOLINT
    ExactComplex(QuadExt re, QuadExt im) : re_(std::move(re)), im_(std::move(im)) {}

    const QuadExt& re() const { return re_; }
    const QuadExt& im() const { return im_; }
    bool is_real() const { return im_.is_zero(); }
    bool is_rational() const { return im_.is_zero() && re_.is_rational(); }
    bool is_zero() const { return re_.is_zero() && im_.is_zero(); }
    Rational to_rational() const;

    ExactComplex conj() const { return {re_, -im_}; }
    ExactComplex operator-() const { return {-re_, -im_}; }
    ExactComplex& operator+=(const ExactComplex& o);
    ExactComplex& operator-=(const ExactComplex& o);
    ExactComplex& operator*=(const ExactComplex& o);
    ExactComplex& operator/=(const ExactComplex& o);
    friend ExactComplex operator+(ExactComplex a, const ExactComplex& b) { return a += b; }
    friend ExactComplex operator-(ExactComplex a, const ExactComplex& b) { return a -= b; }
    friend ExactComplex operator*(ExactComplex a, const ExactComplex& b) { return a *= b; }
    friend ExactComplex operator/(ExactComplex a, const ExactComplex& b) { return a /= b; }
    friend bool operator==(const ExactComplex& a, const ExactComplex& b) {
        return a.re_ == b.re_ && a.im_ == b.im_;
    }
    friend bool structurally_less(const ExactComplex& a, const ExactComplex& b);

    std::string to_string() const;

private:
    QuadExt re_;
    QuadExt im_;
};

struct StructuralLess {
    bool operator()(const QuadExt& a, const QuadExt& b) const { return structurally_less(a, b); }
    bool operator()(const ExactComplex& a, const ExactComplex& b) const {
        return structurally_less(a, b);
    }
};

// ---------------------------------------------------------------------------
// Floating evaluation

/// Bits of working precision; values below 64 are raised to 64.
unsigned bits_to_digits10(unsigned bits);
unsigned digits10_to_bits(unsigned digits10);

/// Sets the working precision of BigFloat for the current scope.
class PrecisionScope {
public:
    explicit PrecisionScope(unsigned bits);
    ~PrecisionScope();
    PrecisionScope(const PrecisionScope&) = delete;
    PrecisionScope& operator=(const PrecisionScope&) = delete;

private:
    unsigned saved_digits10_;
};

constexpr unsigned kDefaultPrecisionBits = 256;

BigFloat to_bigfloat(const Rational& r);
/// Copy of x rounded to exactly `bits` of precision (copies otherwise keep
/// the source precision).
BigFloat with_precision(const BigFloat& x, unsigned bits);
/// The value rounded to precision_bits (evaluated with guard bits).
BigFloat eval_float(const QuadExt& x, unsigned precision_bits);
BigFloat eval_float(const Rational& x, unsigned precision_bits);
/// Decimal rendering with the given number of significant digits.
std::string format_float(const BigFloat& x, int significant_digits);

struct BigComplex {
    BigFloat re{0};
    BigFloat im{0};
};

BigComplex operator+(const BigComplex& a, const BigComplex& b);
BigComplex operator-(const BigComplex& a, const BigComplex& b);
BigComplex operator*(const BigComplex& a, const BigComplex& b);
BigComplex operator/(const BigComplex& a, const BigComplex& b);
BigComplex operator*(const BigComplex& a, const BigFloat& b);
BigComplex exp(const BigComplex& z);
BigFloat abs(const BigComplex& z);
BigComplex to_bigcomplex(const ExactComplex& z);

// ---------------------------------------------------------------------------
// sum r_i * exp(q_i) with rational r_i, q_i

class ExpLinComb {
public:
    ExpLinComb() = default;
    ExpLinComb(Rational r) { add_term(std::move(r), 0); }  // NOLINT
    static ExpLinComb exp_term(Rational r, Rational q);

    /// Map exponent q -> coefficient r; never holds zero coefficients.
    const std::map<Rational, Rational>& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }
    bool is_rational() const;
    /// True when exactly one term is present.
    bool is_monomial() const { return terms_.size() == 1; }
    std::size_t size() const { return terms_.size(); }

    void add_term(Rational r, Rational q);
    ExpLinComb operator-() const;
    ExpLinComb& operator+=(const ExpLinComb& o);
    ExpLinComb& operator-=(const ExpLinComb& o);
    ExpLinComb& operator*=(const ExpLinComb& o);
    ExpLinComb& operator*=(const Rational& r);
    friend ExpLinComb operator+(ExpLinComb a, const ExpLinComb& b) { return a += b; }
    friend ExpLinComb operator-(ExpLinComb a, const ExpLinComb& b) { return a -= b; }
    friend ExpLinComb operator*(ExpLinComb a, const ExpLinComb& b) { return a *= b; }
    friend ExpLinComb operator*(ExpLinComb a, const Rational& r) { return a *= r; }
    friend bool operator==(const ExpLinComb& a, const ExpLinComb& b) { return a.terms_ == b.terms_; }

    /// Exact division by a single term r*exp(q).
    ExpLinComb divided_by_monomial(const ExpLinComb& monomial) const;

    BigFloat eval(unsigned precision_bits) const;
    /// Evaluates with doubling precision until two successive results agree
    /// to `digits` significant digits.
    BigFloat eval_stable(int digits, unsigned start_bits = kDefaultPrecisionBits) const;
    std::string to_string() const;

private:
    std::map<Rational, Rational> terms_;
};

/// num / den with ExpLinComb parts; den != 0.
class ExpRatio {
public:
    ExpRatio() = default;
    ExpRatio(ExpLinComb num) : num_(std::move(num)), den_(1) {}  // NOLINT
    ExpRatio(ExpLinComb num, ExpLinComb den);

    const ExpLinComb& num() const { return num_; }
    const ExpLinComb& den() const { return den_; }
    bool is_zero() const { return num_.is_zero(); }
    /// True when the denominator is 1 (the value is a plain ExpLinComb).
    bool is_lincomb() const { return den_ == ExpLinComb(1); }

    friend bool operator==(const ExpRatio& a, const ExpRatio& b) {
        return a.num_ * b.den_ == b.num_ * a.den_;
    }

    /// Cancels the monomial content and the polynomial gcd of numerator and
    /// denominator (viewed as Laurent polynomials in exp(1/g)).
    ExpRatio reduced(std::size_t max_degree = 4000) const;
    BigFloat eval(unsigned precision_bits) const;
    BigFloat eval_stable(int digits, unsigned start_bits = kDefaultPrecisionBits) const;
    std::string to_string() const;

private:
    ExpLinComb num_;
    ExpLinComb den_{1};
};

}  // namespace mg1
