#include "mg1/exactnum.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>
#include <vector>

namespace mg1 {

namespace {

Integer pow10(long e) {
    Integer r;
    mpz_ui_pow_ui(r.get_mpz_t(), 10, static_cast<unsigned long>(e));
    return r;
}

Rational parse_decimal(std::string_view s) {
    std::string text(s);
    if (text.empty()) throw Error("parse_error", "empty number");
    std::size_t pos = 0;
    bool negative = false;
    if (text[pos] == '+' || text[pos] == '-') {
        negative = text[pos] == '-';
        ++pos;
    }
    std::string digits;
    long scale = 0;
    bool seen_digit = false;
    bool seen_point = false;
    for (; pos < text.size(); ++pos) {
        const char c = text[pos];
        if (std::isdigit(static_cast<unsigned char>(c))) {
            digits.push_back(c);
            seen_digit = true;
            if (seen_point) ++scale;
        } else if (c == '.' && !seen_point) {
            seen_point = true;
        } else {
            break;
        }
    }
    if (!seen_digit) throw Error("parse_error", "not a number: '" + text + "'");
    long exponent = 0;
    if (pos < text.size()) {
        if (text[pos] != 'e' && text[pos] != 'E')
            throw Error("parse_error", "not a number: '" + text + "'");
        ++pos;
        try {
            std::size_t used = 0;
            exponent = std::stol(text.substr(pos), &used);
            if (pos + used != text.size()) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
            throw Error("parse_error", "bad exponent in '" + text + "'");
        }
    }
    Rational r{Integer(digits, 10), Integer(1)};
    const long net = exponent - scale;
    if (net > 0) r *= Rational(pow10(net));
    if (net < 0) r /= Rational(pow10(-net));
    r.canonicalize();
    return negative ? Rational(-r) : r;
}

// Splits n = s^2 * rest by trial division; rest is squarefree unless it has a
// repeated prime factor above the search bound.
void split_square(Integer n, Integer& square_root_part, Integer& rest) {
    square_root_part = 1;
    rest = 1;
    for (unsigned long p = 2; p <= 1000000UL; ++p) {
        Integer pp = Integer(p) * Integer(p);
        if (pp > n) break;
        while (mpz_divisible_ui_p(n.get_mpz_t(), p * p) != 0) {
            n /= pp;
            square_root_part *= p;
        }
        if (mpz_divisible_ui_p(n.get_mpz_t(), p) != 0) {
            n /= p;
            rest *= p;
        }
    }
    if (mpz_perfect_square_p(n.get_mpz_t()) != 0) {
        Integer s;
        mpz_sqrt(s.get_mpz_t(), n.get_mpz_t());
        square_root_part *= s;
    } else {
        rest *= n;
    }
}

}  // namespace

Rational parse_rational(std::string_view text) {
    while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) text.remove_prefix(1);
    while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.remove_suffix(1);
    const auto slash = text.find('/');
    if (slash == std::string_view::npos) return parse_decimal(text);
    const Rational num = parse_decimal(text.substr(0, slash));
    const Rational den = parse_decimal(text.substr(slash + 1));
    if (den == 0) throw Error("parse_error", "zero denominator in '" + std::string(text) + "'");
    Rational r = num / den;
    r.canonicalize();
    return r;
}

std::string to_string(const Rational& r) { return r.get_str(); }

Rational rational_gcd(const Rational& a, const Rational& b) {
    if (a <= 0 || b <= 0) throw Error("invalid_argument", "rational_gcd needs positive arguments");
    Integer n1 = a.get_num() * b.get_den();
    Integer n2 = b.get_num() * a.get_den();
    Integer g;
    mpz_gcd(g.get_mpz_t(), n1.get_mpz_t(), n2.get_mpz_t());
    Rational r{g, a.get_den() * b.get_den()};
    r.canonicalize();
    return r;
}

bool is_integer(const Rational& r) { return r.get_den() == 1; }

int compare(const Rational& a, const Rational& b) { return cmp(a, b); }

// ---------------------------------------------------------------------------
// QuadExt

QuadExt::QuadExt(Rational p, Rational q, Integer squarefree_d)
    : p_(std::move(p)), q_(std::move(q)), d_(std::move(squarefree_d)) {
    normalize();
}

void QuadExt::normalize() {
    if (q_ == 0) {
        d_ = 0;
        return;
    }
    if (d_ <= 0) throw Error("invalid_argument", "radicand must be positive");
    if (d_ == 1) {
        p_ += q_;
        q_ = 0;
        d_ = 0;
    }
}

QuadExt QuadExt::sqrt(const Rational& d) {
    if (d < 0) throw Error("invalid_argument", "sqrt of a negative rational");
    if (d == 0) return {};
    // sqrt(n/m) = sqrt(n*m)/m
    Integer nm = d.get_num() * d.get_den();
    Integer s;
    Integer rest;
    split_square(nm, s, rest);
    Rational coef{s, d.get_den()};
    if (rest == 1) return QuadExt(coef);
    return QuadExt(Rational(0), coef, rest);
}

int QuadExt::sign() const {
    const int sp = sgn(p_);
    const int sq = sgn(q_);
    if (sq == 0) return sp;
    if (sp == 0 || sp == sq) return sq;
    const Rational lhs = p_ * p_;
    const Rational rhs = q_ * q_ * Rational(d_);
    return lhs > rhs ? sp : sq;
}

Rational QuadExt::to_rational() const {
    if (!is_rational()) throw Error("not_rational", "value " + to_string() + " is irrational");
    return p_;
}

QuadExt QuadExt::conj() const {
    QuadExt r = *this;
    r.q_ = -r.q_;
    return r;
}

QuadExt QuadExt::operator-() const {
    QuadExt r = *this;
    r.p_ = -r.p_;
    r.q_ = -r.q_;
    return r;
}

Integer QuadExt::merge_radicand(const QuadExt& o) const {
    if (q_ == 0) return o.d_;
    if (o.q_ == 0) return d_;
    if (d_ != o.d_)
        throw Error("mismatched_radicand",
                    "operands live in different quadratic fields: sqrt(" + d_.get_str() + ") vs sqrt(" +
                        o.d_.get_str() + ")");
    return d_;
}

QuadExt& QuadExt::operator+=(const QuadExt& o) {
    if (q_ == 0 && o.q_ == 0) {
        p_ += o.p_;
        return *this;
    }
    d_ = merge_radicand(o);
    p_ += o.p_;
    q_ += o.q_;
    normalize();
    return *this;
}

QuadExt& QuadExt::operator-=(const QuadExt& o) {
    if (q_ == 0 && o.q_ == 0) {
        p_ -= o.p_;
        return *this;
    }
    d_ = merge_radicand(o);
    p_ -= o.p_;
    q_ -= o.q_;
    normalize();
    return *this;
}

QuadExt& QuadExt::operator*=(const QuadExt& o) {
    if (q_ == 0 && o.q_ == 0) {
        p_ *= o.p_;
        return *this;
    }
    const Integer d = merge_radicand(o);
    Rational p = p_ * o.p_;
    Rational q = p_ * o.q_ + q_ * o.p_;
    if (q_ != 0 && o.q_ != 0) p += q_ * o.q_ * Rational(d);
    p_ = std::move(p);
    q_ = std::move(q);
    d_ = d;
    if (q_ == 0) d_ = 0;
    normalize();
    return *this;
}

QuadExt& QuadExt::operator/=(const QuadExt& o) {
    if (o.is_zero()) throw Error("division_by_zero", "division by zero in Q(sqrt D)");
    if (q_ == 0 && o.q_ == 0) {
        p_ /= o.p_;
        return *this;
    }
    const Integer d = merge_radicand(o);
    Rational norm = o.p_ * o.p_;
    if (o.q_ != 0) norm -= o.q_ * o.q_ * Rational(d);
    *this *= o.conj();
    p_ /= norm;
    q_ /= norm;
    normalize();
    return *this;
}

bool operator==(const QuadExt& a, const QuadExt& b) {
    return a.p_ == b.p_ && a.q_ == b.q_ && (a.q_ == 0 || a.d_ == b.d_);
}

bool structurally_less(const QuadExt& a, const QuadExt& b) {
    if (const int c = cmp(a.p_, b.p_); c != 0) return c < 0;
    if (const int c = cmp(a.q_, b.q_); c != 0) return c < 0;
    return a.d_ < b.d_;
}

BigFloat QuadExt::eval() const {
    BigFloat r = to_bigfloat(p_);
    if (q_ != 0) {
        BigFloat d;
        mpfr_set_z(d.backend().data(), d_.get_mpz_t(), MPFR_RNDN);
        r += to_bigfloat(q_) * boost::multiprecision::sqrt(d);
    }
    return r;
}

std::string QuadExt::to_string() const {
    if (q_ == 0) return p_.get_str();
    std::string surd;
    if (q_ == 1) {
        surd = "sqrt(" + d_.get_str() + ")";
    } else if (q_ == -1) {
        surd = "-sqrt(" + d_.get_str() + ")";
    } else {
        surd = "(" + q_.get_str() + ")*sqrt(" + d_.get_str() + ")";
    }
    if (p_ == 0) return surd;
    if (surd.front() == '-') return p_.get_str() + " - " + surd.substr(1);
    return p_.get_str() + " + " + surd;
}

// ---------------------------------------------------------------------------
// ExactComplex

Rational ExactComplex::to_rational() const {
    if (!is_real()) throw Error("not_rational", "value " + to_string() + " is not real");
    return re_.to_rational();
}

ExactComplex& ExactComplex::operator+=(const ExactComplex& o) {
    re_ += o.re_;
    im_ += o.im_;
    return *this;
}

ExactComplex& ExactComplex::operator-=(const ExactComplex& o) {
    re_ -= o.re_;
    im_ -= o.im_;
    return *this;
}

ExactComplex& ExactComplex::operator*=(const ExactComplex& o) {
    if (im_.is_zero() && o.im_.is_zero()) {
        re_ *= o.re_;
        return *this;
    }
    QuadExt re = re_ * o.re_ - im_ * o.im_;
    QuadExt im = re_ * o.im_ + im_ * o.re_;
    re_ = std::move(re);
    im_ = std::move(im);
    return *this;
}

ExactComplex& ExactComplex::operator/=(const ExactComplex& o) {
    if (o.is_zero()) throw Error("division_by_zero", "division by zero");
    if (o.im_.is_zero()) {
        re_ /= o.re_;
        im_ /= o.re_;
        return *this;
    }
    const QuadExt norm = o.re_ * o.re_ + o.im_ * o.im_;
    *this *= o.conj();
    re_ /= norm;
    im_ /= norm;
    return *this;
}

bool structurally_less(const ExactComplex& a, const ExactComplex& b) {
    if (structurally_less(a.re_, b.re_)) return true;
    if (structurally_less(b.re_, a.re_)) return false;
    return structurally_less(a.im_, b.im_);
}

std::string ExactComplex::to_string() const {
    if (im_.is_zero()) return re_.to_string();
    const std::string im = "(" + im_.to_string() + ")*I";
    if (re_.is_zero()) return im;
    return "(" + re_.to_string() + ") + " + im;
}

// ---------------------------------------------------------------------------
// floating evaluation

unsigned bits_to_digits10(unsigned bits) {
    bits = std::max(bits, 64U);
    return static_cast<unsigned>(std::ceil(bits * 0.30102999566398120)) + 1;
}

unsigned digits10_to_bits(unsigned digits10) {
    return static_cast<unsigned>(std::ceil(digits10 * 3.3219280948873623));
}

PrecisionScope::PrecisionScope(unsigned bits) : saved_digits10_(BigFloat::default_precision()) {
    BigFloat::default_precision(bits_to_digits10(bits));
}

PrecisionScope::~PrecisionScope() { BigFloat::default_precision(saved_digits10_); }

BigFloat to_bigfloat(const Rational& r) {
    BigFloat out;
    mpfr_set_q(out.backend().data(), r.get_mpq_t(), MPFR_RNDN);
    return out;
}

BigFloat with_precision(const BigFloat& x, unsigned bits) {
    PrecisionScope scope(bits);
    BigFloat out;
    mpfr_set_prec(out.backend().data(), bits);
    mpfr_set(out.backend().data(), x.backend().data(), MPFR_RNDN);
    return out;
}

BigFloat eval_float(const QuadExt& x, unsigned precision_bits) {
    BigFloat r;
    {
        PrecisionScope guard(precision_bits + 32);
        r = x.eval();
    }
    PrecisionScope scope(precision_bits);
    BigFloat out(r);
    out.precision(bits_to_digits10(precision_bits));
    return out;
}

BigFloat eval_float(const Rational& x, unsigned precision_bits) { return eval_float(QuadExt(x), precision_bits); }

std::string format_float(const BigFloat& x, int significant_digits) {
    return x.str(significant_digits, std::ios_base::fmtflags(0));
}

BigComplex operator+(const BigComplex& a, const BigComplex& b) { return {a.re + b.re, a.im + b.im}; }
BigComplex operator-(const BigComplex& a, const BigComplex& b) { return {a.re - b.re, a.im - b.im}; }
BigComplex operator*(const BigComplex& a, const BigComplex& b) {
    return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
}
BigComplex operator/(const BigComplex& a, const BigComplex& b) {
    const BigFloat n = b.re * b.re + b.im * b.im;
    return {(a.re * b.re + a.im * b.im) / n, (a.im * b.re - a.re * b.im) / n};
}
BigComplex operator*(const BigComplex& a, const BigFloat& b) { return {a.re * b, a.im * b}; }

BigComplex exp(const BigComplex& z) {
    const BigFloat m = boost::multiprecision::exp(z.re);
    if (z.im == 0) return {m, BigFloat(0)};
    return {m * boost::multiprecision::cos(z.im), m * boost::multiprecision::sin(z.im)};
}

BigFloat abs(const BigComplex& z) { return boost::multiprecision::hypot(z.re, z.im); }

BigComplex to_bigcomplex(const ExactComplex& z) { return {z.re().eval(), z.im().eval()}; }

// ---------------------------------------------------------------------------
// ExpLinComb

ExpLinComb ExpLinComb::exp_term(Rational r, Rational q) {
    ExpLinComb e;
    e.add_term(std::move(r), std::move(q));
    return e;
}

bool ExpLinComb::is_rational() const {
    return terms_.empty() || (terms_.size() == 1 && terms_.begin()->first == 0);
}

void ExpLinComb::add_term(Rational r, Rational q) {
    if (r == 0) return;
    q.canonicalize();
    auto [it, inserted] = terms_.try_emplace(std::move(q), r);
    if (!inserted) {
        it->second += r;
        if (it->second == 0) terms_.erase(it);
    }
}

ExpLinComb ExpLinComb::operator-() const {
    ExpLinComb r = *this;
    for (auto& [q, c] : r.terms_) c = -c;
    return r;
}

ExpLinComb& ExpLinComb::operator+=(const ExpLinComb& o) {
    for (const auto& [q, c] : o.terms_) add_term(c, q);
    return *this;
}

ExpLinComb& ExpLinComb::operator-=(const ExpLinComb& o) {
    for (const auto& [q, c] : o.terms_) add_term(-c, q);
    return *this;
}

ExpLinComb& ExpLinComb::operator*=(const ExpLinComb& o) {
    ExpLinComb out;
    for (const auto& [q1, c1] : terms_)
        for (const auto& [q2, c2] : o.terms_) out.add_term(c1 * c2, q1 + q2);
    *this = std::move(out);
    return *this;
}

ExpLinComb& ExpLinComb::operator*=(const Rational& r) {
    if (r == 0) {
        terms_.clear();
        return *this;
    }
    for (auto& [q, c] : terms_) c *= r;
    return *this;
}

ExpLinComb ExpLinComb::divided_by_monomial(const ExpLinComb& monomial) const {
    if (!monomial.is_monomial()) throw Error("invalid_argument", "divisor is not a single exponential term");
    const auto& [q0, c0] = *monomial.terms_.begin();
    ExpLinComb out;
    for (const auto& [q, c] : terms_) out.add_term(c / c0, q - q0);
    return out;
}

BigFloat ExpLinComb::eval(unsigned precision_bits) const {
    BigFloat sum;
    {
        PrecisionScope guard(precision_bits + 32);
        sum = 0;
        for (const auto& [q, c] : terms_) {
            BigFloat t = to_bigfloat(c);
            if (q != 0) t *= boost::multiprecision::exp(to_bigfloat(q));
            sum += t;
        }
    }
    PrecisionScope scope(precision_bits);
    BigFloat out(sum);
    out.precision(bits_to_digits10(precision_bits));
    return out;
}

namespace {

template <class F>
BigFloat stable_eval(F&& eval_at, int digits, unsigned start_bits) {
    unsigned bits = std::max(start_bits, 64U);
    BigFloat prev = eval_at(bits);
    for (int round = 0; round < 8; ++round) {
        bits *= 2;
        BigFloat next = eval_at(bits);
        PrecisionScope scope(bits);
        const BigFloat scale = std::max(BigFloat(abs(next)), BigFloat(1e-300));
        const BigFloat tol = boost::multiprecision::pow(BigFloat(10), -digits) * scale;
        if (BigFloat(abs(next - prev)) <= tol) return next;
        prev = std::move(next);
    }
    throw Error("precision_exhausted", "evaluation did not stabilise");
}

}  // namespace

BigFloat ExpLinComb::eval_stable(int digits, unsigned start_bits) const {
    return stable_eval([this](unsigned b) { return eval(b); }, digits, start_bits);
}

std::string ExpLinComb::to_string() const {
    if (terms_.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (const auto& [q, c] : terms_) {
        Rational mag = abs(c);
        if (!first) os << (sgn(c) < 0 ? " - " : " + ");
        else if (sgn(c) < 0) os << "-";
        first = false;
        if (q == 0) {
            os << mag.get_str();
        } else {
            if (mag != 1) os << "(" << mag.get_str() << ")*";
            os << "exp(" << q.get_str() << ")";
        }
    }
    return os.str();
}

// ---------------------------------------------------------------------------
// ExpRatio

ExpRatio::ExpRatio(ExpLinComb num, ExpLinComb den) : num_(std::move(num)), den_(std::move(den)) {
    if (den_.is_zero()) throw Error("division_by_zero", "zero denominator");
    if (den_.is_monomial()) {
        num_ = num_.divided_by_monomial(den_);
        den_ = ExpLinComb(1);
    }
}

namespace {

using Poly = std::vector<Rational>;  // dense, index = degree

void trim(Poly& p) {
    while (!p.empty() && p.back() == 0) p.pop_back();
}

// Returns quotient; remainder left in `a`.
Poly poly_divmod(Poly& a, const Poly& b) {
    trim(a);
    if (a.size() < b.size()) return {};
    Poly q(a.size() - b.size() + 1);
    const Rational& lead = b.back();
    for (std::size_t i = a.size(); i-- >= b.size();) {
        const Rational f = a[i] / lead;
        q[i - (b.size() - 1)] = f;
        if (f != 0)
            for (std::size_t j = 0; j < b.size(); ++j) a[i - (b.size() - 1) + j] -= f * b[j];
        if (i == b.size() - 1) break;
    }
    trim(a);
    return q;
}

Poly poly_gcd(Poly a, Poly b) {
    trim(a);
    trim(b);
    while (!b.empty()) {
        poly_divmod(a, b);
        std::swap(a, b);
    }
    if (!a.empty()) {
        const Rational lead = a.back();
        for (auto& c : a) c /= lead;
    }
    return a;
}

}  // namespace

ExpRatio ExpRatio::reduced(std::size_t max_degree) const {
    if (num_.is_zero()) return ExpRatio(ExpLinComb());
    Integer g = 1;
    auto accumulate = [&g](const ExpLinComb& e) {
        for (const auto& [q, c] : e.terms()) mpz_lcm(g.get_mpz_t(), g.get_mpz_t(), q.get_den().get_mpz_t());
    };
    accumulate(num_);
    accumulate(den_);
    auto to_poly = [&g](const ExpLinComb& e, Integer& lowest) {
        lowest = Rational(e.terms().begin()->first * Rational(g)).get_num();
        const Integer highest = Rational(e.terms().rbegin()->first * Rational(g)).get_num();
        Poly p(Integer(highest - lowest).get_ui() + 1);
        for (const auto& [q, c] : e.terms()) p[Integer(Rational(q * Rational(g)).get_num() - lowest).get_ui()] = c;
        return p;
    };
    Integer low_n;
    Integer low_d;
    const Rational span_n = num_.terms().rbegin()->first - num_.terms().begin()->first;
    const Rational span_d = den_.terms().rbegin()->first - den_.terms().begin()->first;
    if (Rational(span_n * Rational(g)) > Rational(static_cast<long>(max_degree)) ||
        Rational(span_d * Rational(g)) > Rational(static_cast<long>(max_degree)))
        return *this;
    Poly pn = to_poly(num_, low_n);
    Poly pd = to_poly(den_, low_d);
    const Poly common = poly_gcd(pn, pd);
    Poly qn = poly_divmod(pn, common);
    Poly qd = poly_divmod(pd, common);
    // scale so the denominator has integer coefficients with unit content
    Integer lcm_den = 1;
    Integer content = 0;
    for (const auto& c : qd) {
        if (c == 0) continue;
        mpz_lcm(lcm_den.get_mpz_t(), lcm_den.get_mpz_t(), c.get_den().get_mpz_t());
    }
    for (const auto& c : qd) {
        if (c == 0) continue;
        Integer v = Rational(c * Rational(lcm_den)).get_num();
        mpz_gcd(content.get_mpz_t(), content.get_mpz_t(), v.get_mpz_t());
    }
    Rational scale{lcm_den, content};
    scale.canonicalize();
    // exponent shift: keep the numerator's lowest exponent relative to the denominator's
    auto from_poly = [&g, &scale](const Poly& p, const Integer& shift) {
        ExpLinComb e;
        for (std::size_t i = 0; i < p.size(); ++i)
            if (p[i] != 0) e.add_term(p[i] * scale, Rational(Integer(static_cast<unsigned long>(i)) + shift, g));
        return e;
    };
    const Integer shift_n = low_n - low_d;
    ExpLinComb n = from_poly(qn, shift_n);
    ExpLinComb d = from_poly(qd, Integer(0));
    ExpRatio out;
    out.num_ = std::move(n);
    out.den_ = std::move(d);
    if (out.den_.is_monomial()) {
        out.num_ = out.num_.divided_by_monomial(out.den_);
        out.den_ = ExpLinComb(1);
    }
    return out;
}

BigFloat ExpRatio::eval(unsigned precision_bits) const {
    const BigFloat n = num_.eval(precision_bits + 16);
    const BigFloat d = den_.eval(precision_bits + 16);
    PrecisionScope scope(precision_bits + 16);
    BigFloat out = n / d;
    out.precision(bits_to_digits10(precision_bits));
    return out;
}

BigFloat ExpRatio::eval_stable(int digits, unsigned start_bits) const {
    return stable_eval([this](unsigned b) { return eval(b); }, digits, start_bits);
}

std::string ExpRatio::to_string() const {
    if (is_lincomb()) return num_.to_string();
    return "(" + num_.to_string() + ")/(" + den_.to_string() + ")";
}

}  // namespace mg1
