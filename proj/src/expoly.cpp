#include "mg1/expoly.hpp"

#include <sstream>

namespace mg1 {

namespace {

// Binomial coefficient as a rational.
Rational binomial(unsigned n, unsigned k) {
    Integer r;
    mpz_bin_uiui(r.get_mpz_t(), n, k);
    return Rational(r);
}

Rational falling_factorial(unsigned n, unsigned k) {  // n! / (n-k)!
    Rational r = 1;
    for (unsigned i = 0; i < k; ++i) r *= (n - i);
    return r;
}

ExactComplex power_of(const ExactComplex& base, unsigned k) {
    ExactComplex r(1);
    for (unsigned i = 0; i < k; ++i) r *= base;
    return r;
}

Rational power_of(const Rational& base, unsigned k) {
    Rational r = 1;
    for (unsigned i = 0; i < k; ++i) r *= base;
    return r;
}

struct Basis {
    Rational c[4];  // 1, sqrt(D), i, i*sqrt(D)
};

Basis decompose(const ExactComplex& z) {
    return {{z.re().rational_part(), z.re().surd_part(), z.im().rational_part(), z.im().surd_part()}};
}

// Finds rational (q', s') with q' - rate * s' = exponent.
bool rebase(const ExactComplex& exponent, const ExactComplex& rate, Rational& offset, Rational& shift) {
    const Basis e = decompose(exponent);
    const Basis r = decompose(rate);
    int pivot = -1;
    for (int j = 1; j < 4; ++j)
        if (r.c[j] != 0) {
            pivot = j;
            break;
        }
    if (pivot < 0) {
        if (e.c[1] != 0 || e.c[2] != 0 || e.c[3] != 0) return false;
        shift = 0;
        offset = e.c[0];
        return true;
    }
    if (exponent.re().radicand() != 0 && rate.re().radicand() != 0 &&
        exponent.re().radicand() != rate.re().radicand())
        return false;
    shift = -e.c[pivot] / r.c[pivot];
    for (int j = 1; j < 4; ++j)
        if (e.c[j] != -shift * r.c[j]) return false;
    offset = e.c[0] + shift * r.c[0];
    return true;
}

}  // namespace

// Offsets and powers separate most keys; the slope comparison is the costly one.
bool ExpKeyLess::operator()(const ExpKey& a, const ExpKey& b) const {
    if (const int c = cmp(a.offset, b.offset); c != 0) return c < 0;
    if (a.power != b.power) return a.power < b.power;
    if (const int c = cmp(a.shift, b.shift); c != 0) return c < 0;
    return structurally_less(a.slope, b.slope);
}

// ---------------------------------------------------------------------------
// ExpConst

void ExpConst::add(const ExactComplex& coef, const ExactComplex& exponent) {
    if (coef.is_zero()) return;
    auto [it, inserted] = terms_.try_emplace(exponent, coef);
    if (!inserted) {
        it->second += coef;
        if (it->second.is_zero()) terms_.erase(it);
    }
}

ExpConst& ExpConst::operator+=(const ExpConst& o) {
    for (const auto& [e, c] : o.terms_) add(c, e);
    return *this;
}

ExpConst& ExpConst::operator-=(const ExpConst& o) {
    for (const auto& [e, c] : o.terms_) add(-c, e);
    return *this;
}

ExpLinComb ExpConst::to_lincomb() const {
    ExpLinComb out;
    for (const auto& [e, c] : terms_) out.add_term(c.to_rational(), e.to_rational());
    return out;
}

BigComplex ExpConst::eval_complex(unsigned precision_bits) const {
    BigComplex sum;
    {
        PrecisionScope guard(precision_bits + 32);
        sum = BigComplex{BigFloat(0), BigFloat(0)};
        for (const auto& [e, c] : terms_) sum = sum + to_bigcomplex(c) * exp(to_bigcomplex(e));
    }
    PrecisionScope scope(precision_bits);
    BigComplex out{BigFloat(sum.re), BigFloat(sum.im)};
    out.re.precision(bits_to_digits10(precision_bits));
    out.im.precision(bits_to_digits10(precision_bits));
    return out;
}

BigFloat ExpConst::eval(unsigned precision_bits) const { return eval_complex(precision_bits).re; }

std::string ExpConst::to_string() const {
    if (terms_.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (const auto& [e, c] : terms_) {
        if (!first) os << " + ";
        first = false;
        os << "(" << c.to_string() << ")";
        if (!e.is_zero()) os << "*exp(" << e.to_string() << ")";
    }
    return os.str();
}

// ---------------------------------------------------------------------------
// ExpPoly

ExpPoly ExpPoly::term(ExactComplex coef, unsigned power, ExactComplex slope, Rational shift, Rational offset) {
    ExpPoly p;
    p.add(std::move(coef), power, std::move(slope), std::move(shift), std::move(offset));
    return p;
}

void ExpPoly::add(ExactComplex coef, unsigned power, ExactComplex slope, Rational shift, Rational offset) {
    if (coef.is_zero()) return;
    if (slope.is_rational()) {
        offset -= slope.to_rational() * shift;
        shift = 0;
    }
    offset.canonicalize();
    shift.canonicalize();
    ExpKey key{std::move(slope), std::move(shift), std::move(offset), power};
    auto [it, inserted] = terms_.try_emplace(std::move(key), coef);
    if (!inserted) {
        it->second += coef;
        if (it->second.is_zero()) terms_.erase(it);
    }
}

unsigned ExpPoly::max_power() const {
    unsigned m = 0;
    for (const auto& [k, c] : terms_) m = std::max(m, k.power);
    return m;
}

ExpPoly& ExpPoly::operator+=(const ExpPoly& o) {
    for (const auto& [k, c] : o.terms_) add(c, k.power, k.slope, k.shift, k.offset);
    return *this;
}

ExpPoly& ExpPoly::operator-=(const ExpPoly& o) {
    for (const auto& [k, c] : o.terms_) add(-c, k.power, k.slope, k.shift, k.offset);
    return *this;
}

ExpPoly& ExpPoly::operator*=(const ExactComplex& c) {
    if (c.is_zero()) {
        terms_.clear();
        return *this;
    }
    for (auto& [k, v] : terms_) v *= c;
    return *this;
}

ExpPoly ExpPoly::operator-() const {
    ExpPoly r = *this;
    for (auto& [k, v] : r.terms_) v = -v;
    return r;
}

ExpPoly ExpPoly::derivative() const {
    ExpPoly out;
    for (const auto& [k, c] : terms_) {
        if (k.power > 0) out.add(c * ExactComplex(static_cast<long>(k.power)), k.power - 1, k.slope, k.shift, k.offset);
        if (!k.slope.is_zero()) out.add(c * k.slope, k.power, k.slope, k.shift, k.offset);
    }
    return out;
}

ExpPoly ExpPoly::antiderivative() const {
    ExpPoly out;
    for (const auto& [k, c] : terms_) {
        if (k.slope.is_zero()) {
            out.add(c / ExactComplex(static_cast<long>(k.power + 1)), k.power + 1, k.slope, k.shift, k.offset);
            continue;
        }
        // x^k e^{beta x} integrates to e^{beta x} sum_j (-1)^j k!/(k-j)! x^{k-j} / beta^{j+1}
        ExactComplex inv_beta = ExactComplex(1) / k.slope;
        ExactComplex factor = inv_beta;
        for (unsigned j = 0; j <= k.power; ++j) {
            Rational f = falling_factorial(k.power, j);
            if (j % 2 == 1) f = -f;
            out.add(c * factor * ExactComplex(f), k.power - j, k.slope, k.shift, k.offset);
            factor *= inv_beta;
        }
    }
    return out;
}

ExpPoly ExpPoly::shifted(const Rational& delta) const {
    ExpPoly out;
    for (const auto& [k, c] : terms_) {
        const Rational new_shift = k.shift + delta;
        // (x - delta)^k = sum_j C(k, j) x^j (-delta)^{k-j}
        for (unsigned j = 0; j <= k.power; ++j) {
            const Rational f = binomial(k.power, j) * power_of(Rational(-delta), k.power - j);
            if (f == 0) continue;
            out.add(c * ExactComplex(f), j, k.slope, new_shift, k.offset);
        }
    }
    return out;
}

ExpPoly ExpPoly::times_x_power(unsigned m) const {
    ExpPoly out;
    for (const auto& [k, c] : terms_) out.add(c, k.power + m, k.slope, k.shift, k.offset);
    return out;
}

ExpPoly ExpPoly::times_linear(const Rational& x0) const {
    ExpPoly out = times_x_power(1);
    out -= *this * ExactComplex(x0);
    return out;
}

ExpPoly ExpPoly::transport(const Rational& x0, const ExactComplex& rate) const {
    ExpPoly out;
    for (const auto& [k, c] : terms_) {
        const ExactComplex coef = c * ExactComplex(power_of(x0, k.power));
        // exp(q + beta (x0 - s)) exp(rate (x - x0)) = exp(q' + rate (x - s'))
        const ExactComplex exponent =
            ExactComplex(k.offset) + k.slope * ExactComplex(Rational(x0 - k.shift)) - rate * ExactComplex(x0);
        Rational offset;
        Rational shift;
        if (!rebase(exponent, rate, offset, shift))
            throw Error("not_representable", "cannot rebase exp(" + exponent.to_string() + ") on slope " +
                                                 rate.to_string());
        out.add(coef, 0, rate, shift, offset);
    }
    return out;
}

ExpConst ExpPoly::value_at(const Rational& x0) const {
    ExpConst out;
    for (const auto& [k, c] : terms_) {
        const ExactComplex coef = c * ExactComplex(power_of(x0, k.power));
        const ExactComplex exponent = ExactComplex(k.offset) + k.slope * ExactComplex(Rational(x0 - k.shift));
        out.add(coef, exponent);
    }
    return out;
}

bool ExpPoly::is_real_valued() const {
    for (const auto& [k, c] : terms_) {
        if (k.slope.is_real() && c.is_real()) continue;
        const ExpKey partner{k.slope.conj(), k.shift, k.offset, k.power};
        const auto it = terms_.find(partner);
        if (it == terms_.end() || !(it->second == c.conj())) return false;
    }
    return true;
}

std::string ExpPoly::to_string() const {
    if (terms_.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    auto power_suffix = [](unsigned p) -> std::string {
        if (p == 0) return "";
        if (p == 1) return "*x";
        return "*x^" + std::to_string(p);
    };
    for (const auto& [k, c] : terms_) {
        std::string body;
        if (k.slope.is_real() && c.is_real()) {
            std::string arg;
            if (k.offset != 0) arg = k.offset.get_str();
            if (!k.slope.is_zero()) {
                const std::string lin = k.slope.re() == QuadExt(1) ? "x" : "(" + k.slope.to_string() + ")*x";
                arg = arg.empty() ? lin : arg + " + " + lin;
            }
            body = "(" + c.to_string() + ")";
            if (!arg.empty()) body += "*exp(" + arg + ")";
            body += power_suffix(k.power);
        } else {
            // show conjugate pairs once, from the member with positive imaginary slope
            const ExpKey partner{k.slope.conj(), k.shift, k.offset, k.power};
            const auto it = terms_.find(partner);
            const bool paired = it != terms_.end() && it->second == c.conj() && !k.slope.is_real();
            if (paired && k.slope.im().sign() < 0) continue;
            if (paired) {
                const std::string y = k.shift == 0 ? "x" : "(x - " + k.shift.get_str() + ")";
                const QuadExt cos_coef = QuadExt(2) * c.re();
                const QuadExt sin_coef = QuadExt(-2) * c.im();
                std::string pre = "exp(";
                if (k.offset != 0) pre += k.offset.get_str() + " + ";
                pre += "(" + k.slope.re().to_string() + ")*" + y + ")";
                body = pre + "*[(" + cos_coef.to_string() + ")*cos((" + k.slope.im().to_string() + ")*" + y +
                       ") + (" + sin_coef.to_string() + ")*sin((" + k.slope.im().to_string() + ")*" + y + ")]" +
                       power_suffix(k.power);
            } else {
                body = "(" + c.to_string() + ")*exp(" + (k.offset != 0 ? k.offset.get_str() + " + " : "") + "(" +
                       k.slope.to_string() + ")*(x - " + k.shift.get_str() + "))" + power_suffix(k.power);
            }
        }
        if (!first) os << " + ";
        first = false;
        os << body;
    }
    return os.str();
}

// ---------------------------------------------------------------------------
// NumericExpPoly

NumericExpPoly::NumericExpPoly(const ExpPoly& f, unsigned precision_bits) : bits_(precision_bits) {
    PrecisionScope scope(precision_bits);
    std::map<ExactComplex, std::size_t, StructuralLess> index;
    for (const auto& [k, c] : f.terms()) {
        auto [it, inserted] = index.try_emplace(k.slope, blocks_.size());
        if (inserted) {
            Block b;
            b.real = k.slope.is_real();
            b.slope_re = k.slope.re().eval();
            b.slope_im = k.slope.im().eval();
            blocks_.push_back(std::move(b));
        }
        Block& b = blocks_[it->second];
        if (!c.is_real()) b.real = false;
        if (b.re.size() <= k.power) {
            b.re.resize(k.power + 1, BigFloat(0));
            b.im.resize(k.power + 1, BigFloat(0));
            b.abs_max.resize(k.power + 1, BigFloat(0));
        }
        // factor exp(q - beta s)
        const BigFloat s = to_bigfloat(k.shift);
        BigComplex expo{to_bigfloat(k.offset) - b.slope_re * s, -b.slope_im * s};
        const BigComplex value = to_bigcomplex(c) * exp(expo);
        b.re[k.power] += value.re;
        b.im[k.power] += value.im;
        b.abs_max[k.power] += abs(value);
    }
}

BigFloat NumericExpPoly::eval(const BigFloat& x_in) const {
    PrecisionScope scope(bits_);
    const BigFloat x = with_precision(x_in, bits_);
    BigFloat sum = 0;
    for (const auto& b : blocks_) {
        BigFloat pr = 0;
        BigFloat pi = 0;
        for (std::size_t k = b.re.size(); k-- > 0;) {
            pr = pr * x + b.re[k];
            if (!b.real) pi = pi * x + b.im[k];
        }
        if (b.real) {
            sum += b.slope_re == 0 ? pr : pr * boost::multiprecision::exp(b.slope_re * x);
        } else {
            const BigFloat m = boost::multiprecision::exp(b.slope_re * x);
            const BigFloat ang = b.slope_im * x;
            sum += m * (pr * boost::multiprecision::cos(ang) - pi * boost::multiprecision::sin(ang));
        }
    }
    return sum;
}

BigFloat NumericExpPoly::magnitude(const BigFloat& x_in) const {
    PrecisionScope scope(bits_);
    const BigFloat x = with_precision(x_in, bits_);
    BigFloat total = 0;
    const BigFloat ax = abs(x);
    for (const auto& b : blocks_) {
        BigFloat p = 0;
        for (std::size_t k = b.abs_max.size(); k-- > 0;) p = p * ax + b.abs_max[k];
        total += p * boost::multiprecision::exp(b.slope_re * x);
    }
    return total;
}

// ---------------------------------------------------------------------------
// segment ODE solver

std::vector<ExactComplex> characteristic_roots(const std::vector<Rational>& coeffs) {
    if (coeffs.size() == 1) return {ExactComplex(coeffs[0])};
    if (coeffs.size() != 2) throw Error("invalid_argument", "only first and second order equations are supported");
    // r^2 - c1 r - c0 = 0
    const Rational disc = coeffs[1] * coeffs[1] + 4 * coeffs[0];
    const ExactComplex half_c1(Rational(coeffs[1] / 2));
    ExactComplex root_disc;
    if (disc >= 0) {
        root_disc = ExactComplex(QuadExt::sqrt(disc));
    } else {
        root_disc = ExactComplex(QuadExt(0), QuadExt::sqrt(Rational(-disc)));
    }
    const ExactComplex half(Rational(1, 2));
    return {half_c1 + half * root_disc, half_c1 - half * root_disc};
}

namespace {

ExpPoly particular_solution(const std::vector<Rational>& coeffs, const ExpPoly& forcing) {
    const unsigned m = static_cast<unsigned>(coeffs.size());
    // characteristic polynomial coefficients P[i], p(r) = sum P[i] r^i
    std::vector<Rational> P(m + 1);
    P[m] = 1;
    for (unsigned j = 0; j < m; ++j) P[j] = -coeffs[j];

    // group forcing by exponential factor
    std::map<ExpKey, std::vector<ExactComplex>, ExpKeyLess> groups;
    for (const auto& [k, c] : forcing.terms()) {
        ExpKey g{k.slope, k.shift, k.offset, 0};
        auto& poly = groups[g];
        if (poly.size() <= k.power) poly.resize(k.power + 1);
        poly[k.power] = c;
    }

    ExpPoly out;
    for (const auto& [g, G] : groups) {
        const ExactComplex& beta = g.slope;
        // t_j = p^{(j)}(beta) / j!
        std::vector<ExactComplex> t(m + 1);
        for (unsigned j = 0; j <= m; ++j) {
            ExactComplex sum(0);
            for (unsigned i = j; i <= m; ++i)
                sum += ExactComplex(Rational(P[i] * binomial(i, j))) * power_of(beta, i - j);
            t[j] = sum;
        }
        unsigned j0 = 0;
        while (t[j0].is_zero()) ++j0;
        const std::size_t K = G.size() - 1;
        std::vector<ExactComplex> V(K + 1);
        for (std::size_t kk = K + 1; kk-- > 0;) {
            ExactComplex rhs = G[kk];
            for (unsigned l = 1; j0 + l <= m; ++l) {
                if (kk + l > K) break;
                rhs -= t[j0 + l] * ExactComplex(falling_factorial(static_cast<unsigned>(kk + l), l)) * V[kk + l];
            }
            V[kk] = rhs / t[j0];
        }
        // integrate j0 times
        for (unsigned r = 0; r < j0; ++r) {
            std::vector<ExactComplex> W(V.size() + 1);
            for (std::size_t kk = 0; kk < V.size(); ++kk)
                W[kk + 1] = V[kk] / ExactComplex(static_cast<long>(kk + 1));
            V = std::move(W);
        }
        for (std::size_t kk = 0; kk < V.size(); ++kk)
            out.add(V[kk], static_cast<unsigned>(kk), g.slope, g.shift, g.offset);
    }
    return out;
}

}  // namespace

ExpPoly solve_linear_segment(const std::vector<Rational>& coeffs, const ExpPoly& forcing, const Rational& x0,
                             const std::vector<ExpPoly>& initial) {
    const std::size_t m = coeffs.size();
    if (m < 1 || m > 2) throw Error("invalid_argument", "only first and second order equations are supported");
    if (initial.size() != m) throw Error("invalid_argument", "need one initial value per order");

    const ExpPoly yp = particular_solution(coeffs, forcing);
    const auto roots = characteristic_roots(coeffs);
    ExpPoly y = yp;
    const ExpPoly value_gap = initial[0] - yp;
    if (m == 1) {
        y += value_gap.transport(x0, roots[0]);
        return y;
    }
    const ExpPoly slope_gap = initial[1] - yp.derivative();
    const ExactComplex& r1 = roots[0];
    const ExactComplex& r2 = roots[1];
    if (r1 == r2) {
        y += value_gap.transport(x0, r1);
        y += (slope_gap - value_gap * r1).transport(x0, r1).times_linear(x0);
        return y;
    }
    const ExactComplex inv = ExactComplex(1) / (r1 - r2);
    y += ((slope_gap - value_gap * r2) * inv).transport(x0, r1);
    y += ((value_gap * r1 - slope_gap) * inv).transport(x0, r2);
    return y;
}

}  // namespace mg1
