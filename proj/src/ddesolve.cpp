#include "mg1/ddesolve.hpp"

#include <map>
#include <mutex>
#include <tuple>

namespace mg1 {

std::string to_string(CaseTag tag) {
    switch (tag) {
        case CaseTag::One: return "one";
        case CaseTag::Two: return "two";
        case CaseTag::Three: return "three";
        case CaseTag::MM1: return "mm1";
    }
    return "?";
}

struct WaitingTimeDensity::Cache {
    std::mutex mutex;
    std::map<std::pair<std::size_t, SegmentView>, std::unique_ptr<ExpPoly>> exact;
    std::map<std::tuple<unsigned, std::size_t, SegmentView>, std::unique_ptr<NumericExpPoly>> numeric;
    std::mutex memo_mutex;
    std::map<std::string, std::unique_ptr<std::vector<BigFloat>>> memo;
};

WaitingTimeDensity::WaitingTimeDensity(QueueModel model, CaseTag tag, Rational step, Rational x_max,
                                       std::vector<SegmentFunction> segments)
    : model_(std::move(model)),
      tag_(tag),
      step_(std::move(step)),
      x_max_(std::move(x_max)),
      segments_(std::move(segments)),
      cache_(std::make_shared<Cache>()) {}

std::size_t WaitingTimeDensity::segment_index(const Rational& x) const {
    if (x < 0 || x > x_max_)
        throw Error("out_of_range", "x = " + to_string(x) + " is outside the solved range [0, " + to_string(x_max_) +
                                        "]; rerun with a larger x_max");
    const Rational ratio = x / step_;
    Integer idx;
    mpz_fdiv_q(idx.get_mpz_t(), ratio.get_num_mpz_t(), ratio.get_den_mpz_t());
    return std::min<std::size_t>(idx.get_ui(), segments_.size() - 1);
}

std::size_t WaitingTimeDensity::segment_index(const BigFloat& x) const {
    if (x < 0 || x > to_bigfloat(x_max_))
        throw Error("out_of_range", "x = " + format_float(x, 17) + " is outside the solved range [0, " +
                                        to_string(x_max_) + "]; rerun with a larger x_max");
    const BigFloat ratio = x / to_bigfloat(step_);
    const auto idx = static_cast<std::size_t>(boost::multiprecision::floor(ratio).convert_to<unsigned long>());
    return std::min<std::size_t>(idx, segments_.size() - 1);
}

const ExpPoly& WaitingTimeDensity::exact(std::size_t n, SegmentView view) const {
    const ExpPoly& f = segments_.at(n).f;
    if (view == SegmentView::Value) return f;
    std::lock_guard lock(cache_->mutex);
    auto& slot = cache_->exact[{n, view}];
    if (!slot) {
        ExpPoly g;
        switch (view) {
            case SegmentView::Value: g = f; break;
            case SegmentView::Derivative: g = f.derivative(); break;
            case SegmentView::SecondDerivative: g = f.derivative().derivative(); break;
            case SegmentView::Antiderivative: g = f.antiderivative(); break;
            case SegmentView::FirstMomentAntiderivative: g = f.times_x_power(1).antiderivative(); break;
            case SegmentView::SecondMomentAntiderivative: g = f.times_x_power(2).antiderivative(); break;
        }
        slot = std::make_unique<ExpPoly>(std::move(g));
    }
    return *slot;
}

const NumericExpPoly& WaitingTimeDensity::compiled(std::size_t n, SegmentView view, unsigned precision_bits) const {
    const ExpPoly& g = exact(n, view);
    std::lock_guard lock(cache_->mutex);
    auto& slot = cache_->numeric[{precision_bits, n, view}];
    if (!slot) slot = std::make_unique<NumericExpPoly>(g, precision_bits);
    return *slot;
}

const std::vector<BigFloat>& WaitingTimeDensity::memo(const std::string& key,
                                                     const std::function<std::vector<BigFloat>()>& make) const {
    {
        std::lock_guard lock(cache_->memo_mutex);
        const auto it = cache_->memo.find(key);
        if (it != cache_->memo.end()) return *it->second;
    }
    auto value = std::make_unique<std::vector<BigFloat>>(make());
    std::lock_guard lock(cache_->memo_mutex);
    auto& slot = cache_->memo[key];
    if (!slot) slot = std::move(value);
    return *slot;
}

// ---------------------------------------------------------------------------

ExpConst definite_integral(const ExpPoly& f, const Rational& lo, const Rational& hi) {
    const ExpPoly F = f.antiderivative();
    ExpConst r = F.value_at(hi);
    r -= F.value_at(lo);
    return r;
}

ExpConst integral_from_minus_infinity(const ExpPoly& f, const Rational& hi) {
    for (const auto& [k, c] : f.terms())
        if (k.slope.re().sign() <= 0)
            throw Error("divergent", "integral from -infinity needs slopes with positive real part");
    return f.antiderivative().value_at(hi);
}

namespace {

std::size_t segment_count(const Rational& x_max, const Rational& h, const SolverOptions& options) {
    if (x_max <= 0) throw Error("invalid_argument", "x_max must be positive");
    if (h.get_den() > options.max_grid_denominator)
        throw Error("grid_too_fine", "grid step " + to_string(h) + " exceeds the denominator bound",
                    "max_grid_denominator=" + options.max_grid_denominator.get_str());
    const Rational ratio = x_max / h;
    Integer top;
    mpz_cdiv_q(top.get_mpz_t(), ratio.get_num_mpz_t(), ratio.get_den_mpz_t());
    if (top + 1 > options.max_segments)
        throw Error("too_many_segments", "x_max / h = " + to_string(ratio) + " needs too many segments",
                    "max_segments=" + std::to_string(options.max_segments));
    return top.get_ui() + 1;
}

SegmentFunction make_segment(std::size_t n, const Rational& h, ExpPoly f) {
    return {n, Rational(h * static_cast<unsigned long>(n)), Rational(h * static_cast<unsigned long>(n + 1)),
            std::move(f)};
}

// f(x0) as an exponential polynomial with zero slope.
ExpPoly value_as_constant(const ExpPoly& f, const Rational& x0) { return f.transport(x0, ExactComplex(0)); }

}  // namespace

CaseTag case_of(const QueueModel& model) {
    const auto& s = model.service();
    switch (s.kind) {
        case ServiceKind::Uniform: return s.a == 0 ? CaseTag::Two : CaseTag::One;
        case ServiceKind::Deterministic: return CaseTag::Three;
        case ServiceKind::Exponential: return CaseTag::MM1;
    }
    return CaseTag::MM1;
}

WaitingTimeDensity solve_case_one(const QueueModel& model, const SolverOptions& options) {
    const auto& svc = model.service();
    if (svc.kind != ServiceKind::Uniform || svc.a <= 0)
        throw Error("invalid_argument", "case one needs Uniform[a,b] service with a > 0");
    const Rational& lambda = model.lambda();
    const Rational h = rational_gcd(svc.a, svc.b);
    const std::size_t count = segment_count(options.x_max, h, options);
    const std::size_t A = Rational(svc.a / h).get_num().get_ui();
    const std::size_t B = Rational(svc.b / h).get_num().get_ui();
    const Rational c = lambda / (svc.b - svc.a);

    auto grid = [&h](std::size_t m) { return Rational(h * static_cast<unsigned long>(m)); };

    std::vector<ExpPoly> f;
    std::vector<ExpPoly> F;      // antiderivatives
    std::vector<ExpPoly> lower;  // integral of f_m from -inf (m = 0) or c_m, as a constant
    std::vector<ExpPoly> upper;  // F_m(c_{m+1}) as a constant
    std::vector<ExpPoly> J;      // full-segment integrals

    const ExpPoly f0 = ExpPoly::term(ExactComplex(model.kappa()), 0, ExactComplex(lambda));
    auto push = [&](ExpPoly fn) {
        const std::size_t m = f.size();
        ExpPoly Fm = fn.antiderivative();
        lower.push_back(m == 0 ? ExpPoly() : value_as_constant(Fm, grid(m)));
        upper.push_back(value_as_constant(Fm, grid(m + 1)));
        J.push_back(upper.back() - lower.back());
        F.push_back(std::move(Fm));
        f.push_back(std::move(fn));
    };

    for (std::size_t n = 0; n < count; ++n) {
        if (n < A) {
            push(f0);
            continue;
        }
        // bracket = I_{n-A}(x) + sum J_p + K_{n-B}(x)
        ExpPoly bracket = F[n - A].shifted(svc.a) - lower[n - A];
        const std::size_t p_lo = n + 1 >= B ? n + 1 - B : 0;
        for (std::size_t p = p_lo; p + A < n; ++p) bracket += J[p];
        if (n >= B) bracket += upper[n - B] - F[n - B].shifted(svc.b);
        const ExpPoly forcing = bracket * ExactComplex(Rational(-c));
        push(solve_linear_segment({lambda}, forcing, grid(n), {f[n - 1]}));
    }

    std::vector<SegmentFunction> segs;
    segs.reserve(count);
    for (std::size_t n = 0; n < count; ++n) segs.push_back(make_segment(n, h, std::move(f[n])));
    return {model, CaseTag::One, h, options.x_max, std::move(segs)};
}

WaitingTimeDensity solve_case_two(const QueueModel& model, const SolverOptions& options) {
    const auto& svc = model.service();
    if (svc.kind != ServiceKind::Uniform || svc.a != 0)
        throw Error("invalid_argument", "case two needs Uniform[0,b] service");
    const Rational& lambda = model.lambda();
    const Rational& b = svc.b;
    const std::size_t count = segment_count(options.x_max, b, options);
    const BoundaryValues bv = boundary_values(model);
    const std::vector<Rational> coeffs{Rational(-lambda / b), lambda};

    std::vector<SegmentFunction> segs;
    segs.reserve(count);
    ExpPoly g = solve_linear_segment(coeffs, ExpPoly(), 0,
                                     {ExpPoly::constant(ExactComplex(bv.f0plus)),
                                      ExpPoly::constant(ExactComplex(bv.fprime0plus))});
    segs.push_back(make_segment(0, b, g));
    for (std::size_t n = 1; n < count; ++n) {
        const Rational x0 = b * static_cast<unsigned long>(n);
        const ExpPoly forcing = g.shifted(b) * ExactComplex(Rational(lambda / b));
        ExpPoly slope = g.derivative();
        if (n == 1) slope += ExpPoly::constant(ExactComplex(*bv.corner_jump));
        g = solve_linear_segment(coeffs, forcing, x0, {g, slope});
        segs.push_back(make_segment(n, b, g));
    }
    return {model, CaseTag::Two, b, options.x_max, std::move(segs)};
}

WaitingTimeDensity solve_case_three(const QueueModel& model, const SolverOptions& options) {
    const auto& svc = model.service();
    if (svc.kind != ServiceKind::Deterministic) throw Error("invalid_argument", "case three needs deterministic service");
    const Rational& lambda = model.lambda();
    const Rational& a = svc.a;
    const std::size_t count = segment_count(options.x_max, a, options);
    const BoundaryValues bv = boundary_values(model);

    std::vector<SegmentFunction> segs;
    segs.reserve(count);
    ExpPoly h = ExpPoly::term(ExactComplex(model.kappa()), 0, ExactComplex(lambda));
    segs.push_back(make_segment(0, a, h));
    for (std::size_t n = 1; n < count; ++n) {
        const Rational x0 = a * static_cast<unsigned long>(n);
        const ExpPoly forcing = h.shifted(a) * ExactComplex(Rational(-lambda));
        ExpPoly start = h;
        if (n == 1) start += ExpPoly::constant(ExactComplex(*bv.value_jump));
        h = solve_linear_segment({lambda}, forcing, x0, {start});
        segs.push_back(make_segment(n, a, h));
    }
    return {model, CaseTag::Three, a, options.x_max, std::move(segs)};
}

WaitingTimeDensity solve_mm1(const QueueModel& model, const SolverOptions& options) {
    if (model.service().kind != ServiceKind::Exponential)
        throw Error("invalid_argument", "the closed form needs exponential service");
    if (options.x_max <= 0) throw Error("invalid_argument", "x_max must be positive");
    ExpPoly f = ExpPoly::term(ExactComplex(model.kappa()), 0, ExactComplex(Rational(model.lambda() - model.mu())));
    std::vector<SegmentFunction> segs{{0, 0, options.x_max, std::move(f)}};
    return {model, CaseTag::MM1, options.x_max, options.x_max, std::move(segs)};
}

WaitingTimeDensity solve(const QueueModel& model, const SolverOptions& options) {
    switch (case_of(model)) {
        case CaseTag::One: return solve_case_one(model, options);
        case CaseTag::Two: return solve_case_two(model, options);
        case CaseTag::Three: return solve_case_three(model, options);
        case CaseTag::MM1: return solve_mm1(model, options);
    }
    throw Error("invalid_argument", "unknown service law");
}

ExpPoly erlang_md1(const QueueModel& model, std::size_t n) {
    if (model.service().kind != ServiceKind::Deterministic)
        throw Error("invalid_argument", "Erlang's formula needs deterministic service");
    const Rational& lambda = model.lambda();
    const Rational& a = model.service().a;
    ExpPoly sum;
    Rational coef = 1;  // (-lambda)^m / m!
    for (std::size_t m = 0; m <= n; ++m) {
        const Rational am = a * static_cast<unsigned long>(m);
        ExpPoly t = ExpPoly::term(ExactComplex(coef), 0, ExactComplex(lambda), am);
        for (std::size_t j = 0; j < m; ++j) t = t.times_linear(am);
        sum += t;
        coef *= -lambda;
        coef /= static_cast<unsigned long>(m + 1);
    }
    return sum.derivative() * ExactComplex(model.atom_mass());
}

}  // namespace mg1
