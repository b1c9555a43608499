#include "mg1/density.hpp"

#include <algorithm>
#include <cmath>

namespace mg1 {

namespace {

constexpr unsigned kMaxBits = 16384;

bool agree(const BigFloat& a, const BigFloat& b, int digits) {
    const BigFloat scale = std::max<BigFloat>(abs(b), BigFloat("1e-40"));
    return abs(a - b) <= scale * boost::multiprecision::pow(BigFloat(10), -digits);
}

BigFloat at_bits(const BigFloat& x, unsigned bits) { return with_precision(x, bits); }

// Evaluates `fn(bits)` at P and 2P and doubles P until both agree.
template <class Fn>
BigFloat guarded(Fn&& fn, int digits, unsigned start_bits, unsigned* bits_used) {
    for (unsigned bits = start_bits; bits <= kMaxBits; bits *= 2) {
        const BigFloat lo = fn(bits);
        const BigFloat hi = fn(2 * bits);
        if (agree(lo, hi, digits)) {
            if (bits_used) *bits_used = 2 * bits;
            return hi;
        }
    }
    throw Error("precision_exhausted", "no agreement to " + std::to_string(digits) + " digits below " +
                                           std::to_string(kMaxBits) + " bits");
}

Rational segment_top(const WaitingTimeDensity& d, std::size_t n) {
    return std::min(d.segment(n).hi, d.x_max());
}

// exact cdf at the left end of every segment, and at x_max as the last entry
const std::vector<BigFloat>& cumulative(const WaitingTimeDensity& d, unsigned bits) {
    return d.memo("cumulative:" + std::to_string(bits), [&d, bits] {
        std::vector<BigFloat> out;
        PrecisionScope scope(bits);
        BigFloat acc = to_bigfloat(d.atom_mass());
        out.push_back(acc);
        for (std::size_t n = 0; n < d.segments().size(); ++n) {
            const auto& seg = d.segment(n);
            if (seg.lo >= d.x_max()) break;
            const ExpPoly& F = d.exact(n, SegmentView::Antiderivative);
            ExpConst piece = F.value_at(segment_top(d, n));
            piece -= F.value_at(seg.lo);
            acc += piece.eval(bits);
            out.push_back(acc);
        }
        return out;
    });
}

BigFloat eval_view(const WaitingTimeDensity& d, std::size_t n, SegmentView view, const BigFloat& x, unsigned bits) {
    return d.compiled(n, view, bits).eval(at_bits(x, bits));
}

}  // namespace

std::string to_string(ModeKind kind) {
    switch (kind) {
        case ModeKind::Interior: return "interior";
        case ModeKind::Corner: return "corner";
        case ModeKind::Boundary: return "boundary";
        case ModeKind::LeftLimit: return "left-limit";
    }
    return "?";
}

unsigned working_bits(const WaitingTimeDensity& d, int digits) {
    const auto& memo = d.memo("bits:" + std::to_string(digits), [&d, digits] {
        std::vector<BigFloat> probes;
        {
            PrecisionScope scope(4 * kMaxBits);
            for (std::size_t n = 0; n < d.segments().size(); ++n) {
                const auto& seg = d.segment(n);
                if (seg.lo >= d.x_max()) break;
                const Rational top = segment_top(d, n);
                probes.push_back(to_bigfloat(seg.lo));
                probes.push_back(to_bigfloat(Rational((seg.lo + top) / 2)));
                probes.push_back(to_bigfloat(top));
            }
        }
        for (unsigned bits = kDefaultPrecisionBits; bits <= kMaxBits; bits *= 2) {
            bool ok = true;
            for (std::size_t i = 0; ok && i < probes.size(); ++i) {
                const std::size_t n = i / 3;
                for (SegmentView view : {SegmentView::Value, SegmentView::Antiderivative}) {
                    if (!agree(eval_view(d, n, view, probes[i], bits), eval_view(d, n, view, probes[i], 2 * bits),
                               digits + 3)) {
                        ok = false;
                        break;
                    }
                }
            }
            if (ok) return std::vector<BigFloat>{BigFloat(bits)};
        }
        throw Error("precision_exhausted", "density needs more than " + std::to_string(kMaxBits) + " bits");
    });
    return memo.front().convert_to<unsigned>();
}

BigFloat eval_density(const WaitingTimeDensity& d, const BigFloat& x, int digits, unsigned* bits_used) {
    const std::size_t n = d.segment_index(x);
    return guarded([&](unsigned bits) { return eval_view(d, n, SegmentView::Value, x, bits); }, digits,
                   kDefaultPrecisionBits, bits_used);
}

BigFloat eval_density(const WaitingTimeDensity& d, const Rational& x, int digits, unsigned* bits_used) {
    const std::size_t n = d.segment_index(x);
    return guarded(
        [&](unsigned bits) {
            PrecisionScope scope(bits);
            return eval_view(d, n, SegmentView::Value, to_bigfloat(x), bits);
        },
        digits, kDefaultPrecisionBits, bits_used);
}

ExpConst density_exact(const WaitingTimeDensity& d, const Rational& x) {
    return d.segment(d.segment_index(x)).f.value_at(x);
}

BigFloat eval_density_at(const WaitingTimeDensity& d, const BigFloat& x, unsigned precision_bits) {
    return eval_view(d, d.segment_index(x), SegmentView::Value, x, precision_bits);
}

BigFloat eval_derivative_at(const WaitingTimeDensity& d, const BigFloat& x, unsigned precision_bits) {
    return eval_view(d, d.segment_index(x), SegmentView::Derivative, x, precision_bits);
}

BigFloat eval_density_left(const WaitingTimeDensity& d, const BigFloat& x, unsigned precision_bits) {
    std::size_t n = d.segment_index(x);
    if (n > 0) {
        PrecisionScope scope(precision_bits);
        const BigFloat lo = to_bigfloat(d.segment(n).lo);
        const BigFloat eps = boost::multiprecision::ldexp(BigFloat(1), -static_cast<int>(precision_bits) + 16);
        if (abs(x - lo) <= eps * std::max<BigFloat>(BigFloat(1), abs(x))) --n;
    }
    return eval_view(d, n, SegmentView::Value, x, precision_bits);
}

ExpConst cdf_exact(const WaitingTimeDensity& d, const Rational& x) {
    const std::size_t idx = d.segment_index(x);
    ExpConst out;
    out.add(ExactComplex(d.atom_mass()), ExactComplex(0));
    for (std::size_t n = 0; n <= idx; ++n) {
        const auto& seg = d.segment(n);
        const ExpPoly& F = d.exact(n, SegmentView::Antiderivative);
        out += F.value_at(n == idx ? x : seg.hi);
        out -= F.value_at(seg.lo);
    }
    return out;
}

BigFloat eval_cdf_at(const WaitingTimeDensity& d, const BigFloat& x, unsigned precision_bits) {
    const std::size_t n = d.segment_index(x);
    const auto& cum = cumulative(d, precision_bits);
    PrecisionScope scope(precision_bits);
    const BigFloat lo = to_bigfloat(d.segment(n).lo);
    const auto& F = d.compiled(n, SegmentView::Antiderivative, precision_bits);
    return cum[n] + F.eval(at_bits(x, precision_bits)) - F.eval(lo);
}

BigFloat eval_cdf(const WaitingTimeDensity& d, const BigFloat& x, int digits) {
    if (x == 0) {
        PrecisionScope scope(kDefaultPrecisionBits);
        return to_bigfloat(d.atom_mass());
    }
    d.segment_index(x);
    return guarded([&](unsigned bits) { return eval_cdf_at(d, x, bits); }, digits, working_bits(d, digits),
                   nullptr);
}

BigFloat survival(const WaitingTimeDensity& d, const BigFloat& x, int digits) {
    // 1 - cdf loses the leading digits; ask for extra
    const BigFloat c = eval_cdf(d, x, digits + 8);
    PrecisionScope scope(working_bits(d, digits + 8));
    return BigFloat(1) - c;
}

BigFloat quantile(const WaitingTimeDensity& d, const BigFloat& p, double tolerance) {
    const unsigned bits = working_bits(d, 30);
    PrecisionScope scope(bits);
    if (p <= to_bigfloat(d.atom_mass())) return BigFloat(0);
    const auto& cum = cumulative(d, bits);
    if (p >= cum.back())
        throw Error("out_of_range", "p = " + format_float(p, 17) + " is not below cdf(x_max) = " +
                                        format_float(cum.back(), 17) + "; rerun with a larger x_max");
    std::size_t n = 0;
    while (n + 1 < cum.size() - 1 && cum[n + 1] < p) ++n;
    const auto& F = d.compiled(n, SegmentView::Antiderivative, bits);
    const auto& f = d.compiled(n, SegmentView::Value, bits);
    BigFloat lo = to_bigfloat(d.segment(n).lo);
    BigFloat hi = to_bigfloat(segment_top(d, n));
    const BigFloat base = cum[n] - F.eval(lo);
    auto g = [&](const BigFloat& x) { return base + F.eval(x) - p; };
    const BigFloat tol(tolerance);
    while (hi - lo > tol) {
        const BigFloat mid = (lo + hi) / 2;
        if (g(mid) < 0)
            lo = mid;
        else
            hi = mid;
    }
    BigFloat x = (lo + hi) / 2;
    // Newton polish inside the bracket
    for (int it = 0; it < 8; ++it) {
        const BigFloat fx = f.eval(x);
        if (fx <= 0) break;
        const BigFloat next = x - g(x) / fx;
        if (next < lo || next > hi) break;
        const bool done = abs(next - x) < boost::multiprecision::ldexp(BigFloat(1), -static_cast<int>(bits) + 32);
        x = next;
        if (done) break;
    }
    return x;
}

ModeResult mode(const WaitingTimeDensity& d) {
    const unsigned bits = working_bits(d, 30);
    PrecisionScope scope(bits);
    ModeResult best;
    bool have = false;
    auto offer = [&](const BigFloat& x, const BigFloat& v, ModeKind kind, std::size_t n) {
        if (!have || v > best.value) {
            best = {x, v, kind, n};
            have = true;
        }
    };
    const BigFloat tiny = boost::multiprecision::ldexp(BigFloat(1), -static_cast<int>(bits) + 24);
    constexpr int kSamples = 64;
    for (std::size_t n = 0; n < d.segments().size(); ++n) {
        const auto& seg = d.segment(n);
        if (seg.lo >= d.x_max()) break;
        const Rational top_q = segment_top(d, n);
        const auto& f = d.compiled(n, SegmentView::Value, bits);
        const auto& f1 = d.compiled(n, SegmentView::Derivative, bits);
        const auto& f2 = d.compiled(n, SegmentView::SecondDerivative, bits);
        const BigFloat lo = to_bigfloat(seg.lo);
        const BigFloat top = to_bigfloat(top_q);

        offer(lo, f.eval(lo), n == 0 ? ModeKind::Boundary : ModeKind::Corner, n);
        ModeKind top_kind = ModeKind::Corner;
        if (top_q == seg.hi && n + 1 < d.segments().size() &&
            !(seg.f.value_at(seg.hi) == d.segment(n + 1).f.value_at(seg.hi)))
            top_kind = ModeKind::LeftLimit;
        offer(top, f.eval(top), top_kind, n);

        BigFloat prev_x = lo;
        BigFloat prev_s = f1.eval(lo);
        for (int i = 1; i <= kSamples; ++i) {
            const BigFloat x = lo + (top - lo) * i / kSamples;
            const BigFloat s = f1.eval(x);
            if (prev_s > 0 && s <= 0) {
                BigFloat a = prev_x;
                BigFloat b = x;
                for (int it = 0; it < 60; ++it) {
                    const BigFloat mid = (a + b) / 2;
                    if (f1.eval(mid) > 0)
                        a = mid;
                    else
                        b = mid;
                }
                BigFloat r = (a + b) / 2;
                for (int it = 0; it < 10; ++it) {
                    const BigFloat c = f2.eval(r);
                    if (c == 0) break;
                    const BigFloat step = f1.eval(r) / c;
                    r -= step;
                    if (abs(step) < tiny) break;
                }
                if (r > prev_x && r < x) offer(r, f.eval(r), ModeKind::Interior, n);
            }
            prev_x = x;
            prev_s = s;
        }
    }
    return best;
}

// ---------------------------------------------------------------------------
// tail

BigFloat adjustment_coefficient(const QueueModel& model, unsigned precision_bits) {
    PrecisionScope scope(precision_bits);
    if (model.service().kind == ServiceKind::Exponential) return to_bigfloat(Rational(model.mu() - model.lambda()));
    const BigFloat lambda = to_bigfloat(model.lambda());
    auto phi = [&](const BigFloat& g) { return lambda * (service_mgf(model, g) - 1) - g; };
    auto dphi = [&](const BigFloat& g) { return lambda * service_mgf_derivative(model, g) - 1; };
    BigFloat hi = 1;
    for (int i = 0; phi(hi) <= 0; ++i) {
        if (i > 200) throw Error("no_root", "adjustment coefficient not bracketed");
        hi *= 2;
    }
    BigFloat lo = hi / 2;
    for (int i = 0; phi(lo) >= 0; ++i) {
        if (i > 400) throw Error("no_root", "adjustment coefficient not bracketed");
        lo /= 2;
    }
    for (int it = 0; it < 80; ++it) {
        const BigFloat mid = (lo + hi) / 2;
        if (phi(mid) < 0)
            lo = mid;
        else
            hi = mid;
    }
    BigFloat g = (lo + hi) / 2;
    const BigFloat tiny = boost::multiprecision::ldexp(BigFloat(1), -static_cast<int>(precision_bits) + 8);
    for (int it = 0; it < 20; ++it) {
        const BigFloat step = phi(g) / dphi(g);
        g -= step;
        if (abs(step) < tiny * g) break;
    }
    return g;
}

BigFloat md1_tau(const Rational& rho_q, unsigned precision_bits) {
    PrecisionScope scope(precision_bits);
    if (rho_q <= 0 || rho_q >= 1) throw Error("invalid_argument", "tau needs 0 < rho < 1");
    const BigFloat rho = to_bigfloat(rho_q);
    // g(tau) = ln tau - rho (tau - 1): positive on (1, 1/rho], decreasing beyond
    auto g = [&](const BigFloat& t) { return boost::multiprecision::log(t) - rho * (t - 1); };
    BigFloat lo = 1 / rho;
    BigFloat hi = 2 * lo;
    while (g(hi) >= 0) hi *= 2;
    for (int it = 0; it < 80; ++it) {
        const BigFloat mid = (lo + hi) / 2;
        if (g(mid) > 0)
            lo = mid;
        else
            hi = mid;
    }
    BigFloat t = (lo + hi) / 2;
    const BigFloat tiny = boost::multiprecision::ldexp(BigFloat(1), -static_cast<int>(precision_bits) + 8);
    for (int it = 0; it < 20; ++it) {
        const BigFloat step = g(t) / (1 / t - rho);
        t -= step;
        if (abs(step) < tiny * t) break;
    }
    return t;
}

TailAsymptote tail_asymptote(const WaitingTimeDensity& d) {
    const QueueModel& model = d.model();
    const unsigned bits = kDefaultPrecisionBits;
    TailAsymptote out;
    {
        PrecisionScope scope(bits);
        switch (d.tag()) {
            case CaseTag::MM1:
                out.decay_rate = to_bigfloat(Rational(model.mu() - model.lambda()));
                out.prefactor = to_bigfloat(model.rho());
                out.method = "closed-form";
                return out;
            case CaseTag::Three: {
                const BigFloat tau = md1_tau(model.rho(), bits);
                const BigFloat rho = to_bigfloat(model.rho());
                out.tau = tau;
                out.decay_rate = to_bigfloat(model.lambda()) * (tau - 1);
                out.prefactor = to_bigfloat(model.atom_mass()) / (tau * rho - 1);
                out.method = "deterministic-root";
                break;
            }
            default:
                out.decay_rate = adjustment_coefficient(model, bits);
                out.method = "adjustment-coefficient+least-squares";
                break;
        }
    }
    // least-squares fit of log survival over the last 1.5 time units
    const double x_hi = d.x_max().get_d();
    const double x_lo = std::max(0.0, x_hi - 1.5);
    out.fit_lo = x_lo;
    out.fit_hi = x_hi;
    constexpr int kPoints = 61;
    std::vector<double> xs;
    std::vector<BigFloat> logs;
    const unsigned wb = working_bits(d, 30);
    for (int i = 0; i < kPoints; ++i) {
        const double x = x_lo + (x_hi - x_lo) * i / (kPoints - 1);
        PrecisionScope scope(wb);
        const BigFloat s = BigFloat(1) - eval_cdf_at(d, BigFloat(x), wb);
        if (s <= 0) throw Error("tail_fit", "survival underflow in the fit window");
        xs.push_back(x);
        logs.push_back(boost::multiprecision::log(s));
    }
    PrecisionScope scope(bits);
    BigFloat sx = 0, sy = 0, sxx = 0, sxy = 0;
    BigFloat lo_c = 0, hi_c = 0, mean_c = 0;
    for (int i = 0; i < kPoints; ++i) {
        const BigFloat x(xs[i]);
        sx += x;
        sy += logs[i];
        sxx += x * x;
        sxy += x * logs[i];
        const BigFloat c = logs[i] + out.decay_rate * x;
        mean_c += c;
        if (i == 0 || c < lo_c) lo_c = c;
        if (i == 0 || c > hi_c) hi_c = c;
    }
    const BigFloat n(kPoints);
    const BigFloat slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    out.fitted_rate = -slope;
    out.relative_variation = boost::multiprecision::exp(hi_c - lo_c) - 1;
    if (!out.prefactor) out.prefactor = boost::multiprecision::exp(mean_c / n);
    return out;
}

NumericMoments numeric_moments(const WaitingTimeDensity& d) {
    const unsigned bits = working_bits(d, 30);
    const BigFloat gamma = adjustment_coefficient(d.model(), bits);
    PrecisionScope scope(bits);
    BigFloat m[3] = {0, 0, 0};
    const SegmentView views[3] = {SegmentView::Antiderivative, SegmentView::FirstMomentAntiderivative,
                                  SegmentView::SecondMomentAntiderivative};
    std::size_t last = 0;
    for (std::size_t n = 0; n < d.segments().size(); ++n) {
        const auto& seg = d.segment(n);
        if (seg.lo >= d.x_max()) break;
        last = n;
        for (int k = 0; k < 3; ++k) {
            const ExpPoly& F = d.exact(n, views[k]);
            ExpConst piece = F.value_at(segment_top(d, n));
            piece -= F.value_at(seg.lo);
            m[k] += piece.eval(bits);
        }
    }
    const BigFloat X = to_bigfloat(d.x_max());
    const BigFloat fX = d.compiled(last, SegmentView::Value, bits).eval(X);
    NumericMoments out;
    out.tail_mass = fX / gamma;
    const BigFloat t1 = fX * (X / gamma + 1 / (gamma * gamma));
    const BigFloat t2 = fX * (X * X / gamma + 2 * X / (gamma * gamma) + 2 / (gamma * gamma * gamma));
    out.mass = to_bigfloat(d.atom_mass()) + m[0] + out.tail_mass;
    out.mean = m[1] + t1;
    out.second = m[2] + t2;
    out.variance = out.second - out.mean * out.mean;
    return out;
}

// ---------------------------------------------------------------------------

CdfTable::CdfTable(const WaitingTimeDensity& d, unsigned nodes_per_unit) {
    const unsigned bits = working_bits(d, 20);
    const auto& cum = cumulative(d, bits);
    PrecisionScope scope(bits);
    atom_ = d.atom_mass().get_d();
    x_max_ = d.x_max().get_d();
    for (std::size_t n = 0; n + 1 < cum.size(); ++n) {
        const auto& seg = d.segment(n);
        const Rational top = segment_top(d, n);
        const Rational width = top - seg.lo;
        Rational pieces_q = width * nodes_per_unit;
        Integer pieces;
        mpz_cdiv_q(pieces.get_mpz_t(), pieces_q.get_num_mpz_t(), pieces_q.get_den_mpz_t());
        const unsigned long m = std::max<unsigned long>(1, pieces.get_ui());
        const auto& F = d.compiled(n, SegmentView::Antiderivative, bits);
        const auto& f = d.compiled(n, SegmentView::Value, bits);
        const BigFloat lo = to_bigfloat(seg.lo);
        const BigFloat base = cum[n] - F.eval(lo);
        const BigFloat w = to_bigfloat(width);
        for (unsigned long i = 0; i < m; ++i) {
            const BigFloat a = lo + w * i / m;
            const BigFloat b = lo + w * (i + 1) / m;
            x_.push_back(a.convert_to<double>());
            cdf_.push_back((base + F.eval(a)).convert_to<double>());
            left_density_.push_back(f.eval(a).convert_to<double>());
            right_density_.push_back(f.eval(b).convert_to<double>());
        }
    }
    x_.push_back(x_max_);
    cdf_.push_back(cum.back().convert_to<double>());
    tail_survival_ = (BigFloat(1) - cum.back()).convert_to<double>();
    tail_rate_ = adjustment_coefficient(d.model(), kDefaultPrecisionBits).convert_to<double>();
}

double CdfTable::operator()(double x) const {
    if (x < 0) return 0.0;
    if (x == 0) return atom_;
    if (x >= x_max_) return 1.0 - tail_survival_ * std::exp(-tail_rate_ * (x - x_max_));
    const auto it = std::upper_bound(x_.begin(), x_.end(), x);
    const std::size_t i = static_cast<std::size_t>(it - x_.begin()) - 1;
    const double h = x_[i + 1] - x_[i];
    const double t = (x - x_[i]) / h;
    const double t2 = t * t;
    const double t3 = t2 * t;
    const double h00 = 2 * t3 - 3 * t2 + 1;
    const double h10 = t3 - 2 * t2 + t;
    const double h01 = -2 * t3 + 3 * t2;
    const double h11 = t3 - t2;
    return h00 * cdf_[i] + h10 * h * left_density_[i] + h01 * cdf_[i + 1] + h11 * h * right_density_[i];
}

}  // namespace mg1
