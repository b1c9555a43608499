#pragma once

// Method-of-steps solution of the waiting-time delay differential equations.
//
//   Case One    Uniform[a,b], 0 < a < b   first order, grid h = gcd(a, b)
//   Case Two    Uniform[0,b]              second order, grid h = b
//   Case Three  Deterministic[a]          first order, grid h = a
//   M/M/1       Exponential[mu]           closed form, one segment

#include "mg1/expoly.hpp"
#include "mg1/qmodel.hpp"

#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace mg1 {

enum class CaseTag { One, Two, Three, MM1 };

std::string to_string(CaseTag tag);

struct SolverOptions {
    Rational x_max{4};
    /// Grids whose step has a larger denominator are rejected.
    Integer max_grid_denominator{1000000};
    std::size_t max_segments = 5000;
};

struct SegmentFunction {
    std::size_t index = 0;
    Rational lo;
    Rational hi;
    ExpPoly f;
};

/// Derived exact forms of a segment that the density queries compile.
enum class SegmentView {
    Value,
    Derivative,
    SecondDerivative,
    Antiderivative,        ///< of f
    FirstMomentAntiderivative,   ///< of x f
    SecondMomentAntiderivative,  ///< of x^2 f
};

/// Atom 1 - rho at zero plus piecewise exponential-polynomial density on
/// (0, x_max]; f(x) = f_{floor(x/h)}(x).
class WaitingTimeDensity {
public:
    WaitingTimeDensity(QueueModel model, CaseTag tag, Rational step, Rational x_max,
                       std::vector<SegmentFunction> segments);

    const QueueModel& model() const { return model_; }
    CaseTag tag() const { return tag_; }
    Rational atom_mass() const { return model_.atom_mass(); }
    const Rational& step() const { return step_; }
    const Rational& x_max() const { return x_max_; }
    const std::vector<SegmentFunction>& segments() const { return segments_; }
    const SegmentFunction& segment(std::size_t n) const { return segments_.at(n); }

    /// Index of the segment used at x (right-hand segment at grid points).
    /// Error("out_of_range") outside [0, x_max].
    std::size_t segment_index(const Rational& x) const;
    std::size_t segment_index(const BigFloat& x) const;

    const ExpPoly& exact(std::size_t n, SegmentView view) const;
    /// Compiled numeric form, cached per precision.
    const NumericExpPoly& compiled(std::size_t n, SegmentView view, unsigned precision_bits) const;

    /// Memo slot for derived numeric data (cumulative masses, chosen
    /// precision); `make` runs once per key. Not reentrant for one key.
    const std::vector<BigFloat>& memo(const std::string& key, const std::function<std::vector<BigFloat>()>& make) const;

private:
    struct Cache;

    QueueModel model_;
    CaseTag tag_;
    Rational step_;
    Rational x_max_;
    std::vector<SegmentFunction> segments_;
    std::shared_ptr<Cache> cache_;
};

WaitingTimeDensity solve_case_one(const QueueModel& model, const SolverOptions& options = {});
WaitingTimeDensity solve_case_two(const QueueModel& model, const SolverOptions& options = {});
WaitingTimeDensity solve_case_three(const QueueModel& model, const SolverOptions& options = {});
WaitingTimeDensity solve_mm1(const QueueModel& model, const SolverOptions& options = {});
/// Dispatches on the service law.
WaitingTimeDensity solve(const QueueModel& model, const SolverOptions& options = {});
CaseTag case_of(const QueueModel& model);

/// Erlang's closed form for deterministic service on [n a, (n+1) a]:
/// (1 - rho) d/dx sum_{m<=n} (-lambda)^m (x - a m)^m / m! exp(lambda (x - a m)).
ExpPoly erlang_md1(const QueueModel& model, std::size_t n);

/// Definite integral of an exponential polynomial between rational limits.
ExpConst definite_integral(const ExpPoly& f, const Rational& lo, const Rational& hi);
/// Integral from -infinity; requires every slope to have positive real part.
ExpConst integral_from_minus_infinity(const ExpPoly& f, const Rational& hi);

}  // namespace mg1
