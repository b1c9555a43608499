#include "doctest.h"
#include "helpers.hpp"

#include "mg1/density.hpp"
#include "mg1/oracle.hpp"
#include "mg1/qlen.hpp"

#include <cmath>

using namespace mg1;
using namespace mg1::testing;

namespace {

SimConfig small_config(std::uint64_t customers = 200000) {
    SimConfig cfg;
    cfg.customers = customers;
    cfg.replications = 2;
    return cfg;
}

double exact_p(const QueueModel& m, std::size_t l) {
    return pgf_series(m, l).probabilities[l].eval_stable(15).convert_to<double>();
}

}  // namespace

TEST_CASE("SplitMix64 reference outputs") {
    SplitMix64 g(0);
    CHECK(g.next() == 0xe220a8397b1dcdafULL);
    CHECK(g.next() == 0x6e789e6aa1b965f4ULL);
    CHECK(g.next() == 0x06c45d188009454fULL);
    SplitMix64 a = SplitMix64::stream(42, 3), b = SplitMix64::stream(42, 3), c = SplitMix64::stream(42, 4);
    const auto x = a.next();
    CHECK(x == b.next());
    CHECK(x != c.next());
}

TEST_CASE("uniform and exponential draws") {
    SplitMix64 g(9);
    double sum = 0.0, esum = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double u = g.uniform();
        CHECK_FALSE((u <= 0.0 || u >= 1.0));
        sum += u;
        esum += g.exponential(2.0);
    }
    CHECK(std::abs(sum / n - 0.5) < 5 * std::sqrt(1.0 / 12 / n));
    CHECK(std::abs(esum / n - 0.5) < 5 * 0.5 / std::sqrt(n));
}

TEST_CASE("simulation configuration checks") {
    CHECK_THROWS_AS(QueueModel(0, ServiceDistribution::exponential(3)), Error);
    const QueueModel m = mm1_model();
    SimConfig cfg;
    CHECK_NOTHROW(cfg.validate(m));
    CHECK(cfg.warmup_for(m) == 10000u);
    CHECK(cfg.warmup_for(QueueModel(20, ServiceDistribution::exponential(30))) == 20000u);
    cfg.warmup = cfg.customers;
    CHECK_THROWS_AS(cfg.validate(m), Error);
    cfg.warmup = 0;
    CHECK_NOTHROW(cfg.validate(m));
    cfg.replications = 0;
    CHECK_THROWS_AS(cfg.validate(m), Error);
    cfg.replications = 1;
    cfg.batches = 1;
    CHECK_THROWS_AS(cfg.validate(m), Error);
}

TEST_CASE("waiting-time simulation is reproducible and summarised consistently") {
    const QueueModel m = case_one_model();
    const EmpiricalSummary a = simulate_waiting(m, small_config());
    const EmpiricalSummary b = simulate_waiting(m, small_config());
    CHECK(a.mean == b.mean);
    CHECK(a.replications[1].ks_sample == b.replications[1].ks_sample);
    SimConfig other = small_config();
    other.seed += 1;
    CHECK(simulate_waiting(m, other).mean != a.mean);
    CHECK(a.mean_se > 0);
    for (const auto& r : a.replications) CHECK(r.mean_se > 0);
    double prev = 0.0;
    for (double v : a.cdf_values) {
        CHECK(v >= prev);
        CHECK(v <= 1.0);
        prev = v;
    }
    CHECK(a.cdf_values.back() == 1.0);
    // the atom: the empirical cdf at 0 is near 1 - rho
    CHECK(std::abs(a.cdf_values.front() - 1.0 / 3.0) < 0.02);
}

TEST_CASE("simulated mean waiting times") {
    for (const auto& m : {mm1_model(), case_one_model()}) {
        CAPTURE(m.describe());
        SimConfig cfg;
        cfg.replications = 1;
        const EmpiricalSummary s = simulate_waiting(m, cfg);
        const double mean = wq_moments(m).mean.get_d();
        CHECK(std::abs(s.mean - mean) < 4 * s.mean_se);
    }
}

TEST_CASE("Kolmogorov-Smirnov distance") {
    // samples 0, 0, 1, 2 against a cdf with atom 1/2 at zero and uniform on (0, 4]
    auto cdf = [](double x) { return x < 0 ? 0.0 : std::min(1.0, 0.5 + x / 8); };
    const KsResult r = ks_distance({2, 0, 1, 0}, cdf);
    CHECK(r.n == 4u);
    // jumps: at 0 F_n = 1/2 vs 1/2; at 1: 3/4 vs 5/8; at 2: 1 vs 3/4
    CHECK(r.statistic == doctest::Approx(0.25));
    CHECK(r.band == doctest::Approx(1.63 / 2));

    const QueueModel m = case_one_model();
    const auto d = solve(m);
    const CdfTable right(d);
    const CdfTable wrong(solve(mm1_model()));
    SimConfig cfg;
    cfg.replications = 1;
    const EmpiricalSummary s = simulate_waiting(m, cfg);
    const KsResult good = ks_distance(s.replications[0].ks_sample, [&](double x) { return right(x); });
    const KsResult bad = ks_distance(s.replications[0].ks_sample, [&](double x) { return wrong(x); });
    CHECK(good.within_band());
    CHECK_FALSE(bad.within_band());
    CHECK(bad.statistic > 3 * bad.band);
}

TEST_CASE("simulated number in system") {
    SimConfig cfg;
    cfg.customers = 2000000;
    const SystemLengthSummary u = simulate_system_length(case_one_model(), cfg);
    CHECK(std::abs(u.time_average[0] - 1.0 / 3.0) < 4 * u.time_average_se[0]);
    CHECK(std::abs(u.time_average[1] - 0.289628) < 4 * u.time_average_se[1]);
    // PASTA: arrivals see time averages
    CHECK(std::abs(u.arrival_average[1] - u.time_average[1]) <
          4 * std::hypot(u.arrival_average_se[1], u.time_average_se[1]));
    double total = 0.0;
    for (double p : u.time_average) total += p;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(u.horizon > 0.9e6);

    const SystemLengthSummary dd = simulate_system_length(case_three_model(), cfg);
    CHECK(std::abs(dd.time_average[1] - 0.315911) < 4 * dd.time_average_se[1]);
    CHECK(std::abs(dd.time_average[2] - exact_p(case_three_model(), 2)) < 4 * dd.time_average_se[2]);
    for (double se : dd.time_average_se) CHECK(se >= 0);
    CHECK(dd.time_average_se[0] > 0);
}

TEST_CASE("numerical Laplace inversion") {
    const QueueModel one = case_one_model();
    const auto d = solve(one);
    const auto r = invert_laplace(one, {0.25}, 1e-6);
    CHECK_FALSE(r[0].flagged);
    CHECK(r[0].error_estimate <= 1e-6);
    CHECK(std::abs(r[0].value - eval_density(d, BigFloat("0.25")).convert_to<double>()) < 1e-6);

    // 2/3 exp(-x) at x = 1/2
    const auto mm = invert_laplace(mm1_model(), {0.5, 1.5, 3.0}, 1e-8);
    for (const auto& e : mm) {
        CAPTURE(e.x);
        CHECK(std::abs(e.value - 2.0 / 3.0 * std::exp(-e.x)) < 1e-8);
        CHECK_FALSE(e.flagged);
    }

    try {
        invert_laplace(case_three_model(), {1.0 / 3.0}, 1e-6);
        FAIL("expected the jump guard");
    } catch (const Error& e) {
        CHECK(e.code() == "near_jump");
    }
    CHECK_NOTHROW(invert_laplace(case_three_model(), {1.0 / 3.0 + 1e-4}, 1e-6));
    CHECK_THROWS_AS(invert_laplace(one, {0.0}, 1e-6), Error);
    // an unreachable tolerance is flagged, not hidden
    const auto tight = invert_laplace(one, {0.5}, 1e-14);
    CHECK(tight[0].flagged);
    CHECK(inversion_method_description({}).find("Fourier") != std::string::npos);
}
