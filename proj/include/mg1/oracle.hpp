#pragma once

// Independent checks on the analytic results: Lindley-recursion and
// event-driven simulation, Kolmogorov-Smirnov distance and numerical
// Laplace inversion of the waiting-time transform.

#include "mg1/qmodel.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace mg1 {

/// SplitMix64 (Steele, Lea, Flood). Stream `s` of seed `k` starts from state
/// mix(k ^ mix(s + 1)), so replications draw from disjoint-looking sequences.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t state) : state_(state) {}
    static SplitMix64 stream(std::uint64_t seed, std::uint64_t stream_id);
    static std::uint64_t mix(std::uint64_t z);

    std::uint64_t next();
    /// Uniform on (0, 1), never 0 or 1.
    double uniform();
    double exponential(double rate);

private:
    std::uint64_t state_;
};

/// One service time from the model's service law.
double sample_service(const QueueModel& model, SplitMix64& rng);

struct SimConfig {
    std::uint64_t seed = 20240601;
    std::uint64_t customers = 1000000;
    /// Defaults to max(1e4 customers, 1e3 time units of arrivals).
    std::optional<std::uint64_t> warmup;
    std::uint64_t replications = 8;
    /// Every thin-th waiting time enters the KS sample.
    std::uint64_t ks_thin = 100;
    std::uint64_t batches = 50;

    std::uint64_t warmup_for(const QueueModel& model) const;
    /// Error("invalid_argument") on inconsistent settings.
    void validate(const QueueModel& model) const;
};

struct KsResult {
    double statistic = 0.0;
    std::size_t n = 0;
    double band = 0.0;  ///< 1.63 / sqrt(n), the asymptotic 99% level
    bool within_band() const { return statistic < band; }
};

/// sup |F_n - F| over the jumps of the empirical CDF, both one-sided limits
/// included; `cdf` must be right-continuous and may have an atom at 0.
KsResult ks_distance(std::vector<double> samples, const std::function<double(double)>& cdf);

struct ReplicationSummary {
    std::uint64_t index = 0;
    double mean = 0.0;
    double variance = 0.0;
    double mean_se = 0.0;  ///< batch means
    std::vector<double> ks_sample;
};

struct EmpiricalSummary {
    std::vector<ReplicationSummary> replications;
    double mean = 0.0;
    double variance = 0.0;
    double mean_se = 0.0;
    std::vector<double> cdf_grid;
    std::vector<double> cdf_values;  ///< pooled over the KS samples
};

/// W_{k+1} = max(W_k + S_k - A_k, 0) from W_0 = 0, warmup discarded.
EmpiricalSummary simulate_waiting(const QueueModel& model, const SimConfig& cfg);

struct SystemLengthSummary {
    std::vector<double> time_average;  ///< P{L = l}, l = 0..max_level (last bucket is >= max_level)
    std::vector<double> time_average_se;
    std::vector<double> arrival_average;  ///< seen by arrivals
    std::vector<double> arrival_average_se;
    double horizon = 0.0;
};

/// Event-driven FIFO single-server queue; time in each state after warmup.
SystemLengthSummary simulate_system_length(const QueueModel& model, const SimConfig& cfg, std::size_t max_level = 40,
                                           std::uint64_t replication = 0);

struct InversionSettings {
    double damping = 24.0;        ///< A; aliasing error about exp(-A)
    std::size_t terms = 32768;    ///< series length K
    double filter_order = 8.0;    ///< p in exp(-alpha (k/K)^p)
    double filter_strength = 36.0;  ///< alpha
};

struct InversionResult {
    double x = 0.0;
    double value = 0.0;
    double error_estimate = 0.0;
    bool flagged = false;  ///< error estimate above the target tolerance
};

std::string inversion_method_description(const InversionSettings& s);

/// Inverts F_alt(s) = F(s) - (1 - rho), the transform of the continuous part
/// of the waiting-time law. Fourier-series (damped trapezoidal Bromwich) sum
/// with an exponential spectral filter; the error estimate compares K and
/// K/2 terms. Error("near_jump") for x within 10 * target_tol of a density
/// jump.
std::vector<InversionResult> invert_laplace(const QueueModel& model, const std::vector<double>& xs,
                                            double target_tol, const InversionSettings& settings = {});

/// Same method for an arbitrary transform.
double invert_transform(const std::function<std::complex<double>(std::complex<double>)>& transform, double x,
                        const InversionSettings& settings);

}  // namespace mg1
