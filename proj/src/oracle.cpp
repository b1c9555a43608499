#include "mg1/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numbers>
#include <sstream>

namespace mg1 {

std::uint64_t SplitMix64::mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

SplitMix64 SplitMix64::stream(std::uint64_t seed, std::uint64_t stream_id) {
    return SplitMix64(mix(seed ^ mix(stream_id + 1)));
}

std::uint64_t SplitMix64::next() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix(state_);
}

double SplitMix64::uniform() { return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53; }

double SplitMix64::exponential(double rate) { return -std::log(uniform()) / rate; }

double sample_service(const QueueModel& model, SplitMix64& rng) {
    const auto& s = model.service();
    switch (s.kind) {
        case ServiceKind::Uniform: {
            const double a = s.a.get_d();
            return a + (s.b.get_d() - a) * rng.uniform();
        }
        case ServiceKind::Deterministic:
            return s.a.get_d();
        case ServiceKind::Exponential:
            return rng.exponential(s.rate.get_d());
    }
    return 0.0;
}

std::uint64_t SimConfig::warmup_for(const QueueModel& model) const {
    if (warmup) return *warmup;
    const double by_time = 1000.0 * model.lambda().get_d();
    return static_cast<std::uint64_t>(std::max(1e4, std::ceil(by_time)));
}

void SimConfig::validate(const QueueModel& model) const {
    if (model.lambda() <= 0) throw Error("invalid_argument", "simulation needs lambda > 0");
    if (replications < 1) throw Error("invalid_argument", "replications must be at least 1");
    if (customers == 0) throw Error("invalid_argument", "customers must be positive");
    if (warmup && *warmup >= customers)
        throw Error("invalid_argument", "warmup must be smaller than customers",
                    "warmup=" + std::to_string(*warmup) + " customers=" + std::to_string(customers));
    if (batches < 2 || batches > customers) throw Error("invalid_argument", "batches must be in [2, customers]");
    if (ks_thin < 1) throw Error("invalid_argument", "ks_thin must be at least 1");
}

KsResult ks_distance(std::vector<double> samples, const std::function<double(double)>& cdf) {
    KsResult out;
    out.n = samples.size();
    if (samples.empty()) return out;
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double d = 0.0;
    std::size_t i = 0;
    while (i < samples.size()) {
        std::size_t j = i;
        while (j < samples.size() && samples[j] == samples[i]) ++j;
        const double v = samples[i];
        const double below = static_cast<double>(i) / n;
        const double upto = static_cast<double>(j) / n;
        const double F = cdf(v);
        // left limit of the analytic cdf: only the atom at zero is a jump
        const double Fminus = v <= 0.0 ? 0.0 : F;
        d = std::max({d, std::abs(upto - F), std::abs(below - Fminus)});
        i = j;
    }
    out.statistic = d;
    out.band = 1.63 / std::sqrt(n);
    return out;
}

namespace {

struct Moments {
    double mean = 0.0, variance = 0.0, se = 0.0;
};

Moments batch_moments(const std::vector<double>& batch_sums, const std::vector<double>& batch_sq, std::uint64_t per_batch) {
    const double B = static_cast<double>(batch_sums.size());
    const double N = B * static_cast<double>(per_batch);
    double s = 0.0, sq = 0.0;
    for (std::size_t i = 0; i < batch_sums.size(); ++i) {
        s += batch_sums[i];
        sq += batch_sq[i];
    }
    Moments m;
    m.mean = s / N;
    m.variance = (sq - N * m.mean * m.mean) / (N - 1);
    double v = 0.0;
    for (double bs : batch_sums) {
        const double bm = bs / static_cast<double>(per_batch);
        v += (bm - m.mean) * (bm - m.mean);
    }
    m.se = std::sqrt(v / (B - 1) / B);
    return m;
}

}  // namespace

EmpiricalSummary simulate_waiting(const QueueModel& model, const SimConfig& cfg) {
    cfg.validate(model);
    const std::uint64_t warm = cfg.warmup_for(model);
    const double lambda = model.lambda().get_d();
    const std::uint64_t per_batch = cfg.customers / cfg.batches;
    EmpiricalSummary out;
    double pooled_sum = 0.0, pooled_var = 0.0, pooled_se2 = 0.0;
    std::vector<double> all_ks;
    for (std::uint64_t r = 0; r < cfg.replications; ++r) {
        SplitMix64 rng = SplitMix64::stream(cfg.seed, r);
        double w = 0.0;
        for (std::uint64_t k = 0; k < warm; ++k) w = std::max(w + sample_service(model, rng) - rng.exponential(lambda), 0.0);
        std::vector<double> sums(cfg.batches, 0.0), sq(cfg.batches, 0.0);
        ReplicationSummary rep;
        rep.index = r;
        rep.ks_sample.reserve(cfg.customers / cfg.ks_thin + 1);
        const std::uint64_t used = per_batch * cfg.batches;
        for (std::uint64_t k = 0; k < used; ++k) {
            const std::size_t b = k / per_batch;
            sums[b] += w;
            sq[b] += w * w;
            if (k % cfg.ks_thin == 0) rep.ks_sample.push_back(w);
            w = std::max(w + sample_service(model, rng) - rng.exponential(lambda), 0.0);
        }
        const Moments m = batch_moments(sums, sq, per_batch);
        rep.mean = m.mean;
        rep.variance = m.variance;
        rep.mean_se = m.se;
        pooled_sum += m.mean;
        pooled_var += m.variance;
        pooled_se2 += m.se * m.se;
        all_ks.insert(all_ks.end(), rep.ks_sample.begin(), rep.ks_sample.end());
        out.replications.push_back(std::move(rep));
    }
    const double R = static_cast<double>(cfg.replications);
    out.mean = pooled_sum / R;
    out.variance = pooled_var / R;
    out.mean_se = std::sqrt(pooled_se2) / R;
    std::sort(all_ks.begin(), all_ks.end());
    const double top = all_ks.empty() ? 0.0 : all_ks.back();
    const std::size_t grid = 101;
    for (std::size_t i = 0; i < grid; ++i) {
        const double x = top * static_cast<double>(i) / static_cast<double>(grid - 1);
        const auto it = std::upper_bound(all_ks.begin(), all_ks.end(), x);
        out.cdf_grid.push_back(x);
        out.cdf_values.push_back(all_ks.empty() ? 0.0
                                                : static_cast<double>(it - all_ks.begin()) / static_cast<double>(all_ks.size()));
    }
    return out;
}

SystemLengthSummary simulate_system_length(const QueueModel& model, const SimConfig& cfg, std::size_t max_level,
                                           std::uint64_t replication) {
    cfg.validate(model);
    const std::uint64_t warm = cfg.warmup_for(model);
    const double lambda = model.lambda().get_d();
    const std::uint64_t per_batch = cfg.customers / cfg.batches;
    const std::uint64_t total = warm + per_batch * cfg.batches;
    const std::size_t levels = max_level + 1;
    SplitMix64 rng = SplitMix64::stream(cfg.seed ^ 0x5157ULL, replication);

    std::vector<std::vector<double>> time_in(cfg.batches, std::vector<double>(levels, 0.0));
    std::vector<std::vector<double>> seen(cfg.batches, std::vector<double>(levels, 0.0));
    std::vector<double> batch_time(cfg.batches, 0.0);

    std::deque<double> departures;
    double t = 0.0;
    double next_arrival = rng.exponential(lambda);
    double last_departure = 0.0;
    std::uint64_t arrivals = 0;
    std::size_t in_system = 0;
    double horizon = 0.0;
    while (arrivals < total) {
        const bool arrival = departures.empty() || next_arrival < departures.front();
        const double event = arrival ? next_arrival : departures.front();
        if (arrivals >= warm) {
            const std::size_t b = std::min<std::uint64_t>((arrivals - warm) / per_batch, cfg.batches - 1);
            time_in[b][std::min(in_system, max_level)] += event - t;
            batch_time[b] += event - t;
            horizon += event - t;
        }
        t = event;
        if (arrival) {
            if (arrivals >= warm) {
                const std::size_t b = (arrivals - warm) / per_batch;
                seen[b][std::min(in_system, max_level)] += 1.0;
            }
            const double start = in_system == 0 ? t : last_departure;
            last_departure = start + sample_service(model, rng);
            departures.push_back(last_departure);
            ++in_system;
            ++arrivals;
            next_arrival = t + rng.exponential(lambda);
        } else {
            departures.pop_front();
            --in_system;
        }
    }

    SystemLengthSummary out;
    out.horizon = horizon;
    const double B = static_cast<double>(cfg.batches);
    for (std::size_t l = 0; l < levels; ++l) {
        double tm = 0.0, tv = 0.0, am = 0.0, av = 0.0;
        for (std::size_t b = 0; b < cfg.batches; ++b) {
            tm += time_in[b][l] / batch_time[b];
            am += seen[b][l] / static_cast<double>(per_batch);
        }
        tm /= B;
        am /= B;
        for (std::size_t b = 0; b < cfg.batches; ++b) {
            const double x = time_in[b][l] / batch_time[b] - tm;
            const double y = seen[b][l] / static_cast<double>(per_batch) - am;
            tv += x * x;
            av += y * y;
        }
        out.time_average.push_back(tm);
        out.time_average_se.push_back(std::sqrt(tv / (B - 1) / B));
        out.arrival_average.push_back(am);
        out.arrival_average_se.push_back(std::sqrt(av / (B - 1) / B));
    }
    return out;
}

std::string inversion_method_description(const InversionSettings& s) {
    std::ostringstream os;
    os << "Fourier-series Laplace inversion (damped trapezoidal Bromwich rule, Abate-Whitt form) with exponential "
          "spectral filter exp(-alpha (k/K)^p); A="
       << s.damping << " K=" << s.terms << " p=" << s.filter_order << " alpha=" << s.filter_strength
       << "; error estimate |I_K - I_{K/2}| + exp(-A)";
    return os.str();
}

namespace {

double filtered_sum(const std::function<std::complex<double>(std::complex<double>)>& transform, double x, double A,
                    std::size_t K, double p, double alpha) {
    const double pi = std::numbers::pi;
    const double scale = std::exp(A / 2.0) / x;
    // compensated summation; terms alternate and decay slowly
    double sum = 0.5 * transform({A / (2.0 * x), 0.0}).real();
    double comp = 0.0;
    for (std::size_t k = 1; k <= K; ++k) {
        const double eta = static_cast<double>(k) / static_cast<double>(K);
        const double sigma = std::exp(-alpha * std::pow(eta, p));
        const std::complex<double> s{A / (2.0 * x), static_cast<double>(k) * pi / x};
        double term = sigma * transform(s).real();
        if (k % 2 == 1) term = -term;
        const double y = term - comp;
        const double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    return scale * sum;
}

}  // namespace

double invert_transform(const std::function<std::complex<double>(std::complex<double>)>& transform, double x,
                        const InversionSettings& settings) {
    return filtered_sum(transform, x, settings.damping, settings.terms, settings.filter_order, settings.filter_strength);
}

std::vector<InversionResult> invert_laplace(const QueueModel& model, const std::vector<double>& xs, double target_tol,
                                            const InversionSettings& settings) {
    const auto& svc = model.service();
    std::vector<double> jumps;
    if (svc.kind == ServiceKind::Deterministic) jumps.push_back(svc.a.get_d());
    for (double x : xs) {
        if (!(x > 0.0)) throw Error("invalid_argument", "inversion needs x > 0", "x=" + std::to_string(x));
        for (double j : jumps)
            if (std::abs(x - j) < 10.0 * target_tol)
                throw Error("near_jump", "x lies within 10 * target_tol of a density jump",
                            "x=" + std::to_string(x) + " jump=" + std::to_string(j));
    }
    const double lambda = model.lambda().get_d();
    const double atom = model.atom_mass().get_d();
    // (1 - rho) lambda (1 - Theta) / (s - lambda + lambda Theta), free of the
    // cancellation in F(s) - (1 - rho) for large |s|
    auto Falt = [&](std::complex<double> s) {
        const std::complex<double> th = service_transform(model, s);
        return atom * lambda * (1.0 - th) / (s - lambda + lambda * th);
    };
    std::vector<InversionResult> out;
    for (double x : xs) {
        InversionResult r;
        r.x = x;
        r.value = invert_transform(Falt, x, settings);
        InversionSettings half = settings;
        half.terms = std::max<std::size_t>(settings.terms / 2, 1);
        const double coarse = invert_transform(Falt, x, half);
        r.error_estimate = std::abs(r.value - coarse) + std::exp(-settings.damping);
        r.flagged = r.error_estimate > target_tol;
        out.push_back(r);
    }
    return out;
}

}  // namespace mg1
