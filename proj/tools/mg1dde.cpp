// mg1dde: waiting-time densities, queue lengths and checks for M/G/1 queues
// with uniform, deterministic or exponential service.

#include "mg1/acceptance.hpp"
#include "mg1/density.hpp"
#include "mg1/oracle.hpp"
#include "mg1/qlen.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

using json = nlohmann::ordered_json;
using namespace mg1;

namespace {

struct Options {
    std::string lambda = "2";
    std::vector<std::string> uniform;
    std::string deterministic;
    std::string exponential;
    std::string x_max = "4";
    int digits = 15;
    std::uint64_t seed = 20240601;
    std::string out;
    std::string sidecar;
    std::string format;
    std::string step = "1/240";
    std::vector<std::string> xs;
    std::vector<std::string> ps;
    std::size_t levels = 10;
    std::uint64_t customers = 1000000;
    std::uint64_t replications = 8;
    std::optional<std::uint64_t> warmup;
    std::vector<int> only;
};

constexpr std::size_t kMaxLevels = 200;

std::string fmt(const BigFloat& v, int digits) { return format_float(v, digits); }

QueueModel build_model(const Options& o) {
    const Rational lambda = parse_rational(o.lambda);
    const int given = (o.uniform.empty() ? 0 : 1) + (o.deterministic.empty() ? 0 : 1) + (o.exponential.empty() ? 0 : 1);
    if (given != 1)
        throw Error("invalid_argument", "exactly one of --uniform, --deterministic, --exponential is required");
    if (!o.uniform.empty())
        return {lambda, ServiceDistribution::uniform(parse_rational(o.uniform[0]), parse_rational(o.uniform[1]))};
    if (!o.deterministic.empty()) return {lambda, ServiceDistribution::deterministic(parse_rational(o.deterministic))};
    return {lambda, ServiceDistribution::exponential(parse_rational(o.exponential))};
}

json exact_approx(const std::string& exact, const BigFloat& v, int digits) {
    return {{"exact", exact}, {"approx", fmt(v, digits)}};
}

json exact_approx(const Rational& r, int digits) {
    PrecisionScope scope(kDefaultPrecisionBits);
    return exact_approx(to_string(r), to_bigfloat(r), digits);
}

json model_json(const QueueModel& m) {
    const auto& s = m.service();
    json svc = {{"kind", to_string(s.kind)}};
    switch (s.kind) {
        case ServiceKind::Uniform:
            svc["a"] = to_string(s.a);
            svc["b"] = to_string(s.b);
            break;
        case ServiceKind::Deterministic: svc["a"] = to_string(s.a); break;
        case ServiceKind::Exponential: svc["mu"] = to_string(s.rate); break;
    }
    return {{"lambda", to_string(m.lambda())}, {"service", svc}, {"rho", to_string(m.rho())}};
}

json metadata(const std::string& command, const QueueModel& m, const Options& o) {
    return {{"tool", "mg1dde"},
            {"version", MG1_VERSION},
            {"command", command},
            {"model", model_json(m)},
            {"case", to_string(case_of(m))},
            {"precision_digits", o.digits}};
}

void emit(const std::string& text, const std::string& path) {
    if (path.empty() || path == "-") {
        std::cout << text;
        if (!text.empty() && text.back() != '\n') std::cout << '\n';
        return;
    }
    std::ofstream f(path);
    if (!f) throw Error("io_error", "cannot write output file", path);
    f << text;
    if (!text.empty() && text.back() != '\n') f << '\n';
}

WaitingTimeDensity solve_for(const QueueModel& m, const Options& o) {
    SolverOptions so;
    so.x_max = parse_rational(o.x_max);
    if (so.x_max <= 0) throw Error("invalid_argument", "--xmax must be positive", o.x_max);
    return solve(m, so);
}

struct DensityRow {
    Rational x;
    std::string value;
    std::string side;  ///< "", "left" or "right" at a jump
};

// x on k * step, k = 1.., up to x_max; both one-sided values at the jump
std::vector<DensityRow> density_rows(const WaitingTimeDensity& d, const Rational& step, int digits) {
    if (step <= 0) throw Error("invalid_argument", "--step must be positive", to_string(step));
    const std::optional<Rational> jump = d.model().service().kind == ServiceKind::Deterministic
                                             ? std::optional<Rational>(d.model().service().a)
                                             : std::nullopt;
    const unsigned bits = 2 * working_bits(d, digits);
    std::vector<DensityRow> rows;
    for (long k = 1;; ++k) {
        const Rational x = step * k;
        if (x > d.x_max()) break;
        if (jump && x == *jump) {
            PrecisionScope scope(bits);
            rows.push_back({x, fmt(eval_density_left(d, to_bigfloat(x), bits), digits), "left"});
            rows.push_back({x, fmt(eval_density(d, x, digits), digits), "right"});
            continue;
        }
        rows.push_back({x, fmt(eval_density(d, x, digits), digits), ""});
    }
    return rows;
}

std::string rows_csv(const std::vector<DensityRow>& rows, int digits) {
    std::ostringstream os;
    os << "x,density\n";
    PrecisionScope scope(kDefaultPrecisionBits);
    for (const auto& r : rows) os << fmt(to_bigfloat(r.x), digits) << ',' << r.value << '\n';
    return os.str();
}

json density_meta(const WaitingTimeDensity& d, const Options& o, const Rational& step, std::size_t rows) {
    json meta = metadata("density", d.model(), o);
    meta["x_max"] = to_string(d.x_max());
    meta["step"] = to_string(step);
    meta["atom"] = exact_approx(d.atom_mass(), o.digits);
    meta["segment_width"] = to_string(d.step());
    meta["rows"] = rows;
    json jumps = json::array();
    if (d.model().service().kind == ServiceKind::Deterministic) jumps.push_back(to_string(d.model().service().a));
    meta["jumps"] = jumps;
    return meta;
}

// writes the CSV (or JSON) and its sidecar
void write_density(const WaitingTimeDensity& d, const Options& o, const std::string& out, const std::string& sidecar) {
    const Rational step = parse_rational(o.step);
    const auto rows = density_rows(d, step, o.digits);
    json meta = density_meta(d, o, step, rows.size());
    if (o.format == "json") {
        json pts = json::array();
        PrecisionScope scope(kDefaultPrecisionBits);
        for (const auto& r : rows) {
            json p = {{"x", to_string(r.x)}, {"x_approx", fmt(to_bigfloat(r.x), o.digits)}, {"density", r.value}};
            if (!r.side.empty()) p["side"] = r.side;
            pts.push_back(p);
        }
        meta["points"] = pts;
        emit(meta.dump(2), out);
        return;
    }
    emit(rows_csv(rows, o.digits), out);
    const std::string side = !sidecar.empty() ? sidecar : (out.empty() || out == "-" ? "" : out + ".json");
    if (!side.empty()) emit(meta.dump(2), side);
}

int cmd_density(const Options& o) {
    const QueueModel m = build_model(o);
    write_density(solve_for(m, o), o, o.out, o.sidecar);
    return 0;
}

int cmd_cdf(const Options& o) {
    const QueueModel m = build_model(o);
    const auto d = solve_for(m, o);
    json out = metadata("cdf", m, o);
    json values = json::array();
    for (const auto& s : o.xs) {
        const Rational x = parse_rational(s);
        PrecisionScope scope(kDefaultPrecisionBits);
        const BigFloat v = eval_cdf(d, to_bigfloat(x), o.digits);
        values.push_back({{"x", to_string(x)}, {"cdf", exact_approx(cdf_exact(d, x).to_string(), v, o.digits)}});
    }
    out["values"] = values;
    emit(out.dump(2), o.out);
    return 0;
}

int cmd_quantile(const Options& o) {
    const QueueModel m = build_model(o);
    const auto d = solve_for(m, o);
    json out = metadata("quantile", m, o);
    json values = json::array();
    const double tol = std::max(1e-300, std::pow(10.0, -(o.digits + 2)));
    for (const auto& s : o.ps) {
        const Rational p = parse_rational(s);
        if (p <= 0 || p >= 1) throw Error("invalid_argument", "p must lie in (0, 1)", s);
        PrecisionScope scope(kDefaultPrecisionBits);
        const BigFloat q = quantile(d, to_bigfloat(p), tol);
        values.push_back({{"p", to_string(p)}, {"quantile", fmt(q, o.digits)}, {"at_atom", p <= d.atom_mass()}});
    }
    out["values"] = values;
    emit(out.dump(2), o.out);
    return 0;
}

int cmd_mode(const Options& o) {
    const QueueModel m = build_model(o);
    const auto d = solve_for(m, o);
    const ModeResult r = mode(d);
    json out = metadata("mode", m, o);
    out["mode"] = {{"x", fmt(r.x, o.digits)},
                   {"density", fmt(r.value, o.digits)},
                   {"kind", to_string(r.kind)},
                   {"segment", r.segment}};
    emit(out.dump(2), o.out);
    return 0;
}

int cmd_moments(const Options& o) {
    const QueueModel m = build_model(o);
    const auto d = solve_for(m, o);
    const WaitMoments w = wq_moments(m);
    const NumericMoments n = numeric_moments(d);
    json out = metadata("moments", m, o);
    out["x_max"] = to_string(d.x_max());
    out["mean"] = exact_approx(w.mean, o.digits);
    out["variance"] = exact_approx(w.variance, o.digits);
    out["integrated"] = {{"mass", fmt(n.mass, o.digits)},
                         {"mean", fmt(n.mean, o.digits)},
                         {"variance", fmt(n.variance, o.digits)},
                         {"tail_mass", fmt(n.tail_mass, o.digits)}};
    const ServiceMoments s = service_moments(m);
    out["service"] = {{"mean", to_string(s.mean)}, {"second", to_string(s.xi)}, {"third", to_string(s.eta)},
                      {"variance", to_string(s.sigma2)}};
    emit(out.dump(2), o.out);
    return 0;
}

int cmd_tail(const Options& o) {
    const QueueModel m = build_model(o);
    const auto d = solve_for(m, o);
    const TailAsymptote t = tail_asymptote(d);
    json out = metadata("tail", m, o);
    json tail = {{"decay_rate", fmt(t.decay_rate, o.digits)}, {"method", t.method}};
    if (t.prefactor) tail["prefactor"] = fmt(*t.prefactor, o.digits);
    if (t.tau) tail["tau"] = fmt(*t.tau, o.digits);
    if (t.fitted_rate) tail["fitted_rate"] = fmt(*t.fitted_rate, o.digits);
    if (t.relative_variation) tail["relative_variation"] = fmt(*t.relative_variation, 6);
    if (t.fitted_rate) tail["fit_window"] = {t.fit_lo, t.fit_hi};
    out["tail"] = tail;
    emit(out.dump(2), o.out);
    return 0;
}

int cmd_qlen(const Options& o) {
    const QueueModel m = build_model(o);
    if (o.levels > kMaxLevels)
        throw Error("invalid_argument", "-L is capped at " + std::to_string(kMaxLevels), std::to_string(o.levels));
    const QueueLengthDist q = pgf_series(m, o.levels);
    json out = metadata("qlen", m, o);
    out.erase("case");
    json rows = json::array();
    std::ostringstream csv;
    csv << "l,exact,value\n";
    for (std::size_t l = 0; l < q.probabilities.size(); ++l) {
        const ExpRatio p = q.probabilities[l].reduced();
        const std::string v = fmt(p.eval_stable(o.digits), o.digits);
        rows.push_back({{"l", l}, {"exact", p.to_string()}, {"approx", v}});
        csv << l << ",\"" << p.to_string() << "\"," << v << '\n';
    }
    out["probabilities"] = rows;
    out["mean"] = exact_approx(q.mean, o.digits);
    out["variance"] = exact_approx(q.variance, o.digits);
    if (o.format == "csv") {
        emit(csv.str(), o.out);
        if (!o.out.empty() && o.out != "-") {
            out.erase("probabilities");
            emit(out.dump(2), o.sidecar.empty() ? o.out + ".json" : o.sidecar);
        }
        return 0;
    }
    emit(out.dump(2), o.out);
    return 0;
}

int cmd_simulate(const Options& o) {
    const QueueModel m = build_model(o);
    SimConfig cfg;
    cfg.seed = o.seed;
    cfg.customers = o.customers;
    cfg.replications = o.replications;
    cfg.warmup = o.warmup;
    cfg.validate(m);
    const EmpiricalSummary s = simulate_waiting(m, cfg);
    const auto d = solve_for(m, o);
    const CdfTable cdf(d);
    json out = metadata("simulate", m, o);
    out["seed"] = std::to_string(o.seed);
    out["config"] = {{"customers", cfg.customers},
                     {"warmup", cfg.warmup_for(m)},
                     {"replications", cfg.replications},
                     {"ks_thin", cfg.ks_thin},
                     {"batches", cfg.batches},
                     {"rng", "SplitMix64, stream r = mix(seed ^ mix(r + 1))"}};
    json reps = json::array();
    for (const auto& r : s.replications) {
        const KsResult ks = ks_distance(r.ks_sample, [&](double x) { return cdf(x); });
        reps.push_back({{"index", r.index},
                        {"mean", r.mean},
                        {"variance", r.variance},
                        {"mean_se", r.mean_se},
                        {"ks", {{"statistic", ks.statistic}, {"n", ks.n}, {"band", ks.band}}}});
    }
    out["replications"] = reps;
    out["mean"] = s.mean;
    out["mean_se"] = s.mean_se;
    out["variance"] = s.variance;
    out["analytic_mean"] = exact_approx(wq_moments(m).mean, o.digits);
    out["cdf"] = {{"x", s.cdf_grid}, {"empirical", s.cdf_values}};
    emit(out.dump(2), o.out);
    return 0;
}

int cmd_verify(const Options& o) {
    AcceptanceOptions ao;
    ao.seed = o.seed;
    ao.only = o.only;
    const bool as_json = o.format == "json";
    const auto results = run_acceptance(ao, [&](const CriterionResult& r) {
        if (!as_json) {
            std::cout << format_result(r) << '\n';
            std::cout.flush();
        }
    });
    std::size_t failed = 0;
    json arr = json::array();
    for (const auto& r : results) {
        failed += r.passed ? 0 : 1;
        arr.push_back({{"id", r.id}, {"title", r.title}, {"passed", r.passed}, {"detail", r.detail},
                       {"seconds", r.seconds}});
    }
    if (as_json) {
        json out = {{"tool", "mg1dde"}, {"version", MG1_VERSION}, {"seed", std::to_string(o.seed)},
                    {"inversion_method", inversion_method_description({})}, {"criteria", arr},
                    {"passed", failed == 0}};
        emit(out.dump(2), o.out);
    } else {
        std::cout << results.size() - failed << " of " << results.size() << " criteria passed\n";
    }
    return failed == 0 ? 0 : 1;
}

int cmd_figures(Options o) {
    const std::filesystem::path dir = o.out.empty() ? "figures" : o.out;
    std::filesystem::create_directories(dir);
    o.format = "csv";
    const std::vector<std::pair<std::string, QueueModel>> figures{
        {"figure1_uniform_1_12_7_12", {2, ServiceDistribution::uniform(Rational(1, 12), Rational(7, 12))}},
        {"figure2_uniform_0_2_3", {2, ServiceDistribution::uniform(0, Rational(2, 3))}},
        {"figure3_deterministic_1_3", {2, ServiceDistribution::deterministic(Rational(1, 3))}},
    };
    for (const auto& [name, m] : figures) {
        const std::string csv = (dir / (name + ".csv")).string();
        write_density(solve_for(m, o), o, csv, csv + ".json");
        std::cout << csv << '\n';
    }
    return 0;
}

void print_error(const std::string& code, const std::string& message, const std::string& context) {
    const json e = {{"error", {{"code", code}, {"message", message}, {"context", context}}}};
    std::cerr << e.dump() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Exact waiting-time densities and queue lengths for M/G/1 queues"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_version_flag("--version", MG1_VERSION);
    Options o;
    if (const char* env = std::getenv("MG1DDE_PRECISION")) {
        try {
            o.digits = std::stoi(env);
        } catch (const std::exception&) {
            print_error("invalid_argument", "MG1DDE_PRECISION must be an integer", env);
            return 2;
        }
    }

    app.add_option("--lambda", o.lambda, "arrival rate (decimal or p/q)")->capture_default_str();
    app.add_option("--uniform", o.uniform, "uniform service on [a, b]")->expected(2);
    app.add_option("--deterministic", o.deterministic, "constant service time");
    app.add_option("--exponential", o.exponential, "exponential service rate mu");
    app.add_option("--xmax", o.x_max, "solve the density on (0, xmax]")->capture_default_str();
    app.add_option("--precision", o.digits, "significant digits in decimal output (env MG1DDE_PRECISION)")
        ->check(CLI::Range(1, 200))
        ->capture_default_str();
    app.add_option("--seed", o.seed, "simulation and sampling seed")->capture_default_str();
    app.add_option("--out", o.out, "output path (stdout if absent)");
    app.add_option("--format", o.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));

    auto* density = app.add_subcommand("density", "density on a uniform grid as CSV, with a JSON sidecar");
    density->add_option("--step", o.step, "grid step")->capture_default_str();
    density->add_option("--sidecar", o.sidecar, "sidecar path (default <out>.json)");
    auto* cdf = app.add_subcommand("cdf", "P{W <= x}, exact and decimal");
    cdf->add_option("-x", o.xs, "points")->required();
    auto* quant = app.add_subcommand("quantile", "inverse cdf");
    quant->add_option("-p", o.ps, "probabilities")->required();
    app.add_subcommand("mode", "maximiser of the density");
    app.add_subcommand("moments", "exact and integrated mean and variance");
    app.add_subcommand("tail", "exponential tail asymptote");
    auto* qlen = app.add_subcommand("qlen", "number-in-system probabilities");
    qlen->add_option("-L", o.levels, "largest level")->capture_default_str();
    qlen->add_option("--sidecar", o.sidecar, "sidecar path for csv output");
    auto* sim = app.add_subcommand("simulate", "Lindley-recursion simulation of the waiting time");
    sim->add_option("--customers", o.customers, "customers per replication")->capture_default_str();
    sim->add_option("--replications", o.replications)->capture_default_str();
    sim->add_option("--warmup", o.warmup, "customers discarded per replication");
    auto* verify = app.add_subcommand("verify", "run the acceptance checks");
    verify->add_option("--only", o.only, "criterion ids");
    app.add_subcommand("figures", "density CSVs for the three lambda = 2 service laws (--out is a directory)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        print_error("usage", e.what(), "");
        return 2;
    }

    try {
        const std::string cmd = app.get_subcommands().front()->get_name();
        if (cmd == "density") return cmd_density(o);
        if (cmd == "cdf") return cmd_cdf(o);
        if (cmd == "quantile") return cmd_quantile(o);
        if (cmd == "mode") return cmd_mode(o);
        if (cmd == "moments") return cmd_moments(o);
        if (cmd == "tail") return cmd_tail(o);
        if (cmd == "qlen") return cmd_qlen(o);
        if (cmd == "simulate") return cmd_simulate(o);
        if (cmd == "verify") return cmd_verify(o);
        if (cmd == "figures") return cmd_figures(o);
    } catch (const Error& e) {
        print_error(e.code(), e.what(), e.context());
        return 2;
    } catch (const std::exception& e) {
        print_error("internal", e.what(), "");
        return 1;
    }
    return 1;
}
