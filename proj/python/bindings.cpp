// Python bindings: models, the solved density, queue lengths and the
// simulation and inversion checks.

#include "mg1/acceptance.hpp"
#include "mg1/density.hpp"
#include "mg1/oracle.hpp"
#include "mg1/qlen.hpp"

#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>

namespace py = pybind11;
using namespace mg1;

namespace {

Rational to_rational(const py::handle& v) {
    if (py::isinstance<py::str>(v)) return parse_rational(v.cast<std::string>());
    if (py::isinstance<py::int_>(v)) return parse_rational(py::str(v).cast<std::string>());
    if (py::isinstance<py::float_>(v)) {
        // exact binary value of the double
        Rational r;
        mpq_set_d(r.get_mpq_t(), v.cast<double>());
        return r;
    }
    // fractions.Fraction and anything else with numerator / denominator
    if (py::hasattr(v, "numerator") && py::hasattr(v, "denominator"))
        return parse_rational(py::str(v.attr("numerator")).cast<std::string>() + "/" +
                              py::str(v.attr("denominator")).cast<std::string>());
    throw Error("invalid_argument", "expected a number or a decimal / p/q string");
}

BigFloat to_big(const py::handle& v) {
    PrecisionScope scope(kDefaultPrecisionBits);
    return to_bigfloat(to_rational(v));
}

double to_double(const BigFloat& v) { return v.convert_to<double>(); }

QueueModel make_model(const py::object& lambda, const py::object& uniform, const py::object& deterministic,
                      const py::object& exponential) {
    const int given = (uniform.is_none() ? 0 : 1) + (deterministic.is_none() ? 0 : 1) + (exponential.is_none() ? 0 : 1);
    if (given != 1) throw Error("invalid_argument", "exactly one of uniform, deterministic, exponential is required");
    const Rational l = to_rational(lambda);
    if (!uniform.is_none()) {
        const auto ab = uniform.cast<py::sequence>();
        if (ab.size() != 2) throw Error("invalid_argument", "uniform takes (a, b)");
        return {l, ServiceDistribution::uniform(to_rational(ab[0]), to_rational(ab[1]))};
    }
    if (!deterministic.is_none()) return {l, ServiceDistribution::deterministic(to_rational(deterministic))};
    return {l, ServiceDistribution::exponential(to_rational(exponential))};
}

py::dict exact_approx(const Rational& r) {
    py::dict d;
    d["exact"] = to_string(r);
    d["approx"] = r.get_d();
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Exact M/G/1 waiting-time densities and queue-length distributions";
    m.attr("__version__") = MG1_VERSION;

    // args are (code, message, context)
    static PyObject* error_type = PyErr_NewException("mg1dde._core.Mg1Error", PyExc_ValueError, nullptr);
    m.add_object("Mg1Error", py::reinterpret_borrow<py::object>(error_type));
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            const py::tuple args = py::make_tuple(e.code(), std::string(e.what()), e.context());
            PyErr_SetObject(error_type, args.ptr());
        }
    });

    py::class_<QueueModel>(m, "Model")
        .def(py::init(&make_model), py::arg("lam"), py::kw_only(), py::arg("uniform") = py::none(),
             py::arg("deterministic") = py::none(), py::arg("exponential") = py::none())
        .def_property_readonly("lam", [](const QueueModel& q) { return to_string(q.lambda()); })
        .def_property_readonly("mu", [](const QueueModel& q) { return to_string(q.mu()); })
        .def_property_readonly("rho", [](const QueueModel& q) { return to_string(q.rho()); })
        .def_property_readonly("atom_mass", [](const QueueModel& q) { return to_string(q.atom_mass()); })
        .def_property_readonly("service_kind", [](const QueueModel& q) { return to_string(q.service().kind); })
        .def_property_readonly("case", [](const QueueModel& q) { return to_string(case_of(q)); })
        .def("__repr__", &QueueModel::describe);

    m.def("wait_moments", [](const QueueModel& q) {
        const WaitMoments w = wq_moments(q);
        py::dict d;
        d["mean"] = exact_approx(w.mean);
        d["variance"] = exact_approx(w.variance);
        return d;
    });

    py::class_<WaitingTimeDensity>(m, "Density")
        .def_property_readonly("case", [](const WaitingTimeDensity& d) { return to_string(d.tag()); })
        .def_property_readonly("x_max", [](const WaitingTimeDensity& d) { return to_string(d.x_max()); })
        .def_property_readonly("segment_width", [](const WaitingTimeDensity& d) { return to_string(d.step()); })
        .def_property_readonly("atom_mass", [](const WaitingTimeDensity& d) { return to_string(d.atom_mass()); })
        .def_property_readonly("segment_count", [](const WaitingTimeDensity& d) { return d.segments().size(); })
        .def("term_count", [](const WaitingTimeDensity& d, std::size_t n) { return d.segment(n).f.size(); })
        .def("segment_expression", [](const WaitingTimeDensity& d, std::size_t n) { return d.segment(n).f.to_string(); })
        .def(
            "density", [](const WaitingTimeDensity& d, const py::object& x) { return to_double(eval_density(d, to_rational(x))); },
            py::arg("x"))
        .def(
            "density_decimal",
            [](const WaitingTimeDensity& d, const py::object& x, int digits) {
                return format_float(eval_density(d, to_rational(x), digits), digits);
            },
            py::arg("x"), py::arg("digits") = 15)
        .def(
            "density_exact",
            [](const WaitingTimeDensity& d, const py::object& x) { return density_exact(d, to_rational(x)).to_string(); },
            py::arg("x"))
        .def(
            "cdf", [](const WaitingTimeDensity& d, const py::object& x) { return to_double(eval_cdf(d, to_big(x))); },
            py::arg("x"))
        .def(
            "cdf_exact", [](const WaitingTimeDensity& d, const py::object& x) { return cdf_exact(d, to_rational(x)).to_string(); },
            py::arg("x"))
        .def(
            "quantile",
            [](const WaitingTimeDensity& d, const py::object& p) { return to_double(quantile(d, to_big(p))); },
            py::arg("p"))
        .def("mode",
             [](const WaitingTimeDensity& d) {
                 const ModeResult r = mode(d);
                 py::dict out;
                 out["x"] = to_double(r.x);
                 out["density"] = to_double(r.value);
                 out["kind"] = to_string(r.kind);
                 out["segment"] = r.segment;
                 return out;
             })
        .def("moments",
             [](const WaitingTimeDensity& d) {
                 const NumericMoments n = numeric_moments(d);
                 py::dict out;
                 out["mass"] = to_double(n.mass);
                 out["mean"] = to_double(n.mean);
                 out["variance"] = to_double(n.variance);
                 out["tail_mass"] = to_double(n.tail_mass);
                 return out;
             })
        .def("tail", [](const WaitingTimeDensity& d) {
            const TailAsymptote t = tail_asymptote(d);
            py::dict out;
            out["decay_rate"] = to_double(t.decay_rate);
            out["method"] = t.method;
            if (t.prefactor) out["prefactor"] = to_double(*t.prefactor);
            if (t.tau) out["tau"] = to_double(*t.tau);
            if (t.fitted_rate) out["fitted_rate"] = to_double(*t.fitted_rate);
            return out;
        });

    m.def(
        "solve",
        [](const QueueModel& q, const py::object& x_max) {
            SolverOptions o;
            o.x_max = to_rational(x_max);
            py::gil_scoped_release release;
            return solve(q, o);
        },
        py::arg("model"), py::arg("x_max") = "4");

    m.def(
        "queue_length",
        [](const QueueModel& q, std::size_t L) {
            if (L > 200) throw Error("invalid_argument", "L is capped at 200", std::to_string(L));
            const QueueLengthDist dist = pgf_series(q, L);
            py::list rows;
            for (std::size_t l = 0; l < dist.probabilities.size(); ++l) {
                const ExpRatio p = dist.probabilities[l].reduced();
                py::dict row;
                row["l"] = l;
                row["exact"] = p.to_string();
                row["approx"] = to_double(p.eval_stable(17));
                rows.append(row);
            }
            return rows;
        },
        py::arg("model"), py::arg("L") = 10);

    m.def("queue_length_moments", [](const QueueModel& q) {
        const QlenMoments s = qlen_moments(q);
        py::dict d;
        d["mean"] = exact_approx(s.mean);
        d["variance"] = exact_approx(s.variance);
        return d;
    });

    m.def(
        "simulate",
        [](const QueueModel& q, std::uint64_t seed, std::uint64_t customers, std::uint64_t replications) {
            SimConfig cfg;
            cfg.seed = seed;
            cfg.customers = customers;
            cfg.replications = replications;
            cfg.validate(q);
            EmpiricalSummary s;
            {
                py::gil_scoped_release release;
                s = simulate_waiting(q, cfg);
            }
            py::dict out;
            out["mean"] = s.mean;
            out["mean_se"] = s.mean_se;
            out["variance"] = s.variance;
            py::list reps;
            for (const auto& r : s.replications) {
                py::dict d;
                d["index"] = r.index;
                d["mean"] = r.mean;
                d["mean_se"] = r.mean_se;
                d["ks_sample"] = r.ks_sample;
                reps.append(d);
            }
            out["replications"] = reps;
            out["cdf_grid"] = s.cdf_grid;
            out["cdf_values"] = s.cdf_values;
            return out;
        },
        py::arg("model"), py::arg("seed") = 20240601, py::arg("customers") = 1000000, py::arg("replications") = 8);

    m.def("ks_distance", [](std::vector<double> samples, const std::function<double(double)>& cdf) {
        const KsResult r = ks_distance(std::move(samples), cdf);
        py::dict d;
        d["statistic"] = r.statistic;
        d["n"] = r.n;
        d["band"] = r.band;
        return d;
    });

    m.def(
        "invert_laplace",
        [](const QueueModel& q, const std::vector<double>& xs, double tol) {
            std::vector<InversionResult> res;
            {
                py::gil_scoped_release release;
                res = invert_laplace(q, xs, tol);
            }
            py::list out;
            for (const auto& r : res) {
                py::dict d;
                d["x"] = r.x;
                d["value"] = r.value;
                d["error_estimate"] = r.error_estimate;
                d["flagged"] = r.flagged;
                out.append(d);
            }
            return out;
        },
        py::arg("model"), py::arg("xs"), py::arg("tol") = 1e-6);

    m.def(
        "verify",
        [](const std::vector<int>& only, std::uint64_t seed) {
            AcceptanceOptions o;
            o.only = only;
            o.seed = seed;
            std::vector<CriterionResult> res;
            {
                py::gil_scoped_release release;
                res = run_acceptance(o);
            }
            py::list out;
            for (const auto& r : res) {
                py::dict d;
                d["id"] = r.id;
                d["title"] = r.title;
                d["passed"] = r.passed;
                d["detail"] = r.detail;
                d["seconds"] = r.seconds;
                out.append(d);
            }
            return out;
        },
        py::arg("only") = std::vector<int>{}, py::arg("seed") = 20240601);
}
