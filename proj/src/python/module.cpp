#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "tclab/convergence.hpp"
#include "tclab/pathsim.hpp"

namespace py = pybind11;
using namespace tclab;

namespace {

FunctionOnX as_fn(const Vec& values, bool c0) {
    return FunctionOnX(values, c0 ? FuncClass::C0 : FuncClass::Bb);
}

py::dict kato_dict(const KatoReport& r) {
    py::dict d;
    d["bounded"] = r.bounded;
    d["kato"] = r.kato;
    d["sup"] = r.sup;
    d["boundary_left"] = r.boundary_left;
    d["boundary_right"] = r.boundary_right;
    return d;
}

py::dict estimate_dict(const McEstimate& e) {
    py::dict d;
    d["value"] = e.value;
    d["std_error"] = e.std_error;
    d["n_paths"] = e.n_paths;
    d["capped_paths"] = e.capped_paths;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "time-changed Markov semigroup laboratory (C++ core)";

    py::register_exception<Error>(m, "TclabError");

    py::class_<ChainModel>(m, "ChainModel")
        .def_property_readonly("generator", [](const ChainModel& c) { return c.generator; })
        .def_property_readonly("ref_measure", [](const ChainModel& c) { return c.ref_measure; })
        .def_property_readonly("size", &ChainModel::size);

    py::class_<DiffusionModel>(m, "DiffusionModel")
        .def_property_readonly("grid", [](const DiffusionModel& d) { return d.grid; })
        .def_property_readonly("grid_n", [](const DiffusionModel& d) { return d.grid_n; });

    py::class_<SmoothMeasure>(m, "SmoothMeasure")
        .def_property_readonly("weights", [](const SmoothMeasure& s) { return s.weights; })
        .def_property_readonly("atoms", [](const SmoothMeasure& s) {
            std::vector<std::pair<double, double>> out;
            for (const Atom& a : s.atoms) out.emplace_back(a.location, a.weight);
            return out;
        });

    py::class_<TraceGenerator>(m, "TraceGenerator")
        .def_property_readonly("matrix", [](const TraceGenerator& t) { return t.matrix; })
        .def_property_readonly("states", [](const TraceGenerator& t) { return t.states; })
        .def_property_readonly("points", [](const TraceGenerator& t) { return t.points; })
        .def_property_readonly("validation_residual",
                               [](const TraceGenerator& t) { return t.validation_residual; });

    m.def("build_chain", &build_chain, py::arg("generator"), py::arg("ref_measure"));
    m.def("make_diffusion", &make_diffusion, py::arg("grid_n") = 1000);
    m.def("dual_model", &dual_model);
    m.def("bm_green", &bm_green, py::arg("x"), py::arg("y"));
    m.def("bm_green_alpha", &bm_green_alpha, py::arg("x"), py::arg("y"), py::arg("alpha"));

    m.def("chain_measure", &chain_measure, py::arg("weights"));
    m.def(
        "diffusion_measure",
        [](const std::vector<std::pair<double, double>>& atoms, const Vec& density) {
            std::vector<Atom> out;
            for (auto [loc, w] : atoms) out.push_back({loc, w});
            return diffusion_measure(std::move(out), density);
        },
        py::arg("atoms"), py::arg("density") = Vec());
    m.def("lebesgue_measure", &lebesgue_measure);

    m.def(
        "transition",
        [](const ChainModel& c, double t, const Vec& u) {
            return transition(c, t, as_fn(u, false)).values;
        },
        py::arg("model"), py::arg("t"), py::arg("u"));
    m.def(
        "resolvent_kernel",
        [](const ChainModel& c, double alpha) {
            ResolventKernel rk = resolvent_kernel(c, alpha);
            return py::make_tuple(rk.op, rk.kernel);
        },
        py::arg("model"), py::arg("alpha"), "returns (operator_matrix, kernel)");

    m.def(
        "is_green_kato",
        [](const ChainModel& c, const SmoothMeasure& mu) { return kato_dict(is_green_kato(c, mu)); },
        py::arg("model"), py::arg("mu"));
    m.def(
        "is_green_kato",
        [](const DiffusionModel& d, const SmoothMeasure& mu) {
            return kato_dict(is_green_kato(d, mu));
        },
        py::arg("model"), py::arg("mu"));

    m.def(
        "potential_apply",
        [](const ChainModel& c, const SmoothMeasure& mu, double a, const Vec& u) {
            return potential_apply(c, mu, a, as_fn(u, false)).values;
        },
        py::arg("model"), py::arg("mu"), py::arg("alpha"), py::arg("u"));
    m.def(
        "potential_apply",
        [](const DiffusionModel& d, const SmoothMeasure& mu, double a, const Vec& u) {
            return potential_apply(d, mu, a, as_fn(u, false)).values;
        },
        py::arg("model"), py::arg("mu"), py::arg("alpha"), py::arg("u"));

    m.def(
        "timechanged_resolvent",
        [](const ChainModel& c, const SmoothMeasure& mu, double a, const Vec& u) {
            return timechanged_resolvent(c, mu, a, as_fn(u, false)).values;
        },
        py::arg("model"), py::arg("mu"), py::arg("alpha"), py::arg("u"));
    m.def(
        "timechanged_resolvent",
        [](const DiffusionModel& d, const SmoothMeasure& mu, double a, const Vec& u) {
            return timechanged_resolvent(d, mu, a, as_fn(u, true)).values;
        },
        py::arg("model"), py::arg("mu"), py::arg("alpha"), py::arg("u"));

    m.def(
        "hitting_apply",
        [](const ChainModel& c, const SmoothMeasure& mu, const Vec& u, double alpha) {
            return hitting_apply(c, fine_support(c, mu), as_fn(u, false), alpha).values;
        },
        py::arg("model"), py::arg("mu"), py::arg("u"), py::arg("alpha") = 0.0);
    m.def(
        "hitting_apply",
        [](const DiffusionModel& d, const SmoothMeasure& mu, const Vec& u) {
            return hitting_apply(d, fine_support(d, mu), as_fn(u, true)).values;
        },
        py::arg("model"), py::arg("mu"), py::arg("u"));

    m.def(
        "phi_A",
        [](const ChainModel& c, const SmoothMeasure& mu) { return phi_A(c, mu).values; },
        py::arg("model"), py::arg("mu"));
    m.def(
        "phi_A",
        [](const DiffusionModel& d, const SmoothMeasure& mu) { return phi_A(d, mu).values; },
        py::arg("model"), py::arg("mu"));

    m.def("trace_generator",
          [](const ChainModel& c, const SmoothMeasure& mu) { return trace_generator(c, mu); });
    m.def("trace_generator",
          [](const DiffusionModel& d, const SmoothMeasure& mu) { return trace_generator(d, mu); });

    m.def(
        "semigroup_apply",
        [](const ChainModel& c, const SmoothMeasure& mu, double t, const Vec& u) {
            return semigroup_apply(c, mu, t, as_fn(u, false)).values;
        },
        py::arg("model"), py::arg("mu"), py::arg("t"), py::arg("u"));
    m.def(
        "semigroup_apply",
        [](const DiffusionModel& d, const SmoothMeasure& mu, double t, const Vec& u) {
            return semigroup_apply(d, mu, t, as_fn(u, true)).values;
        },
        py::arg("model"), py::arg("mu"), py::arg("t"), py::arg("u"));

    m.def(
        "integrated_semigroup",
        [](const ChainModel& c, const SmoothMeasure& mu, double t, const Vec& u) {
            return integrated_semigroup(c, mu, t, as_fn(u, false)).values;
        },
        py::arg("model"), py::arg("mu"), py::arg("t"), py::arg("u"));

    m.def(
        "exact_fdd",
        [](const ChainModel& c, const SmoothMeasure& init, const SmoothMeasure& mu,
           const std::vector<double>& times, const std::vector<Vec>& fns) {
            std::vector<FunctionOnX> wrapped;
            for (const Vec& f : fns) wrapped.push_back(as_fn(f, false));
            return exact_fdd(c, init, mu, times, wrapped);
        },
        py::arg("model"), py::arg("mu_init"), py::arg("mu"), py::arg("times"),
        py::arg("functions"));

    m.def(
        "mc_semigroup",
        [](const ChainModel& c, const SmoothMeasure& mu, double t, const Vec& u, int x,
           int n_paths, std::uint64_t seed, int workers) {
            return estimate_dict(mc_semigroup(c, mu, t, as_fn(u, false), x, n_paths, seed,
                                              workers));
        },
        py::arg("model"), py::arg("mu"), py::arg("t"), py::arg("u"), py::arg("x"),
        py::arg("n_paths") = 100000, py::arg("seed") = 1, py::arg("workers") = 1);
    m.def(
        "mc_resolvent",
        [](const ChainModel& c, const SmoothMeasure& mu, double a, const Vec& u, int x,
           int n_paths, std::uint64_t seed, int workers) {
            McResolventEstimate est =
                mc_resolvent(c, mu, a, as_fn(u, false), x, n_paths, seed, workers);
            py::dict d;
            d["time_route"] = estimate_dict(est.time_route);
            d["pcaf_route"] = estimate_dict(est.pcaf_route);
            return d;
        },
        py::arg("model"), py::arg("mu"), py::arg("alpha"), py::arg("u"), py::arg("x"),
        py::arg("n_paths") = 100000, py::arg("seed") = 1, py::arg("workers") = 1);
    m.def(
        "mc_apotential",
        [](const ChainModel& c, const SmoothMeasure& mu, double a, const Vec& u, int x,
           int n_paths, std::uint64_t seed, int workers) {
            return estimate_dict(mc_apotential(c, mu, a, as_fn(u, false), x, n_paths, seed,
                                               workers));
        },
        py::arg("model"), py::arg("mu"), py::arg("alpha"), py::arg("u"), py::arg("x"),
        py::arg("n_paths") = 100000, py::arg("seed") = 1, py::arg("workers") = 1);
    m.def(
        "mc_fdd",
        [](const ChainModel& c, const SmoothMeasure& init, const SmoothMeasure& mu,
           const std::vector<double>& times, const std::vector<Vec>& fns, int n_paths,
           std::uint64_t seed, int workers) {
            std::vector<FunctionOnX> wrapped;
            for (const Vec& f : fns) wrapped.push_back(as_fn(f, false));
            return estimate_dict(mc_fdd(c, init, mu, times, wrapped, n_paths, seed, workers));
        },
        py::arg("model"), py::arg("mu_init"), py::arg("mu"), py::arg("times"),
        py::arg("functions"), py::arg("n_paths") = 100000, py::arg("seed") = 1,
        py::arg("workers") = 1);

    m.def(
        "normality_flags",
        [](const ChainModel& c, const SmoothMeasure& mu) {
            NormalityReport r = normality_check(c, mu);
            py::dict d;
            d["full_support"] = r.full_support;
            d["hitting_is_identity"] = r.hitting_is_identity;
            d["hitting_injective"] = r.hitting_injective;
            d["resolvent_injective_1"] = r.resolvent_injective_1;
            d["resolvent_injective_2"] = r.resolvent_injective_2;
            d["consistent"] = r.consistent();
            return d;
        },
        py::arg("model"), py::arg("mu"));

    m.def(
        "resolvent_equation_residual",
        [](const ChainModel& c, const SmoothMeasure& mu, double a, double b) {
            ResolventResidual r = resolvent_equation_residual(c, mu, a, b);
            return py::make_tuple(r.residual, r.alpha_norm, r.beta_norm);
        },
        py::arg("model"), py::arg("mu"), py::arg("alpha"), py::arg("beta"));
}
