#include <doctest.h>

#include <cmath>

#include <unsupported/Eigen/MatrixFunctions>

#include "test_support.hpp"

using namespace tclab;
using namespace tclab::testing;

namespace {

SmoothMeasure c2_first_state() { return chain_measure((Vec(2) << 1.0, 0.0).finished()); }

}  // namespace

TEST_SUITE_BEGIN("timechange");

TEST_CASE("trace generator closed forms") {
    ChainModel model = c2();
    TraceGenerator tg = trace_generator(model, c2_first_state());
    REQUIRE(tg.dim() == 1);
    CHECK(std::abs(tg.matrix(0, 0) + 1.5) < 1e-12);  // -2 + 1*(1/2)*1
    CHECK(tg.validation_residual <= 1e-9);

    Mat q1(1, 1);
    q1 << -1.0;
    ChainModel single = build_chain(q1, Vec::Ones(1));
    TraceGenerator tg_w = trace_generator(single, chain_measure(Vec::Constant(1, 2.5)));
    CHECK(tg_w.matrix(0, 0) == doctest::Approx(-0.4).epsilon(1e-14));  // -1/w

    TraceGenerator identity = trace_generator(model, chain_measure(Vec::Ones(2)));
    CHECK(op_sup_norm(identity.matrix - model.generator) < 1e-12);
}

TEST_CASE("trace generator validation on random measures") {
    ChainModel model = c5();
    SplitMix64 rng(71);
    for (int i = 0; i < 15; ++i) {
        TraceGenerator tg = trace_generator(model, random_measure(model, rng));
        CHECK(tg.validation_residual <= 1e-9);
    }
}

TEST_CASE("gap-diffusion trace generator") {
    DiffusionModel model = make_diffusion(299);
    TraceGenerator single = trace_generator(model, diffusion_measure({{0.5, 1.0}}));
    CHECK(single.matrix(0, 0) == doctest::Approx(-2.0).epsilon(1e-13));

    // atoms at 1/4 and 3/4 with unit mass: conductances 1/gap with the 1/2
    // diffusion factor give [[-3, 1], [1, -3]]
    TraceGenerator pair =
        trace_generator(model, diffusion_measure({{0.25, 1.0}, {0.75, 1.0}}));
    Mat expected(2, 2);
    expected << -3.0, 1.0, 1.0, -3.0;
    CHECK(op_sup_norm(pair.matrix - expected) < 1e-12);
    CHECK(pair.validation_residual <= 1e-9);

    CHECK_THROWS_AS(trace_generator(model, lebesgue_measure(model)), BadParameters);
}

TEST_CASE("time-changed semigroup on the pair chain") {
    ChainModel model = c2();
    SmoothMeasure mu = c2_first_state();
    Vec u(2);
    u << 1.0, 0.4;  // off-support value must not matter
    for (double t : {0.5, 1.0, 2.0}) {
        Vec got = semigroup_apply(model, mu, t, FunctionOnX(u)).values;
        CHECK(std::abs(got(0) - std::exp(-1.5 * t)) < 1e-12);
        CHECK(std::abs(got(1) - 0.5 * std::exp(-1.5 * t)) < 1e-12);
    }
    Vec degenerate(2);
    degenerate << 0.0, 3.0;
    for (double t : {0.0, 1.0})
        CHECK(sup_norm(semigroup_apply(model, mu, t, FunctionOnX(degenerate)).values) == 0.0);
}

TEST_CASE("identity time change reproduces the transition semigroup") {
    ChainModel model = c5();
    SmoothMeasure mu = chain_measure(Vec::Ones(5));  // mu = m
    SplitMix64 rng(5);
    Vec u = random_vector(5, rng);
    for (double t : {0.4, 1.3}) {
        Vec got = semigroup_apply(model, mu, t, FunctionOnX(u)).values;
        Vec expect = transition(model, t, FunctionOnX(u)).values;
        CHECK(sup_norm(got - expect) < 1e-11);
    }
}

TEST_CASE("semigroup law and the t=0 hitting convention") {
    ChainModel model = c5();
    SplitMix64 rng(9);
    SmoothMeasure mu = random_measure(model, rng);
    TraceGenerator tg = trace_generator(model, mu);
    for (double t : {0.3, 1.0}) {
        for (double s : {0.5, 1.7}) {
            Mat lhs = semigroup_matrix(model, tg, t + s);
            Mat rhs = semigroup_matrix(model, tg, t) * semigroup_matrix(model, tg, s);
            CHECK(op_sup_norm(lhs - rhs) < 1e-10);
        }
    }
    FineSupport f = fine_support(model, mu);
    CHECK(op_sup_norm(semigroup_matrix(model, tg, 0.0) - hitting_matrix(model, f, 0.0)) < 1e-12);
}

TEST_CASE("substitute Feller property: strong continuity only on the hitting range") {
    ChainModel model = c5();
    SmoothMeasure mu = chain_measure((Vec(5) << 1.0, 0.0, 0.7, 0.0, 0.3).finished());
    FineSupport f = fine_support(model, mu);
    Mat p = hitting_matrix(model, f, 0.0);
    SplitMix64 rng(13);
    Vec u = random_vector(5, rng);
    Vec pu = p * u;

    std::vector<double> ts, errs;
    for (int k = 2; k <= 9; ++k) {
        double t = std::pow(2.0, -k);
        double err = sup_norm(semigroup_apply(model, mu, t, FunctionOnX(pu)).values - pu);
        ts.push_back(t);
        errs.push_back(err);
    }
    for (size_t i = 1; i < errs.size(); ++i) CHECK(errs[i] < errs[i - 1]);
    // near-linear vanishing rate in t
    double slope = std::log(errs.back() / errs.front()) / std::log(ts.back() / ts.front());
    CHECK(slope > 0.8);
    CHECK(slope < 1.2);

    // off the hitting range the limit is P_F u, not u
    Vec gap = u - pu;
    REQUIRE(sup_norm(gap) > 1e-3);
    double small_t = 1e-6;
    Vec at_small = semigroup_apply(model, mu, small_t, FunctionOnX(u)).values;
    CHECK(sup_norm(at_small - pu) < 1e-4);
    CHECK(std::abs(sup_norm(at_small - u) - sup_norm(gap)) < 1e-4);
}

TEST_CASE("diffusion semigroup output vanishes at the boundary") {
    DiffusionModel model = make_diffusion(499);
    SmoothMeasure mu = diffusion_measure({{0.3, 1.0}, {0.6, 0.5}});
    Vec u = Vec::Ones(model.grid_n);
    FunctionOnX out = semigroup_apply(model, mu, 0.7, FunctionOnX(u, FuncClass::Bb));
    CHECK(vanishes_at_boundary(model, out.values));
    CHECK(out.cls == FuncClass::C0);
}

TEST_CASE("full support scaling gives the Feller case") {
    ChainModel model = c2();
    SmoothMeasure mu = chain_measure(Vec::Constant(2, 2.0));  // mu = 2 m
    TraceGenerator tg = trace_generator(model, mu);
    CHECK(op_sup_norm(tg.matrix - 0.5 * model.generator) < 1e-12);
    SplitMix64 rng(19);
    Vec u = random_vector(2, rng);
    Vec got = semigroup_apply(model, mu, 1.2, FunctionOnX(u)).values;
    Vec expect = Mat((1.2 * 0.5 * model.generator).exp()) * u;
    CHECK(sup_norm(got - expect) < 1e-12);

    // Feller property: alpha R_alpha u -> u uniformly on the full support
    std::vector<double> grid = {1.0, 10.0, 100.0, 1e3, 1e4};
    StrongLimitCurve curve = strong_limit_check(model, mu, FunctionOnX(u, FuncClass::C0), grid);
    CHECK(curve.converged);
    CHECK(curve.points.back().error < 1e-3);
}

TEST_CASE("restricted semigroup and resolvent") {
    ChainModel model = c2();
    SmoothMeasure mu = c2_first_state();
    TraceGenerator tg = trace_generator(model, mu);
    Vec h = Vec::Constant(1, 2.0);
    CHECK(restricted_semigroup(tg, 0.0, h)(0) == 2.0);
    CHECK(restricted_semigroup(tg, 1.0, h)(0) == doctest::Approx(2.0 * std::exp(-1.5)));
    for (double a : {0.5, 1.0, 4.0})
        CHECK(restricted_resolvent(tg, a, h)(0) == doctest::Approx(2.0 / (a + 1.5)));

    // extension independence: T_t(u|_F) = (P-check_t u~)|_F for any extension
    SplitMix64 rng(29);
    ChainModel big = c5();
    SmoothMeasure mu5 = random_measure(big, rng);
    TraceGenerator tg5 = trace_generator(big, mu5);
    Vec uf = random_vector(tg5.dim(), rng);
    FunctionOnX ext1 = extend(big, tg5.support, uf);
    FunctionOnX ext2 = ext1;
    for (int s = 0; s < big.size(); ++s)
        if (!tg5.support.contains(s)) ext2.values(s) = 10.0 * rng.uniform01();
    Vec a = semigroup_apply(big, tg5, 0.8, ext1).values;
    Vec b = semigroup_apply(big, tg5, 0.8, ext2).values;
    CHECK(sup_norm(a - b) < 1e-12);
    Vec direct = restricted_semigroup(tg5, 0.8, uf);
    for (int i = 0; i < tg5.dim(); ++i)
        CHECK(a(tg5.states[i]) == doctest::Approx(direct(i)).epsilon(1e-12));
}

TEST_CASE("integrated semigroup closed form and limits") {
    ChainModel model = c2();
    SmoothMeasure mu = c2_first_state();
    TraceGenerator tg = trace_generator(model, mu);
    Vec u(2);
    u << 1.0, 0.0;
    CHECK(sup_norm(integrated_semigroup(model, tg, 0.0, FunctionOnX(u)).values) == 0.0);
    for (double t : {0.5, 1.0, 3.0}) {
        Vec got = integrated_semigroup(model, tg, t, FunctionOnX(u)).values;
        double expect = (2.0 / 3.0) * (1.0 - std::exp(-1.5 * t));
        CHECK(std::abs(got(0) - expect) < 1e-12);
        CHECK(std::abs(got(1) - 0.5 * expect) < 1e-12);
    }
    // S_t -> G^mu as t -> infinity on a transient chain
    Vec tail = integrated_semigroup(model, tg, 40.0, FunctionOnX(u)).values;
    Vec g = potential_apply(model, mu, 0.0, FunctionOnX(u)).values;
    CHECK(sup_norm(tail - g) < 1e-12);
}

TEST_CASE("integrated semigroup is 1-Lipschitz in t") {
    ChainModel model = c5();
    SplitMix64 rng(37);
    SmoothMeasure mu = random_measure(model, rng);
    TraceGenerator tg = trace_generator(model, mu);
    Vec u = random_vector(5, rng);
    double norm_u = sup_norm(u);
    std::vector<double> ts;
    for (int i = 0; i <= 20; ++i) ts.push_back(0.25 * i);
    for (size_t i = 0; i < ts.size(); ++i)
        for (size_t j = i + 1; j < ts.size(); ++j) {
            Vec a = integrated_semigroup(model, tg, ts[i], FunctionOnX(u)).values;
            Vec b = integrated_semigroup(model, tg, ts[j], FunctionOnX(u)).values;
            CHECK(sup_norm(a - b) <= (ts[j] - ts[i]) * norm_u + 1e-12);
        }
}

TEST_CASE("Laplace transform identity holds by quadrature") {
    ChainModel pair = c2();
    SmoothMeasure mu2 = c2_first_state();
    TraceGenerator tg2 = trace_generator(pair, mu2);
    Vec u2 = Vec::Ones(2);
    for (double a : {1.0, 2.0, 5.0})
        CHECK(laplace_identity_residual(pair, mu2, tg2, a, FunctionOnX(u2), true) < 1e-6);

    ChainModel big = c5();
    SplitMix64 rng(43);
    SmoothMeasure mu5 = random_measure(big, rng);
    TraceGenerator tg5 = trace_generator(big, mu5);
    Vec u5 = random_vector(5, rng);
    for (double a : {1.0, 2.0, 5.0})
        CHECK(laplace_identity_residual(big, mu5, tg5, a, FunctionOnX(u5), true) < 1e-6);
}

TEST_CASE("linear relation membership") {
    ChainModel model = c2();
    SmoothMeasure mu = c2_first_state();
    SplitMix64 rng(47);
    Vec v = random_vector(2, rng);
    const double alpha = 1.5;
    FunctionOnX u = timechanged_resolvent(model, mu, alpha, FunctionOnX(v));
    FunctionOnX w(Vec(v - alpha * u.values));
    CHECK(relation_membership(model, mu, alpha, u, w));

    FunctionOnX u_bad = u;
    u_bad.values(0) += 1e-3;  // perturb on the support
    CHECK(!relation_membership(model, mu, alpha, u_bad, w));
}

TEST_CASE("evolution trajectory satisfies the relation inclusion") {
    ChainModel model = c2();
    SmoothMeasure mu = c2_first_state();
    TraceGenerator tg = trace_generator(model, mu);
    Vec v(2);
    v << 1.0, 0.2;
    const double alpha = 2.0;
    const double fd_step = 1e-4;
    for (double t : {0.5, 1.0, 2.0}) {
        FunctionOnX u_t = integrated_semigroup(model, tg, t, FunctionOnX(v));
        Vec plus = integrated_semigroup(model, tg, t + fd_step, FunctionOnX(v)).values;
        Vec minus = integrated_semigroup(model, tg, t - fd_step, FunctionOnX(v)).values;
        Vec ddt = (plus - minus) / (2.0 * fd_step);
        FunctionOnX w(Vec(v - ddt));  // -du/dt + v is the relation element
        CHECK(relation_membership(model, mu, alpha, u_t, w, 1e-9));
    }
}

TEST_CASE("heat and evolution solutions with derivative diagnostics") {
    ChainModel model = c2();
    SmoothMeasure mu = c2_first_state();
    Vec v(2);
    v << 1.0, 0.0;

    CHECK(sup_norm(evolution_solution(model, mu, FunctionOnX(v), 0.0).values) == 0.0);

    Vec degenerate(2);
    degenerate << 0.0, 1.0;
    for (double t : {0.5, 2.0})
        CHECK(sup_norm(heat_solution(model, mu, FunctionOnX(degenerate), t).values) == 0.0);

    SolutionDiagnostics diag;
    heat_solution(model, mu, FunctionOnX(v), 1.0, &diag);
    CHECK(diag.derivative_residual < 1e-6);  // d/dt e^{-1.5t} vs -1.5 e^{-1.5t}
    SolutionDiagnostics ediag;
    evolution_solution(model, mu, FunctionOnX(v), 1.0, &ediag);
    CHECK(ediag.derivative_residual < 1e-6);
}

TEST_CASE("exact finite-dimensional distributions") {
    ChainModel model = c2();
    SmoothMeasure mu = c2_first_state();
    Vec ind(2);
    ind << 1.0, 0.0;
    double got = exact_fdd(model, mu, mu, {1.0}, {FunctionOnX(ind), FunctionOnX(ind)});
    CHECK(got == doctest::Approx(std::exp(-1.5)).epsilon(1e-13));

    // single factor from a point mass off the support goes through P_F
    SmoothMeasure delta2 = chain_measure((Vec(2) << 0.0, 1.0).finished());
    double from_out = exact_fdd(model, delta2, mu, {1.0}, {FunctionOnX(Vec::Ones(2)),
                                                           FunctionOnX(ind)});
    CHECK(from_out == doctest::Approx(0.5 * std::exp(-1.5)).epsilon(1e-13));

    // k = 2 against an independent nested-matrix composition
    ChainModel big = c5();
    SplitMix64 rng(53);
    SmoothMeasure mu5 = random_measure(big, rng);
    TraceGenerator tg5 = trace_generator(big, mu5);
    std::vector<FunctionOnX> fns = {FunctionOnX(random_vector(5, rng, 0.0, 1.0)),
                                    FunctionOnX(random_vector(5, rng, 0.0, 1.0)),
                                    FunctionOnX(random_vector(5, rng, 0.0, 1.0))};
    std::vector<double> times = {0.7, 1.9};
    double lab = exact_fdd(big, mu5, mu5, times, fns);
    Mat p1 = semigroup_matrix(big, tg5, 0.7);
    Mat p2 = semigroup_matrix(big, tg5, 1.2);
    Vec nested = fns[0].values.cwiseProduct(p1 * fns[1].values.cwiseProduct(p2 * fns[2].values));
    Mat pf = hitting_matrix(big, tg5.support, 0.0);
    double oracle = mu5.weights.dot(pf * nested);
    CHECK(lab == doctest::Approx(oracle).epsilon(1e-12));

    CHECK_THROWS_AS(exact_fdd(model, mu, mu, {1.0, 0.5}, fns), BadParameters);
}

TEST_CASE("gap-diffusion fdd with an off-support start") {
    DiffusionModel model = make_diffusion(999);
    SmoothMeasure mu = diffusion_measure({{0.5, 1.0}});
    SmoothMeasure init = diffusion_measure({{0.25, 1.0}});
    Vec one = Vec::Ones(model.grid_n);
    double got = exact_fdd(model, init, mu, {0.8}, {FunctionOnX(one), FunctionOnX(one)});
    // tent(1/4) = 1/2 of the trace value e^{-2 t}
    CHECK(got == doctest::Approx(0.5 * std::exp(-1.6)).epsilon(1e-12));
}

TEST_SUITE_END();
