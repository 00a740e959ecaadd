#include "tclab/timechange.hpp"

#include <cmath>

#include <unsupported/Eigen/MatrixFunctions>

namespace tclab {

namespace {

constexpr double kValidationTol = 1e-9;
const std::vector<double> kValidationAlphas = {0.5, 1.0, 2.0, 10.0};

bool exactly_zero_on_f(const Vec& h) {
    for (Eigen::Index i = 0; i < h.size(); ++i)
        if (h(i) != 0.0) return false;
    return true;
}

}  // namespace

// harmonic extension of atom values: piecewise linear, absorbed at {0,1}
double harmonic_extension_value(const std::vector<double>& pts, const Vec& vals, double x) {
    if (pts.empty()) return 0.0;
    if (x <= pts.front()) return vals(0) * (x / pts.front());
    if (x >= pts.back()) return vals(vals.size() - 1) * (1.0 - x) / (1.0 - pts.back());
    for (size_t j = 0; j + 1 < pts.size(); ++j)
        if (x >= pts[j] && x <= pts[j + 1]) {
            double w = (x - pts[j]) / (pts[j + 1] - pts[j]);
            return vals(j) * (1.0 - w) + vals(j + 1) * w;
        }
    return 0.0;
}

namespace {

Vec tent_on_grid(const DiffusionModel& model, const std::vector<double>& pts, const Vec& vals) {
    Vec out(model.grid_n);
    for (int i = 0; i < model.grid_n; ++i) out(i) = harmonic_extension_value(pts, vals, model.grid(i));
    return out;
}

}  // namespace

TraceGenerator::TraceGenerator() : cache_(std::make_shared<ExpCache>()) {}

const Mat& TraceGenerator::expm(double t) const {
    std::lock_guard<std::mutex> guard(cache_->lock);
    auto it = cache_->entries.find(t);
    if (it == cache_->entries.end()) {
        Mat e = dim() ? Mat((t * matrix).exp()) : Mat(0, 0);
        it = cache_->entries.emplace(t, std::move(e)).first;
    }
    return it->second;
}

Vec TraceGenerator::restrict_to_f(const Vec& u, const DiffusionModel* model) const {
    Vec h(dim());
    if (backend == Backend::Chain) {
        for (int i = 0; i < dim(); ++i) h(i) = u(states[i]);
    } else {
        if (!model) throw BadParameters("diffusion restriction needs the model");
        for (int i = 0; i < dim(); ++i) h(i) = grid_interp(*model, u, points[i]);
    }
    return h;
}

TraceGenerator trace_generator(const ChainModel& model, const SmoothMeasure& mu) {
    TraceGenerator tg;
    tg.backend = Backend::Chain;
    tg.support = fine_support(model, mu);
    tg.states = tg.support.states;
    const int k = static_cast<int>(tg.states.size());
    const int n = model.size();

    tg.density_on_f.resize(k);
    for (int i = 0; i < k; ++i)
        tg.density_on_f(i) = mu.weights(tg.states[i]) / model.ref_measure(tg.states[i]);

    // Schur complement of the killed block, then the density scaling.
    std::vector<int> comp;
    for (int i = 0; i < n; ++i)
        if (!tg.support.contains(i)) comp.push_back(i);
    const int c = static_cast<int>(comp.size());

    Mat qff(k, k), qfc(k, c), qcf(c, k), qcc(c, c);
    for (int i = 0; i < k; ++i) {
        for (int j = 0; j < k; ++j) qff(i, j) = model.generator(tg.states[i], tg.states[j]);
        for (int j = 0; j < c; ++j) qfc(i, j) = model.generator(tg.states[i], comp[j]);
    }
    for (int i = 0; i < c; ++i) {
        for (int j = 0; j < k; ++j) qcf(i, j) = model.generator(comp[i], tg.states[j]);
        for (int j = 0; j < c; ++j) qcc(i, j) = model.generator(comp[i], comp[j]);
    }

    Mat hit = (c > 0 && k > 0) ? Mat(checked_solve(Mat(-qcc), qcf)) : Mat::Zero(c, k);
    Mat schur = qff;
    if (c > 0 && k > 0) schur += qfc * hit;
    tg.matrix = tg.density_on_f.cwiseInverse().asDiagonal() * schur;

    tg.extension = Mat::Zero(n, k);
    for (int i = 0; i < k; ++i) tg.extension(tg.states[i], i) = 1.0;
    for (int i = 0; i < c; ++i)
        for (int j = 0; j < k; ++j) tg.extension(comp[i], j) = hit(i, j);

    // defining validation: the |F|-dimensional resolvent must reproduce the
    // restriction of the closed-formula resolvent
    for (double a : kValidationAlphas) {
        Mat lhs = checked_solve(Mat(a * Mat::Identity(k, k) - tg.matrix), Mat(Mat::Identity(k, k)));
        Mat full = timechanged_resolvent_matrix(model, mu, a);
        Mat rhs(k, k);
        for (int i = 0; i < k; ++i)
            for (int j = 0; j < k; ++j) rhs(i, j) = full(tg.states[i], tg.states[j]);
        tg.validation_residual = std::max(tg.validation_residual, op_sup_norm(lhs - rhs));
    }
    if (tg.validation_residual > kValidationTol)
        throw ValidationFailed("trace generator disagrees with the resolvent formula: residual " +
                               std::to_string(tg.validation_residual));
    return tg;
}

TraceGenerator trace_generator(const DiffusionModel& model, const SmoothMeasure& mu) {
    if (mu.backend != Backend::Diffusion) throw BadParameters("measure backend mismatch");
    if (mu.has_density())
        throw BadParameters("diffusion trace generator needs a finite atom support");
    TraceGenerator tg;
    tg.backend = Backend::Diffusion;
    tg.support = fine_support(model, mu);
    const int k = static_cast<int>(mu.atoms.size());
    tg.points.resize(k);
    tg.density_on_f.resize(k);
    for (int i = 0; i < k; ++i) {
        tg.points[i] = mu.atoms[i].location;
        tg.density_on_f(i) = mu.atoms[i].weight;
    }

    // conductances 1/gap with Dirichlet ends at 0 and 1, generator (1/2) d^2/dx^2
    Mat lap = Mat::Zero(k, k);
    for (int i = 0; i < k; ++i) {
        double left = i == 0 ? tg.points[i] : tg.points[i] - tg.points[i - 1];
        double right = i + 1 == k ? 1.0 - tg.points[i] : tg.points[i + 1] - tg.points[i];
        lap(i, i) = 1.0 / left + 1.0 / right;
        if (i > 0) lap(i, i - 1) = -1.0 / left;
        if (i + 1 < k) lap(i, i + 1) = -1.0 / right;
    }
    if (k > 0)
        tg.matrix = -0.5 * tg.density_on_f.cwiseInverse().asDiagonal() * lap;
    else
        tg.matrix = Mat(0, 0);

    if (k > 0) {
        // validate against the dense rank-k resolvent solve (1 + a K W)^{-1} K W
        Mat kw(k, k);
        for (int i = 0; i < k; ++i)
            for (int j = 0; j < k; ++j)
                kw(i, j) = bm_green(tg.points[i], tg.points[j]) * tg.density_on_f(j);
        for (double a : kValidationAlphas) {
            Mat lhs = checked_solve(Mat(a * Mat::Identity(k, k) - tg.matrix), Mat(Mat::Identity(k, k)));
            Mat rhs = checked_solve(Mat(Mat::Identity(k, k) + a * kw), kw);
            tg.validation_residual = std::max(tg.validation_residual, op_sup_norm(lhs - rhs));
        }
        if (tg.validation_residual > kValidationTol)
            throw ValidationFailed("gap-diffusion trace generator disagrees with the resolvent: " +
                                   std::to_string(tg.validation_residual));
    }
    return tg;
}

Mat semigroup_matrix(const ChainModel& model, const TraceGenerator& tg, double t) {
    const int n = model.size();
    Mat restr = Mat::Zero(tg.dim(), n);
    for (int i = 0; i < tg.dim(); ++i) restr(i, tg.states[i]) = 1.0;
    if (t == 0.0) return tg.extension * restr;  // P_F, the strong limit convention
    return tg.extension * tg.expm(t) * restr;
}

FunctionOnX semigroup_apply(const ChainModel& model, const TraceGenerator& tg, double t,
                            const FunctionOnX& u) {
    if (t < 0.0) throw BadParameters("time must be nonnegative");
    if (u.values.size() != model.size()) throw BadParameters("function size mismatch");
    Vec h = tg.restrict_to_f(u.values);
    if (exactly_zero_on_f(h)) return FunctionOnX(Vec::Zero(model.size()), u.cls);
    if (t > 0.0) h = tg.expm(t) * h;
    return FunctionOnX(tg.extension * h, u.cls);
}

FunctionOnX semigroup_apply(const ChainModel& model, const SmoothMeasure& mu, double t,
                            const FunctionOnX& u) {
    return semigroup_apply(model, trace_generator(model, mu), t, u);
}

double semigroup_value(const DiffusionModel& model, const TraceGenerator& tg, double t,
                       const FunctionOnX& u, double x) {
    Vec h = tg.restrict_to_f(u.values, &model);
    if (t > 0.0 && tg.dim() > 0) h = tg.expm(t) * h;
    return harmonic_extension_value(tg.points, h, x);
}

FunctionOnX semigroup_apply(const DiffusionModel& model, const TraceGenerator& tg, double t,
                            const FunctionOnX& u) {
    if (t < 0.0) throw BadParameters("time must be nonnegative");
    if (u.values.size() != model.grid_n) throw BadParameters("function grid mismatch");
    Vec h = tg.restrict_to_f(u.values, &model);
    if (t > 0.0 && tg.dim() > 0) h = tg.expm(t) * h;
    return FunctionOnX(tent_on_grid(model, tg.points, h), FuncClass::C0);
}

FunctionOnX semigroup_apply(const DiffusionModel& model, const SmoothMeasure& mu, double t,
                            const FunctionOnX& u) {
    return semigroup_apply(model, trace_generator(model, mu), t, u);
}

Vec restricted_semigroup(const TraceGenerator& tg, double t, const Vec& h_on_f) {
    if (t < 0.0) throw BadParameters("time must be nonnegative");
    if (h_on_f.size() != tg.dim()) throw BadParameters("restricted function size mismatch");
    if (t == 0.0) return h_on_f;
    return tg.expm(t) * h_on_f;
}

Vec restricted_resolvent(const TraceGenerator& tg, double alpha, const Vec& h_on_f) {
    if (h_on_f.size() != tg.dim()) throw BadParameters("restricted function size mismatch");
    const int k = tg.dim();
    if (k == 0) return h_on_f;
    return checked_solve(Mat(alpha * Mat::Identity(k, k) - tg.matrix), h_on_f);
}

namespace {

Vec integrated_on_f(const TraceGenerator& tg, double t, const Vec& h) {
    if (t < 0.0) throw BadParameters("time must be nonnegative");
    const int k = tg.dim();
    if (k == 0 || t == 0.0) return Vec::Zero(k);
    // L_F is invertible by transience
    Mat delta = tg.expm(t) - Mat::Identity(k, k);
    return checked_solve(tg.matrix, Vec(delta * h));
}

}  // namespace

Vec restricted_integrated(const TraceGenerator& tg, double t, const Vec& h_on_f) {
    if (h_on_f.size() != tg.dim()) throw BadParameters("restricted function size mismatch");
    return integrated_on_f(tg, t, h_on_f);
}

FunctionOnX integrated_semigroup(const ChainModel& model, const TraceGenerator& tg, double t,
                                 const FunctionOnX& u) {
    Vec h = tg.restrict_to_f(u.values);
    if (exactly_zero_on_f(h) || t == 0.0) return FunctionOnX(Vec::Zero(model.size()), u.cls);
    return FunctionOnX(tg.extension * integrated_on_f(tg, t, h), u.cls);
}

FunctionOnX integrated_semigroup(const ChainModel& model, const SmoothMeasure& mu, double t,
                                 const FunctionOnX& u) {
    return integrated_semigroup(model, trace_generator(model, mu), t, u);
}

FunctionOnX integrated_semigroup(const DiffusionModel& model, const TraceGenerator& tg, double t,
                                 const FunctionOnX& u) {
    Vec h = tg.restrict_to_f(u.values, &model);
    Vec s = integrated_on_f(tg, t, h);
    return FunctionOnX(tent_on_grid(model, tg.points, s), FuncClass::C0);
}

double laplace_identity_residual(const ChainModel& model, const SmoothMeasure& mu,
                                 const TraceGenerator& tg, double alpha, const FunctionOnX& u,
                                 bool enforce) {
    if (alpha <= 0.0) throw BadParameters("Laplace check needs alpha > 0");
    const int k = tg.dim();
    if (k == 0) return 0.0;
    Vec h = tg.restrict_to_f(u.values);

    // truncate where e^{-alpha T} < 1e-12, composite Simpson with a matrix-step
    // recurrence for exp(t L_F)
    const double horizon = std::log(1e12) / alpha;
    const int segments = 2048;
    const double step = horizon / segments;
    Mat estep = tg.expm(step);
    Eigen::PartialPivLU<Mat> lf(tg.matrix);
    Mat ek = Mat::Identity(k, k);
    Vec acc = Vec::Zero(k);
    for (int j = 0; j <= segments; ++j) {
        double t = j * step;
        Vec st = lf.solve((ek - Mat::Identity(k, k)) * h);
        double weight = (j == 0 || j == segments) ? 1.0 : (j % 2 ? 4.0 : 2.0);
        acc += weight * alpha * std::exp(-alpha * t) * st;
        if (j < segments) ek = ek * estep;
    }
    acc *= step / 3.0;

    Vec direct = tg.restrict_to_f(timechanged_resolvent(model, mu, alpha, u).values);
    double residual = sup_norm(acc - direct);
    if (enforce && residual > 1e-6)
        throw ValidationFailed("Laplace identity residual " + std::to_string(residual));
    return residual;
}

namespace {

template <class Model>
bool relation_membership_impl(const Model& model, const SmoothMeasure& mu, double alpha,
                              const FunctionOnX& u, const FunctionOnX& w, double tol) {
    if (alpha <= 0.0) throw BadParameters("relation membership needs alpha > 0");
    FunctionOnX arg(Vec(w.values + alpha * u.values), u.cls);
    FunctionOnX back = timechanged_resolvent(model, mu, alpha, arg);
    return sup_norm(back.values - u.values) <= tol;
}

}  // namespace

bool relation_membership(const ChainModel& model, const SmoothMeasure& mu, double alpha,
                         const FunctionOnX& u, const FunctionOnX& w, double tol) {
    return relation_membership_impl(model, mu, alpha, u, w, tol);
}

bool relation_membership(const DiffusionModel& model, const SmoothMeasure& mu, double alpha,
                         const FunctionOnX& u, const FunctionOnX& w, double tol) {
    return relation_membership_impl(model, mu, alpha, u, w, tol);
}

namespace {

void derivative_diagnostics(const ChainModel& model, const TraceGenerator& tg,
                            const FunctionOnX& v, double t, bool heat,
                            SolutionDiagnostics* diag) {
    if (!diag || t <= 0.0 || tg.dim() == 0) return;
    double h = std::min(1e-4, t / 2);
    auto value = [&](double s) {
        return heat ? semigroup_apply(model, tg, s, v).values
                    : integrated_semigroup(model, tg, s, v).values;
    };
    Vec r = tg.restrict_to_f(v.values);
    Vec target = heat ? Vec(tg.extension * (tg.matrix * (tg.expm(t) * r)))
                      : Vec(tg.extension * (tg.expm(t) * r));  // d/dt S_t v = P-check_t v
    auto central = [&](double hh) { return Vec((value(t + hh) - value(t - hh)) / (2.0 * hh)); };
    Vec d = central(h);
    double res = sup_norm(d - target);
    if (res > 1e-6) {
        Vec rich = (4.0 * central(h / 2) - d) / 3.0;
        double res2 = sup_norm(rich - target);
        if (res2 < res) {
            res = res2;
            diag->richardson = true;
        }
    }
    diag->derivative_residual = res;
    diag->step = h;
}

}  // namespace

FunctionOnX heat_solution(const ChainModel& model, const SmoothMeasure& mu, const FunctionOnX& v,
                          double t, SolutionDiagnostics* diag) {
    TraceGenerator tg = trace_generator(model, mu);
    FunctionOnX out = semigroup_apply(model, tg, t, v);
    derivative_diagnostics(model, tg, v, t, true, diag);
    return out;
}

FunctionOnX evolution_solution(const ChainModel& model, const SmoothMeasure& mu,
                               const FunctionOnX& v, double t, SolutionDiagnostics* diag) {
    TraceGenerator tg = trace_generator(model, mu);
    FunctionOnX out = integrated_semigroup(model, tg, t, v);
    derivative_diagnostics(model, tg, v, t, false, diag);
    return out;
}

double exact_fdd(const ChainModel& model, const SmoothMeasure& mu_init, const SmoothMeasure& mu,
                 const std::vector<double>& times, const std::vector<FunctionOnX>& functions) {
    if (times.empty()) throw BadParameters("fdd needs at least one time");
    if (functions.size() != times.size() + 1)
        throw BadParameters("fdd needs k+1 functions for k times");
    for (size_t i = 0; i < times.size(); ++i)
        if (times[i] <= (i ? times[i - 1] : 0.0))
            throw BadParameters("fdd times must be strictly increasing and positive");

    TraceGenerator tg = trace_generator(model, mu);
    Vec g = functions.back().values;
    for (size_t i = times.size(); i-- > 0;) {
        double delta = times[i] - (i ? times[i - 1] : 0.0);
        g = semigroup_apply(model, tg, delta, FunctionOnX(g)).values;
        g = functions[i].values.cwiseProduct(g);
    }
    Vec paired = tg.extension * tg.restrict_to_f(g);  // P_F of the final product
    return mu_init.weights.dot(paired);
}

double exact_fdd(const DiffusionModel& model, const SmoothMeasure& mu_init,
                 const SmoothMeasure& mu, const std::vector<double>& times,
                 const std::vector<FunctionOnX>& functions) {
    if (times.empty()) throw BadParameters("fdd needs at least one time");
    if (functions.size() != times.size() + 1)
        throw BadParameters("fdd needs k+1 functions for k times");
    for (size_t i = 0; i < times.size(); ++i)
        if (times[i] <= (i ? times[i - 1] : 0.0))
            throw BadParameters("fdd times must be strictly increasing and positive");

    TraceGenerator tg = trace_generator(model, mu);
    const int k = tg.dim();
    Vec g = tg.restrict_to_f(functions.back().values, &model);
    for (size_t i = times.size(); i-- > 0;) {
        double delta = times[i] - (i ? times[i - 1] : 0.0);
        if (k > 0) g = tg.expm(delta) * g;
        for (int j = 0; j < k; ++j)
            g(j) *= grid_interp(model, functions[i].values, tg.points[j]);
    }
    double s = 0.0;
    for (const Atom& a : mu_init.atoms) s += harmonic_extension_value(tg.points, g, a.location) * a.weight;
    if (mu_init.has_density()) {
        const double h = model.spacing();
        for (int i = 0; i < model.grid_n; ++i)
            s += h * harmonic_extension_value(tg.points, g, model.grid(i)) * mu_init.density(i);
    }
    return s;
}

}  // namespace tclab
