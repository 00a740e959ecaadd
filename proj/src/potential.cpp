#include "tclab/potential.hpp"

#include <algorithm>
#include <cmath>

#include "tclab/rng.hpp"

namespace tclab {

namespace {

constexpr double kExactTol = 1e-12;

int mat_rank(const Mat& m, double rel_tol = 1e-10) {
    if (m.size() == 0) return 0;
    Eigen::ColPivHouseholderQR<Mat> qr;
    qr.setThreshold(rel_tol);
    qr.compute(m);
    return static_cast<int>(qr.rank());
}

bool vanishes_on_support(const SmoothMeasure& mu, const Vec& u) {
    for (Eigen::Index i = 0; i < mu.weights.size(); ++i)
        if (mu.weights(i) > 0.0 && u(i) != 0.0) return false;
    return true;
}

std::vector<int> complement(const std::vector<int>& states, int n) {
    std::vector<int> out;
    size_t k = 0;
    for (int i = 0; i < n; ++i) {
        if (k < states.size() && states[k] == i)
            ++k;
        else
            out.push_back(i);
    }
    return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// chain backend
// ---------------------------------------------------------------------------

Mat potential_matrix(const ChainModel& model, const SmoothMeasure& mu, double alpha) {
    if (mu.backend != Backend::Chain || mu.weights.size() != model.size())
        throw BadParameters("measure does not match the chain model");
    ResolventKernel rk = resolvent_kernel(model, alpha);
    // kernel entries against the measure: column y picks up the mass mu_y
    return rk.kernel * mu.weights.asDiagonal();
}

FunctionOnX potential_apply(const ChainModel& model, const SmoothMeasure& mu, double alpha,
                            const FunctionOnX& u) {
    if (u.values.size() != model.size()) throw BadParameters("function size mismatch");
    return FunctionOnX(potential_matrix(model, mu, alpha) * u.values, u.cls);
}

Mat timechanged_resolvent_matrix(const ChainModel& model, const SmoothMeasure& mu, double alpha) {
    if (alpha < 0.0) throw BadParameters("resolvent order must be nonnegative");
    const int n = model.size();
    Mat g = potential_matrix(model, mu, 0.0);
    return checked_solve(Mat::Identity(n, n) + alpha * g, g);
}

FunctionOnX timechanged_resolvent(const ChainModel& model, const SmoothMeasure& mu, double alpha,
                                  const FunctionOnX& u) {
    if (u.values.size() != model.size()) throw BadParameters("function size mismatch");
    if (vanishes_on_support(mu, u.values))
        return FunctionOnX(Vec::Zero(model.size()), u.cls);  // degenerate input, no solve
    Mat g = potential_matrix(model, mu, 0.0);
    Vec rhs = g * u.values;
    Vec w = checked_solve(Mat::Identity(model.size(), model.size()) + alpha * g, rhs);
    return FunctionOnX(std::move(w), u.cls);
}

Mat hitting_matrix(const ChainModel& model, const FineSupport& support, double alpha) {
    if (support.backend != Backend::Chain) throw BadParameters("support backend mismatch");
    const int n = model.size();
    Mat p = Mat::Zero(n, n);
    const std::vector<int>& f = support.states;
    for (int i : f) p(i, i) = 1.0;
    std::vector<int> c = complement(f, n);
    if (!c.empty() && !f.empty()) {
        Mat a(c.size(), c.size());
        Mat b(c.size(), f.size());
        for (size_t r = 0; r < c.size(); ++r) {
            for (size_t s = 0; s < c.size(); ++s)
                a(r, s) = (r == s ? alpha : 0.0) - model.generator(c[r], c[s]);
            for (size_t s = 0; s < f.size(); ++s) b(r, s) = model.generator(c[r], f[s]);
        }
        Mat h = checked_solve(a, b);
        for (size_t r = 0; r < c.size(); ++r)
            for (size_t s = 0; s < f.size(); ++s) p(c[r], f[s]) = h(r, s);
    }
    return p;
}

FunctionOnX hitting_apply(const ChainModel& model, const FineSupport& support,
                          const FunctionOnX& u, double alpha) {
    if (u.values.size() != model.size()) throw BadParameters("function size mismatch");
    return FunctionOnX(hitting_matrix(model, support, alpha) * u.values, u.cls);
}

FunctionOnX phi_A(const ChainModel& model, const SmoothMeasure& mu) {
    FineSupport f = fine_support(model, mu);
    FunctionOnX one(Vec::Ones(model.size()), FuncClass::Bb);
    FunctionOnX phi = hitting_apply(model, f, one, 1.0);
    for (int i : f.states) phi.values(i) = 1.0;  // exact on F by construction
    return phi;
}

// ---------------------------------------------------------------------------
// diffusion backend
// ---------------------------------------------------------------------------

double potential_value(const DiffusionModel& model, const SmoothMeasure& mu, double alpha,
                       const FunctionOnX& u, double x) {
    if (mu.backend != Backend::Diffusion) throw BadParameters("measure backend mismatch");
    double s = 0.0;
    for (const Atom& a : mu.atoms)
        s += bm_green_alpha(x, a.location, alpha) * grid_interp(model, u.values, a.location) *
             a.weight;
    if (mu.has_density()) {
        const double h = model.spacing();
        for (int j = 0; j < model.grid_n; ++j)
            s += h * bm_green_alpha(x, model.grid(j), alpha) * u.values(j) * mu.density(j);
    }
    if (!std::isfinite(s)) throw QuadratureFailure("potential quadrature produced a non-finite value");
    return s;
}

FunctionOnX potential_apply(const DiffusionModel& model, const SmoothMeasure& mu, double alpha,
                            const FunctionOnX& u) {
    if (u.values.size() != model.grid_n) throw BadParameters("function grid mismatch");
    Vec out(model.grid_n);
    for (int i = 0; i < model.grid_n; ++i)
        out(i) = potential_value(model, mu, alpha, u, model.grid(i));
    return FunctionOnX(std::move(out), FuncClass::C0);
}

DiffusionResolvent timechanged_resolvent_solve(const DiffusionModel& model,
                                               const SmoothMeasure& mu, double alpha,
                                               const FunctionOnX& u) {
    if (mu.backend != Backend::Diffusion) throw BadParameters("measure backend mismatch");
    if (u.values.size() != model.grid_n) throw BadParameters("function grid mismatch");
    if (alpha < 0.0) throw BadParameters("resolvent order must be nonnegative");

    DiffusionResolvent r;
    r.model = &model;
    r.mu = mu;
    r.alpha = alpha;

    const int k = static_cast<int>(mu.atoms.size());
    const int nd = mu.has_density() ? model.grid_n : 0;
    r.rhs_u_atoms.resize(k);
    for (int j = 0; j < k; ++j) r.rhs_u_atoms(j) = grid_interp(model, u.values, mu.atoms[j].location);
    if (nd) r.rhs_u_grid = u.values;

    if (k == 1 && nd == 0) {
        // rank-one case: closed Sherman--Morrison form
        const Atom& a = mu.atoms[0];
        double gcc = bm_green(a.location, a.location);
        r.f_atoms.resize(1);
        r.f_atoms(0) = gcc * a.weight * r.rhs_u_atoms(0) / (1.0 + alpha * a.weight * gcc);
        return r;
    }

    const int dim = k + nd;
    if (dim == 0) return r;

    // collocation points: atoms first, then the grid
    auto point = [&](int p) { return p < k ? mu.atoms[p].location : model.grid(p - k); };
    const double h = model.spacing();
    Mat m(dim, dim);
    Vec rhs(dim);
    for (int p = 0; p < dim; ++p) {
        double x = point(p);
        for (int j = 0; j < k; ++j) m(p, j) = bm_green(x, mu.atoms[j].location) * mu.atoms[j].weight;
        for (int j = 0; j < nd; ++j) m(p, k + j) = h * bm_green(x, model.grid(j)) * mu.density(j);
        rhs(p) = potential_value(model, mu, 0.0, u, x);
    }
    Vec f = checked_solve(Mat::Identity(dim, dim) + alpha * m, rhs);
    r.f_atoms = f.head(k);
    if (nd) r.f_grid = f.tail(nd);
    return r;
}

double DiffusionResolvent::eval(double x) const {
    const int k = static_cast<int>(mu.atoms.size());
    double gu = 0.0, gf = 0.0;
    for (int j = 0; j < k; ++j) {
        double g = bm_green(x, mu.atoms[j].location) * mu.atoms[j].weight;
        gu += g * rhs_u_atoms(j);
        gf += g * (f_atoms.size() ? f_atoms(j) : 0.0);
    }
    if (mu.has_density()) {
        const double h = model->spacing();
        for (int j = 0; j < model->grid_n; ++j) {
            double g = h * bm_green(x, model->grid(j)) * mu.density(j);
            gu += g * rhs_u_grid(j);
            gf += g * f_grid(j);
        }
    }
    return gu - alpha * gf;
}

Vec DiffusionResolvent::on_grid() const {
    if (!model) return Vec();
    if (mu.has_density() && f_grid.size() == model->grid_n && alpha >= 0.0) {
        // the grid block of the collocation solve already holds R-check u
        if (mu.atoms.empty()) return f_grid;
    }
    Vec out(model->grid_n);
    for (int i = 0; i < model->grid_n; ++i) out(i) = eval(model->grid(i));
    return out;
}

FunctionOnX timechanged_resolvent(const DiffusionModel& model, const SmoothMeasure& mu,
                                  double alpha, const FunctionOnX& u) {
    DiffusionResolvent r = timechanged_resolvent_solve(model, mu, alpha, u);
    if (mu.atoms.empty() && !mu.has_density())
        return FunctionOnX(Vec::Zero(model.grid_n), FuncClass::C0);
    return FunctionOnX(r.on_grid(), FuncClass::C0);
}

double hitting_value(const DiffusionModel& model, const FineSupport& support,
                     const FunctionOnX& u, double x) {
    if (support.backend != Backend::Diffusion) throw BadParameters("support backend mismatch");
    if (support.full) return grid_interp(model, u.values, x);
    if (support.intervals.empty()) return 0.0;
    auto uval = [&](double p) { return grid_interp(model, u.values, p); };

    const auto& iv = support.intervals;
    if (x <= iv.front().first) {
        double q = iv.front().first;
        return uval(q) * (x / q);  // linear from the absorbed boundary 0
    }
    if (x >= iv.back().second) {
        double p = iv.back().second;
        return uval(p) * (1.0 - x) / (1.0 - p);
    }
    for (size_t i = 0; i < iv.size(); ++i) {
        if (x >= iv[i].first && x <= iv[i].second) return uval(x);
        if (i + 1 < iv.size() && x > iv[i].second && x < iv[i + 1].first) {
            double p = iv[i].second, q = iv[i + 1].first;
            double w = (x - p) / (q - p);
            return uval(p) * (1.0 - w) + uval(q) * w;
        }
    }
    return uval(x);
}

FunctionOnX hitting_apply(const DiffusionModel& model, const FineSupport& support,
                          const FunctionOnX& u) {
    if (u.values.size() != model.grid_n) throw BadParameters("function grid mismatch");
    Vec out(model.grid_n);
    for (int i = 0; i < model.grid_n; ++i)
        out(i) = hitting_value(model, support, u, model.grid(i));
    return FunctionOnX(std::move(out), u.cls);
}

double phi_A_value(const DiffusionModel& model, const FineSupport& support, double x) {
    if (!(x > 0.0 && x < 1.0)) throw OutOfDomain("phi evaluation point must lie in (0,1)");
    if (support.full) return 1.0;
    if (support.intervals.empty()) return 0.0;
    const double s = std::sqrt(2.0);
    const auto& iv = support.intervals;
    if (x <= iv.front().first) {
        double q = iv.front().first;
        return x == q ? 1.0 : std::sinh(s * x) / std::sinh(s * q);
    }
    if (x >= iv.back().second) {
        double p = iv.back().second;
        return x == p ? 1.0 : std::sinh(s * (1.0 - x)) / std::sinh(s * (1.0 - p));
    }
    for (size_t i = 0; i < iv.size(); ++i) {
        if (x >= iv[i].first && x <= iv[i].second) return 1.0;
        if (i + 1 < iv.size() && x > iv[i].second && x < iv[i + 1].first) {
            double p = iv[i].second, q = iv[i + 1].first;
            return (std::sinh(s * (q - x)) + std::sinh(s * (x - p))) / std::sinh(s * (q - p));
        }
    }
    return 1.0;
}

FunctionOnX phi_A(const DiffusionModel& model, const SmoothMeasure& mu) {
    FineSupport f = fine_support(model, mu);
    Vec out(model.grid_n);
    for (int i = 0; i < model.grid_n; ++i) out(i) = phi_A_value(model, f, model.grid(i));
    return FunctionOnX(std::move(out), FuncClass::Bb);
}

// ---------------------------------------------------------------------------
// structural checks
// ---------------------------------------------------------------------------

ResolventResidual resolvent_equation_residual(const ChainModel& model, const SmoothMeasure& mu,
                                              double alpha, double beta) {
    Mat ra = timechanged_resolvent_matrix(model, mu, alpha);
    Mat rb = timechanged_resolvent_matrix(model, mu, beta);
    ResolventResidual out;
    out.residual = op_sup_norm(ra - rb - (beta - alpha) * ra * rb);
    out.alpha_norm = alpha * op_sup_norm(ra);
    out.beta_norm = beta * op_sup_norm(rb);
    return out;
}

KernelRangeReport kernel_range_check(const ChainModel& model, const SmoothMeasure& mu,
                                     const std::vector<double>& alphas) {
    if (alphas.empty()) throw BadParameters("kernel_range_check needs at least one alpha");
    FineSupport f = fine_support(model, mu);
    const int n = model.size();
    KernelRangeReport rep;
    rep.rank = static_cast<int>(f.states.size());

    std::vector<Mat> rs;
    rs.reserve(alphas.size());
    for (double a : alphas) rs.push_back(timechanged_resolvent_matrix(model, mu, a));

    for (const Mat& r : rs) {
        double scale = std::max(1.0, op_sup_norm(r));
        for (int j = 0; j < n; ++j)
            if (!f.contains(j) && r.col(j).cwiseAbs().maxCoeff() > kExactTol * scale)
                rep.kernel_matches_degenerate = false;
        if (mat_rank(r) != rep.rank) rep.kernel_matches_degenerate = false;
    }

    Mat stacked(n, n * rs.size());
    for (size_t i = 0; i < rs.size(); ++i) stacked.middleCols(i * n, n) = rs[i];
    if (mat_rank(stacked) != rep.rank) rep.range_alpha_independent = false;

    for (size_t i = 0; i + 1 < rs.size(); ++i)
        if (mat_rank(rs[i] * rs[i + 1]) != rep.rank) rep.injective_on_range = false;
    return rep;
}

namespace {

StrongLimitCurve finish_strong_limit(std::vector<StrongLimitPoint> pts) {
    StrongLimitCurve c;
    c.points = std::move(pts);
    bool all_zero = true;
    c.decreasing = true;
    for (size_t i = 0; i < c.points.size(); ++i) {
        if (c.points[i].error > 1e-14) all_zero = false;
        if (i > 0 && c.points[i].error > c.points[i - 1].error * (1.0 + 1e-9) + 1e-14)
            c.decreasing = false;
    }
    if (all_zero) {
        c.converged = true;
        return c;
    }
    size_t head = std::min<size_t>(3, c.points.size());
    for (size_t i = 0; i < head; ++i)
        c.envelope_c = std::max(c.envelope_c, c.points[i].error * c.points[i].alpha);
    const StrongLimitPoint& last = c.points.back();
    c.converged = c.decreasing && last.error <= 10.0 * c.envelope_c / last.alpha + 1e-14;
    return c;
}

}  // namespace

StrongLimitCurve strong_limit_check(const ChainModel& model, const SmoothMeasure& mu,
                                    const FunctionOnX& u, const std::vector<double>& alpha_grid) {
    FineSupport f = fine_support(model, mu);
    Vec target = hitting_matrix(model, f, 0.0) * u.values;
    std::vector<StrongLimitPoint> pts;
    for (double a : alpha_grid) {
        Vec v = a * timechanged_resolvent(model, mu, a, u).values;
        pts.push_back({a, sup_norm(v - target)});
    }
    return finish_strong_limit(std::move(pts));
}

StrongLimitCurve strong_limit_check(const DiffusionModel& model, const SmoothMeasure& mu,
                                    const FunctionOnX& u, const std::vector<double>& alpha_grid) {
    if (u.cls != FuncClass::C0) throw BadParameters("strong limit check expects a C0-class input");
    FineSupport f = fine_support(model, mu);
    std::vector<double> points(model.grid.data(), model.grid.data() + model.grid_n);
    for (const Atom& a : mu.atoms) points.push_back(a.location);
    std::vector<StrongLimitPoint> pts;
    for (double a : alpha_grid) {
        DiffusionResolvent r = timechanged_resolvent_solve(model, mu, a, u);
        double err = 0.0;
        for (double x : points)
            err = std::max(err, std::abs(a * r.eval(x) - hitting_value(model, f, u, x)));
        pts.push_back({a, err});
    }
    return finish_strong_limit(std::move(pts));
}

bool range_identity_check(const ChainModel& model, const SmoothMeasure& mu, double alpha) {
    FineSupport f = fine_support(model, mu);
    Mat g = potential_matrix(model, mu, 0.0);
    Mat r = timechanged_resolvent_matrix(model, mu, alpha);
    Mat p = hitting_matrix(model, f, 0.0);

    double scale = std::max(1.0, op_sup_norm(g));
    if (op_sup_norm(p * g - g) > kExactTol * scale) return false;

    const int expect = static_cast<int>(f.states.size());
    if (mat_rank(g) != expect || mat_rank(r) != expect || mat_rank(p) != expect) return false;
    Mat stacked(model.size(), 3 * model.size());
    stacked << g, r, p;
    return mat_rank(stacked) == expect;
}

CmpReport cmp_check(const ChainModel& model, const SmoothMeasure& mu, int trials,
                    std::uint64_t seed) {
    if (trials < 1) throw BadParameters("cmp_check needs at least one trial");
    const int n = model.size();
    Mat g = potential_matrix(model, mu, 0.0);
    const double scale = std::max(1.0, op_sup_norm(g));

    CmpReport rep;
    rep.trials = trials;
    SplitMix64 rng = derive_stream(seed, 0xC3A5u);
    for (int t = 0; t < trials; ++t) {
        Vec u(n), v(n);
        for (int i = 0; i < n; ++i) {
            u(i) = rng.uniform01() < 0.3 ? 0.0 : 2.0 * rng.uniform01();
            v(i) = rng.uniform01() < 0.3 ? 0.0 : 2.0 * rng.uniform01();
        }
        Vec gu = g * u, gv = g * v;
        double c;
        if (rng.uniform01() < 0.5) {
            // force the premise to hold with equality somewhere on {u > 0}
            double worst = 0.0;
            for (int i = 0; i < n; ++i)
                if (u(i) > 0.0) worst = std::max(worst, gu(i) - gv(i));
            c = worst + 0.1 * rng.uniform01();
        } else {
            c = 2.0 * rng.uniform01();
        }
        bool premise = true;
        for (int i = 0; i < n; ++i)
            if (u(i) > 0.0 && gu(i) > gv(i) + c + kExactTol * scale) premise = false;
        if (!premise) continue;
        ++rep.premise_hits;
        for (int i = 0; i < n; ++i) {
            double excess = gu(i) - gv(i) - c;
            if (excess > 1e-10 * scale) {
                ++rep.violations;
                rep.worst_excess = std::max(rep.worst_excess, excess);
            }
        }
    }

    rep.sub_markov_ok = true;
    for (double a : {0.5, 1.0, 5.0}) {
        Vec r1 = a * (timechanged_resolvent_matrix(model, mu, a) * Vec::Ones(n));
        if ((r1.array() > 1.0 + 1e-12).any() || (r1.array() < -1e-12).any())
            rep.sub_markov_ok = false;
    }
    if (rep.violations > 0)
        throw CounterexampleFound("complete maximum principle violated, worst excess " +
                                  std::to_string(rep.worst_excess));
    return rep;
}

NormalityReport normality_check(const ChainModel& model, const SmoothMeasure& mu) {
    FineSupport f = fine_support(model, mu);
    const int n = model.size();
    Mat p = hitting_matrix(model, f, 0.0);
    NormalityReport rep;
    rep.full_support = f.full;
    rep.hitting_is_identity = op_sup_norm(p - Mat::Identity(n, n)) <= kExactTol;
    rep.hitting_injective = mat_rank(p) == n;
    rep.resolvent_injective_1 = mat_rank(timechanged_resolvent_matrix(model, mu, 1.0)) == n;
    rep.resolvent_injective_2 = mat_rank(timechanged_resolvent_matrix(model, mu, 2.0)) == n;
    return rep;
}

std::vector<double> revuz_recovery_errors(const ChainModel& model, const SmoothMeasure& mu,
                                          const FunctionOnX& u,
                                          const std::vector<double>& alpha_grid) {
    double target = mu.weights.dot(u.values);
    std::vector<double> errors;
    errors.reserve(alpha_grid.size());
    for (double a : alpha_grid) {
        Vec pot = potential_matrix(model, mu, a) * u.values;
        errors.push_back(std::abs(a * model.ref_measure.dot(pot) - target));
    }
    return errors;
}

}  // namespace tclab
