#ifndef TCLAB_TIMECHANGE_HPP
#define TCLAB_TIMECHANGE_HPP

#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "tclab/potential.hpp"

namespace tclab {

/// Generator of the trace process on the fine support F, together with the
/// P_F-extension back to X.  Chain: density-scaled Schur complement of Q.
/// Diffusion (finite atom support): nearest-neighbour conductances from
/// harmonic extension with Dirichlet ends, scaled by the atom masses.
/// Always validated against the resolvent formula before use.
struct TraceGenerator {
    Backend backend = Backend::Chain;
    FineSupport support;
    std::vector<int> states;    // chain: F as state indices
    std::vector<double> points; // diffusion: atom locations
    Vec density_on_f;           // chain: mu/m on F; diffusion: atom weights
    Mat matrix;                 // L_F
    Mat extension;              // chain: N x |F| matrix of P_F composed with extension
    double validation_residual = 0.0;

    int dim() const { return static_cast<int>(matrix.rows()); }
    const Mat& expm(double t) const;
    Vec restrict_to_f(const Vec& u, const DiffusionModel* model = nullptr) const;

    TraceGenerator();

private:
    struct ExpCache {
        std::mutex lock;
        std::map<double, Mat> entries;
    };
    std::shared_ptr<ExpCache> cache_;
};

TraceGenerator trace_generator(const ChainModel& model, const SmoothMeasure& mu);
TraceGenerator trace_generator(const DiffusionModel& model, const SmoothMeasure& mu);

/// Piecewise-linear extension of values at atom points, absorbed at {0,1}.
double harmonic_extension_value(const std::vector<double>& points, const Vec& values, double x);

/// P-check_t u as a dense matrix on the chain; t = 0 yields P_F.
Mat semigroup_matrix(const ChainModel& model, const TraceGenerator& tg, double t);

/// P-check_t u = P_F-extension of exp(t L_F)(u|_F); P-check_0 := P_F (the
/// strong limit, not the identity).
FunctionOnX semigroup_apply(const ChainModel& model, const SmoothMeasure& mu, double t,
                            const FunctionOnX& u);
FunctionOnX semigroup_apply(const ChainModel& model, const TraceGenerator& tg, double t,
                            const FunctionOnX& u);
FunctionOnX semigroup_apply(const DiffusionModel& model, const SmoothMeasure& mu, double t,
                            const FunctionOnX& u);
FunctionOnX semigroup_apply(const DiffusionModel& model, const TraceGenerator& tg, double t,
                            const FunctionOnX& u);
double semigroup_value(const DiffusionModel& model, const TraceGenerator& tg, double t,
                       const FunctionOnX& u, double x);

/// Restricted semigroup T-check_t and resolvent V_alpha on F; h is given on
/// the support points/states.
Vec restricted_semigroup(const TraceGenerator& tg, double t, const Vec& h_on_f);
Vec restricted_resolvent(const TraceGenerator& tg, double alpha, const Vec& h_on_f);
Vec restricted_integrated(const TraceGenerator& tg, double t, const Vec& h_on_f);

/// S-check_t u = P_F-extension of L_F^{-1}(exp(t L_F) - 1)(u|_F).
FunctionOnX integrated_semigroup(const ChainModel& model, const TraceGenerator& tg, double t,
                                 const FunctionOnX& u);
FunctionOnX integrated_semigroup(const ChainModel& model, const SmoothMeasure& mu, double t,
                                 const FunctionOnX& u);
FunctionOnX integrated_semigroup(const DiffusionModel& model, const TraceGenerator& tg, double t,
                                 const FunctionOnX& u);

/// Quadrature residual of the Laplace identity R_alpha = alpha int e^{-alpha t} S_t dt
/// on F; throws ValidationFailed above 1e-6 when `enforce` is set.
double laplace_identity_residual(const ChainModel& model, const SmoothMeasure& mu,
                                 const TraceGenerator& tg, double alpha, const FunctionOnX& u,
                                 bool enforce = false);

/// Membership test for the linear relation: w belongs to L_rel u - alpha-shifted
/// inclusions iff R_alpha(w + alpha u) = u.
bool relation_membership(const ChainModel& model, const SmoothMeasure& mu, double alpha,
                         const FunctionOnX& u, const FunctionOnX& w, double tol = 1e-9);
bool relation_membership(const DiffusionModel& model, const SmoothMeasure& mu, double alpha,
                         const FunctionOnX& u, const FunctionOnX& w, double tol = 1e-9);

struct SolutionDiagnostics {
    double derivative_residual = 0.0;  // finite-difference derivative vs generator action
    double step = 0.0;
    bool richardson = false;
};

/// u(t) = P-check_t v, the classical solution of the heat equation with
/// initial value interpreted as P_F v.
FunctionOnX heat_solution(const ChainModel& model, const SmoothMeasure& mu, const FunctionOnX& v,
                          double t, SolutionDiagnostics* diag = nullptr);

/// u(t) = S-check_t v, the classical solution of the evolution equation with
/// u(0) = 0.
FunctionOnX evolution_solution(const ChainModel& model, const SmoothMeasure& mu,
                               const FunctionOnX& v, double t,
                               SolutionDiagnostics* diag = nullptr);

/// Exact finite-dimensional distribution
/// int P_F( u_0 . P-check_{t_1}( u_1 ... P-check_{t_k - t_{k-1}} u_k ) ) dmu_init.
double exact_fdd(const ChainModel& model, const SmoothMeasure& mu_init, const SmoothMeasure& mu,
                 const std::vector<double>& times, const std::vector<FunctionOnX>& functions);
double exact_fdd(const DiffusionModel& model, const SmoothMeasure& mu_init,
                 const SmoothMeasure& mu, const std::vector<double>& times,
                 const std::vector<FunctionOnX>& functions);

}  // namespace tclab

#endif
