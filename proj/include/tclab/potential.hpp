#ifndef TCLAB_POTENTIAL_HPP
#define TCLAB_POTENTIAL_HPP

#include <cstdint>
#include <vector>

#include "tclab/measure.hpp"

namespace tclab {

// ---------------------------------------------------------------------------
// chain backend: everything is a dense matrix on the state space
// ---------------------------------------------------------------------------

/// G_alpha^mu as a matrix: u |-> int G_alpha(.,y) u(y) dmu(y), assembled from
/// the kernel entries times the measure weights.
Mat potential_matrix(const ChainModel& model, const SmoothMeasure& mu, double alpha = 0.0);

/// Time-changed resolvent R-check_alpha as a matrix, from the closed formula
/// (1 + alpha G^mu)^{-1} G^mu.
Mat timechanged_resolvent_matrix(const ChainModel& model, const SmoothMeasure& mu, double alpha);

/// Hitting operator P_F^alpha as a matrix: identity rows on F, the
/// (alpha I - Q_{F^c F^c})^{-1} Q_{F^c F} solve off F.  Columns off F vanish.
Mat hitting_matrix(const ChainModel& model, const FineSupport& support, double alpha = 0.0);

FunctionOnX potential_apply(const ChainModel& model, const SmoothMeasure& mu, double alpha,
                            const FunctionOnX& u);
FunctionOnX timechanged_resolvent(const ChainModel& model, const SmoothMeasure& mu, double alpha,
                                  const FunctionOnX& u);
FunctionOnX hitting_apply(const ChainModel& model, const FineSupport& support,
                          const FunctionOnX& u, double alpha = 0.0);

/// phi^A = P_F^1 1: equals 1 exactly on F, E_x(e^{-sigma_F}) off F.
FunctionOnX phi_A(const ChainModel& model, const SmoothMeasure& mu);

// ---------------------------------------------------------------------------
// diffusion backend: atom sums plus Nystrom quadrature on the grid
// ---------------------------------------------------------------------------

FunctionOnX potential_apply(const DiffusionModel& model, const SmoothMeasure& mu, double alpha,
                            const FunctionOnX& u);
double potential_value(const DiffusionModel& model, const SmoothMeasure& mu, double alpha,
                       const FunctionOnX& u, double x);

/// Second-kind solve (1 + alpha G^mu) w = G^mu u, atoms eliminated first,
/// then the density block; a single atom short-circuits to the rank-one
/// closed form.
struct DiffusionResolvent {
    const DiffusionModel* model = nullptr;
    SmoothMeasure mu;
    double alpha = 0.0;
    Vec f_atoms;  // solution values at the atoms of mu
    Vec f_grid;   // solution values on the grid (only when mu has a density)
    Vec rhs_u_atoms;
    Vec rhs_u_grid;

    double eval(double x) const;
    Vec on_grid() const;
};

DiffusionResolvent timechanged_resolvent_solve(const DiffusionModel& model,
                                               const SmoothMeasure& mu, double alpha,
                                               const FunctionOnX& u);
FunctionOnX timechanged_resolvent(const DiffusionModel& model, const SmoothMeasure& mu,
                                  double alpha, const FunctionOnX& u);

/// P_F u for a closed F: u on F, harmonic (piecewise-linear) interpolation on
/// the gaps, pinned to 0 at the boundary.
FunctionOnX hitting_apply(const DiffusionModel& model, const FineSupport& support,
                          const FunctionOnX& u);
double hitting_value(const DiffusionModel& model, const FineSupport& support,
                     const FunctionOnX& u, double x);

/// phi^A off F through the exponential hitting transforms of Brownian motion
/// (solutions of u'' = 2u on each gap, absorbed at the boundary).
FunctionOnX phi_A(const DiffusionModel& model, const SmoothMeasure& mu);
double phi_A_value(const DiffusionModel& model, const FineSupport& support, double x);

// ---------------------------------------------------------------------------
// structural checks
// ---------------------------------------------------------------------------

struct ResolventResidual {
    double residual = 0.0;    // ||R_a - R_b - (b-a) R_a R_b||_inf
    double alpha_norm = 0.0;  // ||alpha R_alpha||_inf
    double beta_norm = 0.0;
};

ResolventResidual resolvent_equation_residual(const ChainModel& model, const SmoothMeasure& mu,
                                              double alpha, double beta);

struct KernelRangeReport {
    bool kernel_matches_degenerate = true;  // ker(R_alpha) = {u : u|_F = 0}
    bool range_alpha_independent = true;
    bool injective_on_range = true;
    int rank = 0;

    bool ok() const {
        return kernel_matches_degenerate && range_alpha_independent && injective_on_range;
    }
};

KernelRangeReport kernel_range_check(const ChainModel& model, const SmoothMeasure& mu,
                                     const std::vector<double>& alphas);

struct StrongLimitPoint {
    double alpha = 0.0;
    double error = 0.0;  // ||alpha R_alpha u - P_F u||_inf
};

struct StrongLimitCurve {
    std::vector<StrongLimitPoint> points;
    double envelope_c = 0.0;  // fitted C in the C/alpha envelope
    bool decreasing = false;
    bool converged = false;  // last error below 10x the fitted envelope
};

StrongLimitCurve strong_limit_check(const ChainModel& model, const SmoothMeasure& mu,
                                    const FunctionOnX& u, const std::vector<double>& alpha_grid);
StrongLimitCurve strong_limit_check(const DiffusionModel& model, const SmoothMeasure& mu,
                                    const FunctionOnX& u, const std::vector<double>& alpha_grid);

/// closure(ran R_alpha) = closure(ran G^mu) = P_F(C_0), and P_F G^mu = G^mu.
bool range_identity_check(const ChainModel& model, const SmoothMeasure& mu, double alpha);

struct CmpReport {
    int trials = 0;
    int premise_hits = 0;
    int violations = 0;
    double worst_excess = 0.0;
    bool sub_markov_ok = false;  // alpha R_alpha 1 <= 1 directly

    bool ok() const { return violations == 0 && sub_markov_ok; }
};

/// Randomized audit of the complete maximum principle for G^mu.
CmpReport cmp_check(const ChainModel& model, const SmoothMeasure& mu, int trials, std::uint64_t seed);

struct NormalityReport {
    bool full_support = false;
    bool hitting_is_identity = false;
    bool hitting_injective = false;
    bool resolvent_injective_1 = false;
    bool resolvent_injective_2 = false;

    bool consistent() const {
        return full_support == hitting_is_identity && full_support == hitting_injective &&
               full_support == resolvent_injective_1 && full_support == resolvent_injective_2;
    }
    bool normal() const { return full_support; }
};

/// The normality equivalences: F = X, P_F = id, P_F injective, R_alpha
/// injective (two orders); all five flags must agree.
NormalityReport normality_check(const ChainModel& model, const SmoothMeasure& mu);

/// alpha <m, G_alpha^mu u> -> int u dmu; returns the errors along the grid.
std::vector<double> revuz_recovery_errors(const ChainModel& model, const SmoothMeasure& mu,
                                          const FunctionOnX& u,
                                          const std::vector<double>& alpha_grid);

}  // namespace tclab

#endif
