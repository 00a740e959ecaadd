#ifndef TCLAB_CHAIN_MODEL_HPP
#define TCLAB_CHAIN_MODEL_HPP

#include "tclab/types.hpp"

namespace tclab {

/// A transient sub-Markovian chain: generator Q with nonnegative off-diagonal
/// entries and nonpositive row sums, irreducible, with -Q inverse-positive,
/// together with a strictly positive reference measure m.
struct ChainModel {
    Mat generator;
    Vec ref_measure;

    int size() const { return static_cast<int>(generator.rows()); }
};

/// Validates and builds a chain model.
/// Throws NonSubMarkovian, NotTransient or NotIrreducible.
ChainModel build_chain(const Mat& generator, const Vec& ref_measure);

/// exp(tQ) as a dense matrix (scaling-and-squaring Pade).
Mat chain_transition_matrix(const ChainModel& model, double t);

/// P_t u = exp(tQ) u.
FunctionOnX transition(const ChainModel& model, double t, const FunctionOnX& u);

/// (alpha I - Q)^{-1} together with the kernel G_alpha(x,y); the kernel
/// carries the 1/m_y factor, the operator matrix does not.
struct ResolventKernel {
    double alpha = 0.0;
    Mat op;      // (alpha I - Q)^{-1}, acts on functions
    Mat kernel;  // G_alpha(x,y) = op(x,y)/m_y, integrates against m
};

ResolventKernel resolvent_kernel(const ChainModel& model, double alpha);

/// Dual chain: Q_hat = diag(m)^{-1} Q^T diag(m).
ChainModel dual_model(const ChainModel& model);

/// Solve A x = b by LU with a residual gate of 1e-12 * ||b||, one round of
/// iterative refinement if exceeded.  Throws SingularSystem.
Vec checked_solve(const Mat& a, const Vec& b);
Mat checked_solve(const Mat& a, const Mat& b);

}  // namespace tclab

#endif
