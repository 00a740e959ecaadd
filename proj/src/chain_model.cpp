#include "tclab/chain_model.hpp"

#include <vector>

#include <unsupported/Eigen/MatrixFunctions>

namespace tclab {

namespace {

constexpr double kSignTol = 1e-12;

// Strong connectivity of the digraph of strictly positive off-diagonals.
bool strongly_connected(const Mat& q) {
    const int n = static_cast<int>(q.rows());
    if (n <= 1) return true;
    auto reach = [&](bool transpose) {
        std::vector<char> seen(n, 0);
        std::vector<int> stack{0};
        seen[0] = 1;
        while (!stack.empty()) {
            int i = stack.back();
            stack.pop_back();
            for (int j = 0; j < n; ++j) {
                if (j == i || seen[j]) continue;
                double w = transpose ? q(j, i) : q(i, j);
                if (w > 0.0) {
                    seen[j] = 1;
                    stack.push_back(j);
                }
            }
        }
        for (char s : seen)
            if (!s) return false;
        return true;
    };
    return reach(false) && reach(true);
}

}  // namespace

ChainModel build_chain(const Mat& generator, const Vec& ref_measure) {
    const auto n = generator.rows();
    if (n == 0 || generator.cols() != n)
        throw BadParameters("generator must be a nonempty square matrix");
    if (ref_measure.size() != n)
        throw BadParameters("reference measure length does not match generator size");
    if ((ref_measure.array() <= 0.0).any())
        throw BadParameters("reference measure must be strictly positive");

    for (Eigen::Index i = 0; i < n; ++i) {
        double row_sum = 0.0;
        for (Eigen::Index j = 0; j < n; ++j) {
            if (i != j && generator(i, j) < -kSignTol)
                throw NonSubMarkovian("negative off-diagonal rate at (" + std::to_string(i) +
                                      "," + std::to_string(j) + ")");
            row_sum += generator(i, j);
        }
        if (row_sum > kSignTol)
            throw NonSubMarkovian("positive row sum at row " + std::to_string(i));
    }

    // Transience: -Q must be invertible with a nonnegative inverse.
    Eigen::FullPivLU<Mat> lu(-generator);
    if (!lu.isInvertible())
        throw NotTransient("-Q is singular; chain is conservative or degenerate");
    Mat inv = lu.inverse();
    if ((inv.array() < -1e-9).any())
        throw NotTransient("-Q^{-1} has negative entries");

    if (!strongly_connected(generator))
        throw NotIrreducible("positive off-diagonal digraph is not strongly connected");

    return ChainModel{generator, ref_measure};
}

Mat chain_transition_matrix(const ChainModel& model, double t) {
    if (t < 0.0) throw BadParameters("transition time must be nonnegative");
    return (t * model.generator).exp();
}

FunctionOnX transition(const ChainModel& model, double t, const FunctionOnX& u) {
    if (u.values.size() != model.size())
        throw BadParameters("function size does not match chain size");
    return FunctionOnX(chain_transition_matrix(model, t) * u.values, u.cls);
}

Vec checked_solve(const Mat& a, const Vec& b) {
    Eigen::PartialPivLU<Mat> lu(a);
    Vec x = lu.solve(b);
    const double gate = 1e-12 * (b.norm() + 1.0);
    if (!x.allFinite()) throw SingularSystem("linear solve produced non-finite values");
    if ((a * x - b).norm() > gate) {
        x += lu.solve(b - a * x);  // one round of iterative refinement
        if (!x.allFinite() || (a * x - b).norm() > 10 * gate)
            throw SingularSystem("linear solve residual exceeds tolerance");
    }
    return x;
}

Mat checked_solve(const Mat& a, const Mat& b) {
    Mat x(a.rows(), b.cols());
    for (Eigen::Index j = 0; j < b.cols(); ++j) {
        Vec col = b.col(j);
        x.col(j) = checked_solve(a, col);
    }
    return x;
}

ResolventKernel resolvent_kernel(const ChainModel& model, double alpha) {
    if (alpha < 0.0) throw BadParameters("resolvent order must be nonnegative");
    const int n = model.size();
    Mat a = alpha * Mat::Identity(n, n) - model.generator;
    Mat op = checked_solve(a, Mat(Mat::Identity(n, n)));
    Mat kernel = op;
    for (int j = 0; j < n; ++j) kernel.col(j) /= model.ref_measure(j);
    return ResolventKernel{alpha, std::move(op), std::move(kernel)};
}

ChainModel dual_model(const ChainModel& model) {
    const Vec& m = model.ref_measure;
    Mat dual = m.cwiseInverse().asDiagonal() * model.generator.transpose() * m.asDiagonal();
    return build_chain(dual, m);
}

}  // namespace tclab
