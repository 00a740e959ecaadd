#ifndef TCLAB_CONVERGENCE_HPP
#define TCLAB_CONVERGENCE_HPP

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tclab/timechange.hpp"

namespace tclab {

struct TestFunction {
    std::string id;
    FunctionOnX fn;
};

std::vector<TestFunction> default_test_functions(const ChainModel& model);
std::vector<TestFunction> default_test_functions(const DiffusionModel& model);
FunctionOnX hat_function(const DiffusionModel& model, double center, double half_width);

/// Compiled operator bundle for one (backend, measure) pair, evaluated on a
/// fixed point set so that sup-norm gaps across a measure family compare the
/// same points.  Chain: the states.  Diffusion: grid plus every atom location
/// appearing in the family.
class Operators {
public:
    Operators(const ChainModel& model, SmoothMeasure mu);
    Operators(const DiffusionModel& model, SmoothMeasure mu, std::vector<double> eval_points);

    Backend backend() const { return backend_; }
    const FineSupport& support() const { return support_; }
    const SmoothMeasure& measure() const { return mu_; }
    bool has_trace() const { return trace_.has_value(); }
    const TraceGenerator& trace() const;

    Vec potential(const FunctionOnX& u) const;
    Vec resolvent(double alpha, const FunctionOnX& u) const;
    Vec hitting(const FunctionOnX& u) const;
    Vec semigroup(double t, const FunctionOnX& u) const;
    Vec integrated(double t, const FunctionOnX& u) const;

    // restricted operators on this measure's own support
    int support_dim() const;
    Vec restrict_fn(const FunctionOnX& u) const;
    Vec restricted_sg(double t, const Vec& h_on_f) const;
    Vec restricted_rv(double alpha, const Vec& h_on_f) const;
    // P_F u read off at another measure's support
    Vec hitting_at_support(const FunctionOnX& u, const Operators& other) const;
    // values of h-on-own-support extended by P_F, read at other's support
    Vec extend_to_support(const Vec& h_on_f, const Operators& other) const;

    double fdd(const SmoothMeasure& init, const std::vector<double>& times,
               const std::vector<FunctionOnX>& fns) const;

private:
    Backend backend_;
    const ChainModel* chain_ = nullptr;
    const DiffusionModel* diff_ = nullptr;
    SmoothMeasure mu_;
    FineSupport support_;
    std::optional<TraceGenerator> trace_;
    std::vector<double> eval_points_;
    Mat g_matrix_;        // chain: G^mu
    Mat hitting_matrix_;  // chain: P_F
    mutable std::map<double, Mat> resolvent_cache_;
};

struct ExperimentSpec {
    const ChainModel* chain = nullptr;
    const DiffusionModel* diffusion = nullptr;
    MeasureSequence sequence;
    std::vector<TestFunction> test_functions;
    std::vector<double> alphas{0.5, 1.0, 2.0, 10.0};
    double t_max = 5.0;
    int t_points = 50;
    std::vector<int> n_values;
    std::string name;

    std::vector<double> t_grid() const;
    std::vector<int> resolved_n_values() const;  // defaults to geometric 2..64
};

enum class SemigroupMode { Range, HittingComposed, Subset, Monotone, FullSupport };

struct HypothesisAudit {
    HypothesisReport base;
    std::map<std::string, bool> required;  // per-theorem extras
    bool holomorphic_backend = true;       // matrix semigroups, satisfied by backend
    std::string notes;

    bool ok() const {
        if (!base.ok()) return false;
        for (const auto& [k, v] : required)
            if (!v) return false;
        return true;
    }
};

struct ConvergenceRow {
    int n = 0;
    std::string theorem;
    std::string test_id;
    double param = 0.0;  // alpha, t, or 0 for parameter-free curves
    double sup_error = 0.0;
    bool hypothesis_ok = true;
};

struct CurveStats {
    std::vector<int> ns;
    std::vector<double> errors;  // per n (already sup over the parameter grid)
    double slope = 0.0;
    bool slope_valid = false;  // needs >= 4 positive points
    bool converged = false;
    bool full_sequence_claim = true;  // subsequence-only theorems set this false
    std::vector<int> subsequence;     // best decreasing subsequence when not claimed
};

struct ConvergenceReport {
    std::string experiment;
    std::string mode;
    HypothesisAudit hypothesis;
    std::vector<ConvergenceRow> rows;
    std::map<std::string, CurveStats> curves;

    bool hypothesis_ok() const { return hypothesis.ok(); }
    /// Hypothesis failures make a passing report impossible by construction.
    bool passed() const;
};

/// Decreasing-to-zero verdict: last error below 0.1 x the first and no
/// increase over the final three entries; identically-zero curves pass.
bool errors_converged(const std::vector<double>& errors);
/// Least-squares slope of log(error) against log(n); needs >= 4 points.
bool fit_loglog_slope(const std::vector<int>& ns, const std::vector<double>& errors,
                      double* slope);

ConvergenceReport run_potential_convergence(const ExperimentSpec& spec);
ConvergenceReport run_integrated_convergence(const ExperimentSpec& spec);
ConvergenceReport run_semigroup_convergence(const ExperimentSpec& spec, SemigroupMode mode);
ConvergenceReport run_hitting_convergence(const ExperimentSpec& spec);
ConvergenceReport run_approximation(const ExperimentSpec& spec);
ConvergenceReport run_evolution_convergence(const ExperimentSpec& spec,
                                            const std::function<FunctionOnX(int, const FunctionOnX&)>& v_n,
                                            bool heat_variant);
ConvergenceReport run_fdd_convergence(const ExperimentSpec& spec, const std::vector<double>& times,
                                      const std::vector<FunctionOnX>& functions);

/// Tietze-style extension of a function given on F back to X: zero off F on
/// the chain, piecewise-linear through the atom values on the diffusion.
FunctionOnX extend(const ChainModel& model, const FineSupport& support, const Vec& u_on_f);
FunctionOnX extend(const DiffusionModel& model, const FineSupport& support, const Vec& u_on_f);

}  // namespace tclab

#endif
