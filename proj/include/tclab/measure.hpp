#ifndef TCLAB_MEASURE_HPP
#define TCLAB_MEASURE_HPP

#include <utility>
#include <vector>

#include "tclab/chain_model.hpp"
#include "tclab/diffusion_model.hpp"
#include "tclab/types.hpp"

namespace tclab {

struct Atom {
    double location;
    double weight;
};

/// A positive measure in atoms-plus-density form.  On the chain backend the
/// atoms are the states themselves and only `weights` is used (mass per
/// state); on the diffusion backend `atoms` carries off-grid point masses and
/// `density` is the Radon--Nikodym derivative w.r.t. Lebesgue, sampled on the
/// grid.
struct SmoothMeasure {
    Backend backend = Backend::Chain;
    Vec weights;              // chain: nonnegative mass per state
    std::vector<Atom> atoms;  // diffusion: sorted, locations in (0,1), weights > 0
    Vec density;              // diffusion: nonnegative grid samples; empty if none

    bool has_density() const { return density.size() > 0; }
    SmoothMeasure scaled(double c) const;
    double total_mass(const DiffusionModel* model = nullptr) const;
};

SmoothMeasure chain_measure(const Vec& weights);
SmoothMeasure diffusion_measure(std::vector<Atom> atoms, Vec density = Vec());
SmoothMeasure lebesgue_measure(const DiffusionModel& model);

/// Fine support F.  Chain: a sorted state set.  Diffusion: a finite union of
/// disjoint closed intervals (points are degenerate intervals); `full` marks
/// F = X.
struct FineSupport {
    Backend backend = Backend::Chain;
    std::vector<int> states;
    std::vector<std::pair<double, double>> intervals;
    bool full = false;
    bool closed = true;

    bool empty() const { return !full && states.empty() && intervals.empty(); }
    bool contains(int state) const;
    bool contains_point(double x, double tol = 0.0) const;
};

FineSupport fine_support(const ChainModel& model, const SmoothMeasure& mu);
FineSupport fine_support(const DiffusionModel& model, const SmoothMeasure& mu);

/// Membership report for the G-Kato class (Definition of G-bounded/G-Kato).
struct KatoReport {
    bool bounded = false;
    bool kato = false;
    double sup = 0.0;               // sup G^mu 1
    double boundary_left = 0.0;     // |extrapolated value| at 0 (diffusion)
    double boundary_right = 0.0;    // |extrapolated value| at 1 (diffusion)
    double continuity_modulus = 0.0;
    double modulus_bound = 0.0;     // 2 * mass * h Lipschitz envelope
};

KatoReport is_green_kato(const ChainModel& model, const SmoothMeasure& mu, double rel_tol = 1e-3);
KatoReport is_green_kato(const DiffusionModel& model, const SmoothMeasure& mu, double rel_tol = 1e-3);

enum class SequenceKind { ShiftedAtom, DiscretizedDensity, MonotoneUp, MonotoneDown, Constant };

struct SequenceParams {
    double center = 0.5;  // shifted_atom: limit location
    double weight = 1.0;  // shifted_atom: mass
};

/// A measure sequence mu_n -> mu_inf together with the convergence
/// hypotheses its construction guarantees.
struct MeasureSequence {
    SequenceKind kind = SequenceKind::Constant;
    SequenceParams params;
    SmoothMeasure limit;

    int first_index() const;
    SmoothMeasure at(int n) const;

    // Hypotheses declared by construction, consumed by the experiment layer.
    bool guarantees_vague() const { return true; }
    bool guarantees_uniform_potential() const { return true; }
    bool monotone() const;
    bool supports_contained_in_limit() const;  // F_n subset of F for all n
    bool common_support() const;               // F_n = F for all n
};

MeasureSequence make_sequence(SequenceKind kind, const SequenceParams& params,
                              SmoothMeasure limit);

struct HypothesisRow {
    int n = 0;
    double vague_residual = 0.0;   // max over test functions
    double potential_gap = 0.0;    // sup |G^{mu_n}1 - G^{mu_inf}1|
};

struct HypothesisReport {
    std::vector<HypothesisRow> rows;
    bool vague_ok = false;
    bool potential_ok = false;
    bool all_kato = false;

    bool ok() const { return vague_ok && potential_ok && all_kato; }
};

/// Witness check of the standing convergence hypothesis against a fixed
/// finite family of compactly supported test functions (not a proof).
HypothesisReport check_hypothesis(const ChainModel& model, const MeasureSequence& seq, int n_max,
                                  const std::vector<FunctionOnX>& test_functions);
HypothesisReport check_hypothesis(const DiffusionModel& model, const MeasureSequence& seq,
                                  int n_max, const std::vector<FunctionOnX>& test_functions);

/// Integral of a grid-sampled function against mu.
double integrate(const ChainModel& model, const SmoothMeasure& mu, const FunctionOnX& u);
double integrate(const DiffusionModel& model, const SmoothMeasure& mu, const FunctionOnX& u);

}  // namespace tclab

#endif
