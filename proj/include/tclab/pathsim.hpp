#ifndef TCLAB_PATHSIM_HPP
#define TCLAB_PATHSIM_HPP

#include <cstdint>
#include <limits>
#include <vector>

#include "tclab/measure.hpp"
#include "tclab/rng.hpp"

namespace tclab {

/// One exact event-driven trajectory of the chain.  The path occupies
/// states[j] on [jump_times[j], jump_times[j+1]); jump_times has one more
/// entry than states and ends at the killing time (or the safety horizon).
struct ChainPath {
    std::vector<double> jump_times;
    std::vector<int> states;
    double lifetime = 0.0;
    bool killed = false;
    bool capped = false;  // hit the safety horizon instead of being killed

    int state_at(double s) const;  // -1 means the cemetery point
};

/// The PCAF A_t of mu along a path: continuous, piecewise linear with slope
/// a(x_j) = mu_j/m_j on each holding interval, constant after the lifetime.
struct PcafPath {
    std::vector<double> times;   // breakpoints, same as the path's jump times
    std::vector<double> values;  // A at the breakpoints
    std::vector<double> slopes;  // slope on [times[j], times[j+1])
    double total = 0.0;          // A at the lifetime

    double value_at(double s) const;
};

double default_horizon(const ChainModel& model);
Vec expected_lifetimes(const ChainModel& model);

ChainPath sample_path(const ChainModel& model, int x0, double horizon, std::uint64_t seed);

PcafPath pcaf(const ChainPath& path, const SmoothMeasure& mu, const Vec& ref_measure);

/// Right-continuous inverse tau_t = inf{s : A_s > t}; +infinity once the
/// functional is exhausted (the path then sits at the cemetery point).
double inverse_pcaf(const PcafPath& a, double t);

struct McEstimate {
    double value = 0.0;
    double std_error = 0.0;
    int n_paths = 0;
    int capped_paths = 0;

    double z_score(double exact) const {
        double d = value - exact;
        if (std_error == 0.0) return d == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
        return d / std_error;
    }
};

struct McResolventEstimate {
    McEstimate time_route;  // int e^{-alpha s} u(X_{tau_s}) ds via the inverse
    McEstimate pcaf_route;  // int e^{-alpha A_s} u(X_s) dA_s along the original clock
};

McEstimate mc_semigroup(const ChainModel& model, const SmoothMeasure& mu, double t,
                        const FunctionOnX& u, int x0, int n_paths, std::uint64_t seed,
                        int workers = 1);

McResolventEstimate mc_resolvent(const ChainModel& model, const SmoothMeasure& mu, double alpha,
                                 const FunctionOnX& u, int x0, int n_paths, std::uint64_t seed,
                                 int workers = 1);

McEstimate mc_apotential(const ChainModel& model, const SmoothMeasure& mu, double alpha,
                         const FunctionOnX& u, int x0, int n_paths, std::uint64_t seed,
                         int workers = 1);

McEstimate mc_fdd(const ChainModel& model, const SmoothMeasure& mu_init, const SmoothMeasure& mu,
                  const std::vector<double>& times, const std::vector<FunctionOnX>& functions,
                  int n_paths, std::uint64_t seed, int workers = 1);

}  // namespace tclab

#endif
