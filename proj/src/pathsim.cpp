#include "tclab/pathsim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

#include "tclab/chain_model.hpp"

namespace tclab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Fixed reduction order regardless of worker count: per-path values land in a
// preallocated buffer, the mean/variance pass is sequential.
template <class PerPath>
McEstimate mc_driver(int n_paths, int workers, PerPath per_path) {
    if (n_paths < 1000) throw BadParameters("monte carlo needs at least 10^3 paths");
    std::vector<double> vals(static_cast<size_t>(n_paths));
    std::vector<int> capped_counts(std::max(workers, 1), 0);
    auto run_range = [&](int lo, int hi, int slot) {
        int capped = 0;
        for (int i = lo; i < hi; ++i) vals[i] = per_path(static_cast<std::uint64_t>(i), &capped);
        capped_counts[slot] = capped;
    };
    if (workers <= 1) {
        run_range(0, n_paths, 0);
    } else {
        std::vector<std::thread> pool;
        int chunk = (n_paths + workers - 1) / workers;
        for (int w = 0; w < workers; ++w) {
            int lo = w * chunk, hi = std::min(n_paths, lo + chunk);
            if (lo >= hi) break;
            pool.emplace_back(run_range, lo, hi, w);
        }
        for (auto& th : pool) th.join();
    }

    McEstimate est;
    est.n_paths = n_paths;
    for (int c : capped_counts) est.capped_paths += c;
    double mean = 0.0;
    for (double v : vals) mean += v;
    mean /= n_paths;
    double ss = 0.0;
    for (double v : vals) ss += (v - mean) * (v - mean);
    est.value = mean;
    est.std_error = n_paths > 1 ? std::sqrt(ss / (n_paths - 1.0) / n_paths) : 0.0;
    return est;
}

}  // namespace

int ChainPath::state_at(double s) const {
    if (s < 0.0 || s >= lifetime) return -1;
    // find j with jump_times[j] <= s < jump_times[j+1]
    auto it = std::upper_bound(jump_times.begin(), jump_times.end(), s);
    int j = static_cast<int>(it - jump_times.begin()) - 1;
    if (j < 0 || j >= static_cast<int>(states.size())) return -1;
    return states[j];
}

double PcafPath::value_at(double s) const {
    if (s <= 0.0) return 0.0;
    if (s >= times.back()) return total;
    auto it = std::upper_bound(times.begin(), times.end(), s);
    int j = static_cast<int>(it - times.begin()) - 1;
    return values[j] + slopes[j] * (s - times[j]);
}

Vec expected_lifetimes(const ChainModel& model) {
    return checked_solve(Mat(-model.generator), Vec(Vec::Ones(model.size())));
}

double default_horizon(const ChainModel& model) {
    return 1e4 * expected_lifetimes(model).maxCoeff();
}

ChainPath sample_path(const ChainModel& model, int x0, double horizon, std::uint64_t seed) {
    if (x0 < 0 || x0 >= model.size()) throw BadParameters("start state out of range");
    if (!(horizon > 0.0)) throw BadParameters("horizon must be positive");
    SplitMix64 rng(seed);
    ChainPath path;
    path.jump_times.push_back(0.0);
    int state = x0;
    double now = 0.0;
    while (true) {
        const double rate = -model.generator(state, state);
        path.states.push_back(state);
        double hold = rng.exponential(rate);
        if (now + hold >= horizon) {
            now = horizon;
            path.capped = true;
            path.jump_times.push_back(now);
            break;
        }
        now += hold;
        path.jump_times.push_back(now);
        // jump with probability Q_ij / rate, kill with the residual mass
        double u = rng.uniform01() * rate;
        double acc = 0.0;
        int next = -1;
        for (int j = 0; j < model.size(); ++j) {
            if (j == state) continue;
            acc += model.generator(state, j);
            if (u < acc) {
                next = j;
                break;
            }
        }
        if (next < 0) {
            path.killed = true;
            break;
        }
        state = next;
    }
    path.lifetime = path.jump_times.back();
    return path;
}

PcafPath pcaf(const ChainPath& path, const SmoothMeasure& mu, const Vec& ref_measure) {
    if (mu.backend != Backend::Chain) throw BadParameters("pcaf needs a chain measure");
    PcafPath a;
    const size_t segs = path.states.size();
    a.times = path.jump_times;
    a.values.resize(segs + 1);
    a.slopes.resize(segs);
    a.values[0] = 0.0;
    for (size_t j = 0; j < segs; ++j) {
        int s = path.states[j];
        a.slopes[j] = mu.weights(s) / ref_measure(s);
        a.values[j + 1] = a.values[j] + a.slopes[j] * (a.times[j + 1] - a.times[j]);
    }
    a.total = a.values[segs];
    return a;
}

double inverse_pcaf(const PcafPath& a, double t) {
    if (t < 0.0) throw BadParameters("inverse pcaf needs t >= 0");
    if (t >= a.total) return kInf;
    for (size_t j = 0; j < a.slopes.size(); ++j) {
        if (a.values[j + 1] > t)
            return a.times[j] + (t - a.values[j]) / a.slopes[j];
    }
    return kInf;  // unreachable when t < total
}

McEstimate mc_semigroup(const ChainModel& model, const SmoothMeasure& mu, double t,
                        const FunctionOnX& u, int x0, int n_paths, std::uint64_t seed,
                        int workers) {
    const double horizon = default_horizon(model);
    return mc_driver(n_paths, workers, [&](std::uint64_t i, int* capped) {
        ChainPath path = sample_path(model, x0, horizon, derive_stream(seed, 1, i).next());
        if (path.capped) ++*capped;
        PcafPath a = pcaf(path, mu, model.ref_measure);
        double tau = inverse_pcaf(a, t);
        int s = std::isinf(tau) ? -1 : path.state_at(tau);
        return s < 0 ? 0.0 : u.values(s);
    });
}

McResolventEstimate mc_resolvent(const ChainModel& model, const SmoothMeasure& mu, double alpha,
                                 const FunctionOnX& u, int x0, int n_paths, std::uint64_t seed,
                                 int workers) {
    if (alpha < 0.0) throw BadParameters("resolvent order must be nonnegative");
    const double horizon = default_horizon(model);
    McResolventEstimate out;

    // (a) time-route: integrate e^{-alpha s} u(X_{tau_s}) over the changed
    // clock, reading states through the inverse functional
    out.time_route = mc_driver(n_paths, workers, [&](std::uint64_t i, int* capped) {
        ChainPath path = sample_path(model, x0, horizon, derive_stream(seed, 2, i).next());
        if (path.capped) ++*capped;
        PcafPath a = pcaf(path, mu, model.ref_measure);
        double acc = 0.0;
        for (size_t j = 0; j < a.slopes.size(); ++j) {
            double lo = a.values[j], hi = a.values[j + 1];
            if (hi <= lo) continue;
            double tau = inverse_pcaf(a, 0.5 * (lo + hi));
            int s = std::isinf(tau) ? -1 : path.state_at(tau);
            if (s < 0) continue;
            double weight = alpha > 0.0 ? (std::exp(-alpha * lo) - std::exp(-alpha * hi)) / alpha
                                        : hi - lo;
            acc += u.values(s) * weight;
        }
        return acc;
    });

    // (b) pcaf-route: int e^{-alpha A_s} u(X_s) dA_s along the original clock
    out.pcaf_route = mc_driver(n_paths, workers, [&](std::uint64_t i, int* capped) {
        ChainPath path = sample_path(model, x0, horizon, derive_stream(seed, 2, i).next());
        if (path.capped) ++*capped;
        PcafPath a = pcaf(path, mu, model.ref_measure);
        double acc = 0.0;
        for (size_t j = 0; j < a.slopes.size(); ++j) {
            double lo = a.values[j], hi = a.values[j + 1];
            if (hi <= lo) continue;
            double weight = alpha > 0.0 ? (std::exp(-alpha * lo) - std::exp(-alpha * hi)) / alpha
                                        : hi - lo;
            acc += u.values(path.states[j]) * weight;
        }
        return acc;
    });
    return out;
}

McEstimate mc_apotential(const ChainModel& model, const SmoothMeasure& mu, double alpha,
                         const FunctionOnX& u, int x0, int n_paths, std::uint64_t seed,
                         int workers) {
    if (alpha < 0.0) throw BadParameters("potential order must be nonnegative");
    const double horizon = default_horizon(model);
    return mc_driver(n_paths, workers, [&](std::uint64_t i, int* capped) {
        ChainPath path = sample_path(model, x0, horizon, derive_stream(seed, 3, i).next());
        if (path.capped) ++*capped;
        double acc = 0.0;
        for (size_t j = 0; j < path.states.size(); ++j) {
            int s = path.states[j];
            double a = mu.weights(s) / model.ref_measure(s);
            if (a == 0.0) continue;
            double lo = path.jump_times[j], hi = path.jump_times[j + 1];
            double weight = alpha > 0.0 ? (std::exp(-alpha * lo) - std::exp(-alpha * hi)) / alpha
                                        : hi - lo;
            acc += u.values(s) * a * weight;
        }
        return acc;
    });
}

McEstimate mc_fdd(const ChainModel& model, const SmoothMeasure& mu_init, const SmoothMeasure& mu,
                  const std::vector<double>& times, const std::vector<FunctionOnX>& functions,
                  int n_paths, std::uint64_t seed, int workers) {
    if (times.empty() || functions.size() != times.size() + 1)
        throw BadParameters("fdd needs k times and k+1 functions");
    const double mass = mu_init.weights.sum();
    if (!(mass > 0.0)) throw BadParameters("initial measure must have positive mass");
    Vec cdf(model.size());
    double acc = 0.0;
    for (int i = 0; i < model.size(); ++i) {
        acc += mu_init.weights(i) / mass;
        cdf(i) = acc;
    }
    const double horizon = default_horizon(model);

    McEstimate est = mc_driver(n_paths, workers, [&](std::uint64_t i, int* capped) {
        SplitMix64 rng = derive_stream(seed, 4, i);
        double pick = rng.uniform01();
        int x0 = 0;
        while (x0 + 1 < model.size() && pick > cdf(x0)) ++x0;
        ChainPath path = sample_path(model, x0, horizon, rng.next());
        if (path.capped) ++*capped;
        PcafPath a = pcaf(path, mu, model.ref_measure);
        double prod = 1.0;
        // t_0 = 0 factor goes through X_{tau_0} as well
        for (size_t idx = 0; idx <= times.size(); ++idx) {
            double t = idx == 0 ? 0.0 : times[idx - 1];
            double tau = inverse_pcaf(a, t);
            int s = std::isinf(tau) ? -1 : path.state_at(tau);
            if (s < 0) return 0.0;
            prod *= functions[idx].values(s);
            if (prod == 0.0) return 0.0;
        }
        return prod;
    });
    // report the unnormalised integral: scale the mean by the initial mass
    est.value *= mass;
    est.std_error *= mass;
    return est;
}

}  // namespace tclab
