#ifndef TCLAB_CONFIG_HPP
#define TCLAB_CONFIG_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "tclab/convergence.hpp"

namespace tclab {

/// Fully resolved run configuration.  Schema-validated: unknown keys are
/// rejected, and the raw resolved document is embedded in every report.
struct RunConfig {
    nlohmann::json raw;

    std::optional<ChainModel> chain;
    std::optional<DiffusionModel> diffusion;
    std::map<std::string, SmoothMeasure> measures;
    std::map<std::string, MeasureSequence> sequences;

    struct Experiment {
        std::string name;
        std::string type;      // potential|integrated|semigroup|hitting|approximation|
                               // evolution|heat|fdd
        std::string sequence;
        std::string mode;      // semigroup experiments
        std::vector<double> alphas{0.5, 1.0, 2.0, 10.0};
        double t_max = 5.0;
        int t_points = 50;
        std::vector<int> n_values;
        double vn_coeff = 1.0;            // evolution: v_n = (1 + c/n) v
        std::vector<TestFunction> test_functions;  // empty: backend defaults
        std::vector<double> fdd_times;
        std::vector<FunctionOnX> fdd_functions;
    };
    std::vector<Experiment> experiments;

    struct Check {
        std::vector<std::string> measures;
        std::vector<double> alphas{0.0, 0.5, 1.0, 2.0, 10.0};
        int cmp_trials = 10000;
    };
    std::optional<Check> check;

    struct SimCase {
        std::string kind;  // semigroup|resolvent|apotential|fdd
        std::string measure;
        std::string init;  // fdd initial measure
        double t = 1.0;
        double alpha = 1.0;
        int x = 0;
        FunctionOnX u;
        std::vector<double> times;
        std::vector<FunctionOnX> functions;
    };
    struct Simulate {
        int n_paths = 100000;
        std::vector<SimCase> cases;
    };
    std::optional<Simulate> simulate;

    std::uint64_t seed = 1;
    int workers = 1;

    Backend backend() const { return chain ? Backend::Chain : Backend::Diffusion; }
    const SmoothMeasure& measure(const std::string& name) const;
    const MeasureSequence& sequence(const std::string& name) const;
};

RunConfig parse_config(const nlohmann::json& doc);
RunConfig load_config(const std::string& path);

/// Build the ExperimentSpec for a configured experiment (test functions
/// default to the backend's standard family).
ExperimentSpec make_experiment_spec(const RunConfig& config,
                                    const RunConfig::Experiment& experiment);

}  // namespace tclab

#endif
