#include "tclab/config.hpp"

#include <fstream>
#include <set>

namespace tclab {

using nlohmann::json;

namespace {

void reject_unknown(const json& obj, const std::string& where,
                    const std::set<std::string>& allowed) {
    if (!obj.is_object()) throw ConfigError(where + ": expected an object");
    for (const auto& [key, value] : obj.items())
        if (!allowed.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
}

Vec parse_vec(const json& arr, const std::string& where) {
    if (!arr.is_array()) throw ConfigError(where + ": expected an array of numbers");
    Vec v(arr.size());
    for (size_t i = 0; i < arr.size(); ++i) {
        if (!arr[i].is_number()) throw ConfigError(where + ": expected numbers");
        v(i) = arr[i].get<double>();
    }
    return v;
}

Mat parse_mat(const json& arr, const std::string& where) {
    if (!arr.is_array() || arr.empty()) throw ConfigError(where + ": expected an array of rows");
    const size_t n = arr.size();
    Mat m(n, arr[0].is_array() ? arr[0].size() : 0);
    for (size_t i = 0; i < n; ++i) {
        Vec row = parse_vec(arr[i], where);
        if (row.size() != m.cols()) throw ConfigError(where + ": ragged matrix rows");
        m.row(i) = row;
    }
    return m;
}

std::vector<double> parse_double_list(const json& arr, const std::string& where) {
    Vec v = parse_vec(arr, where);
    return std::vector<double>(v.data(), v.data() + v.size());
}

FunctionOnX parse_function(const RunConfig& cfg, const json& spec, const std::string& where) {
    const int dim = cfg.chain ? cfg.chain->size() : cfg.diffusion->grid_n;
    if (spec.is_array()) return FunctionOnX(parse_vec(spec, where), FuncClass::Bb);
    if (spec.is_string() && spec.get<std::string>() == "one")
        return FunctionOnX(Vec::Ones(dim), FuncClass::Bb);
    if (spec.is_object()) {
        reject_unknown(spec, where, {"values", "indicator", "hat", "id"});
        if (spec.contains("values")) return FunctionOnX(parse_vec(spec["values"], where));
        if (spec.contains("indicator")) {
            if (!cfg.chain) throw ConfigError(where + ": indicator functions are chain-only");
            Vec v = Vec::Zero(dim);
            for (const auto& s : spec["indicator"]) {
                int i = s.get<int>();
                if (i < 0 || i >= dim) throw ConfigError(where + ": indicator state out of range");
                v(i) = 1.0;
            }
            return FunctionOnX(std::move(v), FuncClass::C0);
        }
        if (spec.contains("hat")) {
            if (!cfg.diffusion) throw ConfigError(where + ": hat functions are diffusion-only");
            std::vector<double> p = parse_double_list(spec["hat"], where);
            if (p.size() != 2) throw ConfigError(where + ": hat needs [center, half_width]");
            Vec v(dim);
            for (int i = 0; i < dim; ++i)
                v(i) = std::max(0.0, 1.0 - std::abs(cfg.diffusion->grid(i) - p[0]) / p[1]);
            return FunctionOnX(std::move(v), FuncClass::C0);
        }
    }
    throw ConfigError(where + ": cannot parse function spec");
}

SmoothMeasure parse_measure(const RunConfig& cfg, const json& spec, const std::string& where) {
    if (cfg.chain) {
        reject_unknown(spec, where, {"weights"});
        if (!spec.contains("weights")) throw ConfigError(where + ": chain measure needs weights");
        Vec w = parse_vec(spec["weights"], where);
        if (w.size() != cfg.chain->size())
            throw ConfigError(where + ": weights length does not match the chain");
        return chain_measure(w);
    }
    reject_unknown(spec, where, {"atoms", "density", "density_values"});
    std::vector<Atom> atoms;
    if (spec.contains("atoms")) {
        for (const auto& a : spec["atoms"]) {
            std::vector<double> p = parse_double_list(a, where + ".atoms");
            if (p.size() != 2) throw ConfigError(where + ": atoms are [location, weight] pairs");
            atoms.push_back({p[0], p[1]});
        }
    }
    Vec density;
    if (spec.contains("density")) {
        std::string name = spec["density"].get<std::string>();
        if (name == "lebesgue")
            density = Vec::Ones(cfg.diffusion->grid_n);
        else
            throw ConfigError(where + ": unknown density preset '" + name + "'");
    }
    if (spec.contains("density_values")) {
        if (density.size()) throw ConfigError(where + ": both density and density_values given");
        density = parse_vec(spec["density_values"], where);
        if (density.size() != cfg.diffusion->grid_n)
            throw ConfigError(where + ": density grid length mismatch");
    }
    try {
        return diffusion_measure(std::move(atoms), std::move(density));
    } catch (const Error& e) {
        throw ConfigError(where + ": " + e.what());
    }
}

SequenceKind parse_kind(const std::string& kind, const std::string& where) {
    if (kind == "shifted_atom") return SequenceKind::ShiftedAtom;
    if (kind == "discretized_density") return SequenceKind::DiscretizedDensity;
    if (kind == "monotone_up") return SequenceKind::MonotoneUp;
    if (kind == "monotone_down") return SequenceKind::MonotoneDown;
    if (kind == "constant") return SequenceKind::Constant;
    throw ConfigError(where + ": unknown sequence kind '" + kind + "'");
}

}  // namespace

const SmoothMeasure& RunConfig::measure(const std::string& name) const {
    auto it = measures.find(name);
    if (it == measures.end()) throw ConfigError("unknown measure '" + name + "'");
    return it->second;
}

const MeasureSequence& RunConfig::sequence(const std::string& name) const {
    auto it = sequences.find(name);
    if (it == sequences.end()) throw ConfigError("unknown sequence '" + name + "'");
    return it->second;
}

RunConfig parse_config(const json& doc) {
    RunConfig cfg;
    cfg.raw = doc;
    reject_unknown(doc, "config",
                   {"backend", "measures", "sequences", "experiments", "check", "simulate",
                    "seed", "workers"});

    if (!doc.contains("backend")) throw ConfigError("config: missing backend");
    const json& backend = doc["backend"];
    reject_unknown(backend, "backend", {"type", "generator", "ref_measure", "grid_n"});
    std::string type = backend.value("type", "");
    if (type == "chain") {
        if (!backend.contains("generator") || !backend.contains("ref_measure"))
            throw ConfigError("backend: chain needs generator and ref_measure");
        try {
            cfg.chain = build_chain(parse_mat(backend["generator"], "backend.generator"),
                                    parse_vec(backend["ref_measure"], "backend.ref_measure"));
        } catch (const ConfigError&) {
            throw;
        } catch (const Error& e) {
            throw ConfigError(std::string("backend: ") + e.what());
        }
    } else if (type == "diffusion") {
        try {
            cfg.diffusion = make_diffusion(backend.value("grid_n", 1000));
        } catch (const Error& e) {
            throw ConfigError(std::string("backend: ") + e.what());
        }
    } else {
        throw ConfigError("backend.type must be 'chain' or 'diffusion'");
    }

    if (doc.contains("seed")) cfg.seed = doc["seed"].get<std::uint64_t>();
    if (doc.contains("workers")) {
        cfg.workers = doc["workers"].get<int>();
        if (cfg.workers < 1) throw ConfigError("workers must be >= 1");
    }

    if (doc.contains("measures")) {
        for (const auto& [name, spec] : doc["measures"].items())
            cfg.measures.emplace(name, parse_measure(cfg, spec, "measures." + name));
    }

    if (doc.contains("sequences")) {
        for (const auto& [name, spec] : doc["sequences"].items()) {
            const std::string where = "sequences." + name;
            reject_unknown(spec, where, {"kind", "limit"});
            if (!spec.contains("kind") || !spec.contains("limit"))
                throw ConfigError(where + ": needs kind and limit");
            SequenceKind kind = parse_kind(spec["kind"].get<std::string>(), where);
            try {
                cfg.sequences.emplace(
                    name, make_sequence(kind, SequenceParams{},
                                        cfg.measure(spec["limit"].get<std::string>())));
            } catch (const ConfigError&) {
                throw;
            } catch (const Error& e) {
                throw ConfigError(where + ": " + e.what());
            }
        }
    }

    if (doc.contains("experiments")) {
        for (size_t i = 0; i < doc["experiments"].size(); ++i) {
            const json& spec = doc["experiments"][i];
            const std::string where = "experiments[" + std::to_string(i) + "]";
            reject_unknown(spec, where,
                           {"name", "type", "sequence", "mode", "alphas", "t_max", "t_points",
                            "n_values", "vn_coeff", "times", "functions", "test_functions"});
            RunConfig::Experiment exp;
            exp.type = spec.value("type", "");
            static const std::set<std::string> kKnown = {
                "potential", "integrated", "semigroup", "hitting",
                "approximation", "evolution", "heat", "fdd"};
            if (!kKnown.count(exp.type))
                throw ConfigError(where + ": unknown experiment type '" + exp.type + "'");
            exp.name = spec.value("name", exp.type + "_" + std::to_string(i));
            if (!spec.contains("sequence")) throw ConfigError(where + ": needs a sequence");
            exp.sequence = spec["sequence"].get<std::string>();
            cfg.sequence(exp.sequence);  // existence check
            exp.mode = spec.value("mode", "");
            if (exp.type == "semigroup" && exp.mode.empty())
                throw ConfigError(where + ": semigroup experiments need a mode");
            if (spec.contains("alphas")) exp.alphas = parse_double_list(spec["alphas"], where);
            exp.t_max = spec.value("t_max", 5.0);
            exp.t_points = spec.value("t_points", 50);
            if (spec.contains("n_values"))
                for (const auto& n : spec["n_values"]) exp.n_values.push_back(n.get<int>());
            exp.vn_coeff = spec.value("vn_coeff", 1.0);
            if (spec.contains("test_functions")) {
                int counter = 0;
                for (const auto& f : spec["test_functions"]) {
                    std::string id = "f" + std::to_string(counter++);
                    if (f.is_object() && f.contains("id")) id = f["id"].get<std::string>();
                    if (f.is_string()) id = f.get<std::string>();
                    exp.test_functions.push_back(
                        {id, parse_function(cfg, f, where + ".test_functions")});
                }
            }
            if (exp.type == "fdd") {
                if (!spec.contains("times") || !spec.contains("functions"))
                    throw ConfigError(where + ": fdd experiments need times and functions");
                exp.fdd_times = parse_double_list(spec["times"], where);
                for (const auto& f : spec["functions"])
                    exp.fdd_functions.push_back(parse_function(cfg, f, where + ".functions"));
                if (exp.fdd_functions.size() != exp.fdd_times.size() + 1)
                    throw ConfigError(where + ": fdd needs k+1 functions for k times");
            }
            cfg.experiments.push_back(std::move(exp));
        }
    }

    if (doc.contains("check")) {
        const json& spec = doc["check"];
        reject_unknown(spec, "check", {"measures", "alphas", "cmp_trials"});
        RunConfig::Check chk;
        if (spec.contains("measures"))
            for (const auto& m : spec["measures"]) {
                chk.measures.push_back(m.get<std::string>());
                cfg.measure(chk.measures.back());
            }
        if (spec.contains("alphas")) chk.alphas = parse_double_list(spec["alphas"], "check.alphas");
        chk.cmp_trials = spec.value("cmp_trials", 10000);
        cfg.check = std::move(chk);
    }

    if (doc.contains("simulate")) {
        const json& spec = doc["simulate"];
        reject_unknown(spec, "simulate", {"n_paths", "cases"});
        RunConfig::Simulate sim;
        sim.n_paths = spec.value("n_paths", 100000);
        if (spec.contains("cases")) {
            for (size_t i = 0; i < spec["cases"].size(); ++i) {
                const json& c = spec["cases"][i];
                const std::string where = "simulate.cases[" + std::to_string(i) + "]";
                reject_unknown(c, where,
                               {"kind", "measure", "init", "t", "alpha", "x", "u", "times",
                                "functions"});
                RunConfig::SimCase sc;
                sc.kind = c.value("kind", "");
                if (sc.kind != "semigroup" && sc.kind != "resolvent" && sc.kind != "apotential" &&
                    sc.kind != "fdd")
                    throw ConfigError(where + ": unknown case kind '" + sc.kind + "'");
                if (!c.contains("measure")) throw ConfigError(where + ": needs a measure");
                sc.measure = c["measure"].get<std::string>();
                cfg.measure(sc.measure);
                sc.t = c.value("t", 1.0);
                sc.alpha = c.value("alpha", 1.0);
                sc.x = c.value("x", 0);
                if (c.contains("u")) sc.u = parse_function(cfg, c["u"], where + ".u");
                if (sc.kind == "fdd") {
                    if (!c.contains("init") || !c.contains("times") || !c.contains("functions"))
                        throw ConfigError(where + ": fdd cases need init, times and functions");
                    sc.init = c["init"].get<std::string>();
                    cfg.measure(sc.init);
                    sc.times = parse_double_list(c["times"], where + ".times");
                    for (const auto& f : c["functions"])
                        sc.functions.push_back(parse_function(cfg, f, where + ".functions"));
                    if (sc.functions.size() != sc.times.size() + 1)
                        throw ConfigError(where + ": fdd needs k+1 functions for k times");
                } else if (!c.contains("u")) {
                    throw ConfigError(where + ": needs u");
                }
                sim.cases.push_back(std::move(sc));
            }
        }
        cfg.simulate = std::move(sim);
    }

    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw ConfigError("config parse error: " + std::string(e.what()));
    }
    return parse_config(doc);
}

ExperimentSpec make_experiment_spec(const RunConfig& config,
                                    const RunConfig::Experiment& experiment) {
    ExperimentSpec spec;
    if (config.chain) {
        spec.chain = &*config.chain;
        spec.test_functions = default_test_functions(*config.chain);
    } else {
        spec.diffusion = &*config.diffusion;
        spec.test_functions = default_test_functions(*config.diffusion);
    }
    if (!experiment.test_functions.empty()) spec.test_functions = experiment.test_functions;
    spec.sequence = config.sequence(experiment.sequence);
    spec.alphas = experiment.alphas;
    spec.t_max = experiment.t_max;
    spec.t_points = experiment.t_points;
    spec.n_values = experiment.n_values;
    spec.name = experiment.name;
    return spec;
}

}  // namespace tclab
