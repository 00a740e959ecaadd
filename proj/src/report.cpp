#include "tclab/report.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

namespace tclab {

using nlohmann::json;

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string convergence_csv(const ConvergenceReport& report) {
    std::string out = "n,theorem,test_id,param,sup_error,hypothesis_ok\n";
    const bool hyp = report.hypothesis_ok();
    for (const ConvergenceRow& row : report.rows) {
        out += std::to_string(row.n);
        out += ',';
        out += row.theorem;
        out += ',';
        out += row.test_id;
        out += ',';
        out += format_double(row.param);
        out += ',';
        out += format_double(row.sup_error);
        out += ',';
        out += (row.hypothesis_ok && hyp) ? "1" : "0";
        out += '\n';
    }
    return out;
}

json to_json(const ConvergenceReport& report) {
    json curves = json::object();
    for (const auto& [key, c] : report.curves) {
        json jc;
        jc["n"] = c.ns;
        jc["errors"] = c.errors;
        if (c.slope_valid) jc["slope"] = c.slope;
        jc["converged"] = c.converged;
        jc["full_sequence_claim"] = c.full_sequence_claim;
        if (!c.subsequence.empty()) jc["best_subsequence"] = c.subsequence;
        curves[key] = std::move(jc);
    }
    json hyp;
    hyp["vague_ok"] = report.hypothesis.base.vague_ok;
    hyp["potential_ok"] = report.hypothesis.base.potential_ok;
    hyp["all_kato"] = report.hypothesis.base.all_kato;
    hyp["holomorphic_backend"] = report.hypothesis.holomorphic_backend;
    hyp["notes"] = report.hypothesis.notes;
    for (const auto& [key, v] : report.hypothesis.required) hyp[key] = v;
    json rows_hyp = json::array();
    for (const HypothesisRow& r : report.hypothesis.base.rows)
        rows_hyp.push_back({{"n", r.n},
                            {"vague_residual", r.vague_residual},
                            {"potential_gap", r.potential_gap}});
    hyp["rows"] = std::move(rows_hyp);

    json j;
    j["experiment"] = report.experiment;
    if (!report.mode.empty()) j["mode"] = report.mode;
    j["hypothesis"] = std::move(hyp);
    j["curves"] = std::move(curves);
    j["passed"] = report.passed();
    return j;
}

json to_json(const KatoReport& report) {
    return json{{"bounded", report.bounded},
                {"kato", report.kato},
                {"sup", report.sup},
                {"boundary_left", report.boundary_left},
                {"boundary_right", report.boundary_right},
                {"continuity_modulus", report.continuity_modulus},
                {"modulus_bound", report.modulus_bound}};
}

json to_json(const NormalityReport& report) {
    return json{{"full_support", report.full_support},
                {"hitting_is_identity", report.hitting_is_identity},
                {"hitting_injective", report.hitting_injective},
                {"resolvent_injective_1", report.resolvent_injective_1},
                {"resolvent_injective_2", report.resolvent_injective_2},
                {"consistent", report.consistent()},
                {"normal", report.normal()}};
}

json to_json(const KernelRangeReport& report) {
    return json{{"kernel_matches_degenerate", report.kernel_matches_degenerate},
                {"range_alpha_independent", report.range_alpha_independent},
                {"injective_on_range", report.injective_on_range},
                {"rank", report.rank},
                {"ok", report.ok()}};
}

json to_json(const CmpReport& report) {
    return json{{"trials", report.trials},
                {"premise_hits", report.premise_hits},
                {"violations", report.violations},
                {"worst_excess", report.worst_excess},
                {"sub_markov_ok", report.sub_markov_ok},
                {"ok", report.ok()}};
}

json to_json(const McEstimate& est) {
    return json{{"value", est.value},
                {"std_error", est.std_error},
                {"n_paths", est.n_paths},
                {"capped_paths", est.capped_paths}};
}

void write_file(const std::string& dir, const std::string& filename,
                const std::string& content) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    fs::path target = fs::path(dir) / filename;
    std::ofstream out(target, std::ios::binary);
    if (!out) throw Error("cannot write " + target.string());
    out << content;
}

}  // namespace tclab
