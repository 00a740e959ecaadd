#ifndef TCLAB_REPORT_HPP
#define TCLAB_REPORT_HPP

#include <string>

#include <json.hpp>

#include "tclab/convergence.hpp"
#include "tclab/pathsim.hpp"

namespace tclab {

/// Round-trip formatting so identical runs emit byte-identical files.
std::string format_double(double v);

std::string convergence_csv(const ConvergenceReport& report);
nlohmann::json to_json(const ConvergenceReport& report);
nlohmann::json to_json(const KatoReport& report);
nlohmann::json to_json(const NormalityReport& report);
nlohmann::json to_json(const KernelRangeReport& report);
nlohmann::json to_json(const CmpReport& report);
nlohmann::json to_json(const McEstimate& est);

/// Creates the directory if needed; writes atomically enough for batch use.
void write_file(const std::string& dir, const std::string& filename,
                const std::string& content);

}  // namespace tclab

#endif
