#ifndef N3POM_IO_HPP
#define N3POM_IO_HPP

// JSON and CSV persistence for models, reports and discrete fits.
// Doubles are written in shortest round-trip form, so a load after a save
// reproduces every parameter bit-for-bit.

#include <filesystem>
#include <iosfwd>
#include <string>

#include "json.hpp"

#include "n3pom/baseline.hpp"
#include "n3pom/core.hpp"
#include "n3pom/datagen.hpp"
#include "n3pom/eval.hpp"
#include "n3pom/monotonicity.hpp"

namespace n3pom {

using Json = nlohmann::json;

Json model_to_json(const Model& m);
Model model_from_json(const Json& j);

Json report_to_json(const MonotonicityReport& rep);
Json audit_to_json(const AuditReport& rep);

Json discrete_fit_to_json(const DiscreteFit& fit);
DiscreteFit discrete_fit_from_json(const Json& j);

Json synthetic_spec_to_json(const SyntheticSpec& spec);
SyntheticSpec synthetic_spec_from_json(const Json& j);

Json mse_report_to_json(const MseReport& rep);
void write_mse_report_csv(std::ostream& out, const MseReport& rep);
/// Aligned summary table (median and trimmed sd per coordinate).
void print_mse_table(std::ostream& out, const MseReport& rep);

Json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const Json& j);

void save_model(const std::filesystem::path& path, const Model& m);
Model load_model(const std::filesystem::path& path);

}  // namespace n3pom

#endif  // N3POM_IO_HPP
