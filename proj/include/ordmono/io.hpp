#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <string_view>

#include "ordmono/design.hpp"
#include "ordmono/simgen.hpp"

namespace ordmono {

// Comma-separated values with a header row. Fields may be double-quoted; a
// quoted field can contain commas, line breaks and doubled quotes. Every row
// must have as many fields as the header. Blank lines are skipped. Table::lines
// records the physical line on which each row starts.
Table parse_csv(std::string_view text);
Table read_csv(const std::string& path);

// Quotes a field only when it needs it.
void write_csv(std::ostream& os, const Table& table);

// Cells of simulated observations, with the schema's level labels.
Table observations_table(const ModelSchema& schema,
                         std::span<const Observation> observations);

// Schema file:
//
//   response: {name: y, levels: [low, mid, high]}
//   ordinal:
//     - {name: education, levels: [none, primary, secondary]}
//   nominal:
//     - {name: region, levels: [north, south]}
//   numeric: [age]
ModelSchema parse_schema(std::string_view yaml, const std::string& source = "<schema>");
ModelSchema load_schema(const std::string& path);

// A scenario file extends the schema layout with the generating model:
// intercepts, per-predictor `coefficients` (non-baseline levels only) and
// `probabilities`, numeric entries {name, coefficient, mean, variance}, the
// sample size `n`, `replicates`, `seed` and an optional `study` section with
// `strategies`, `alpha_star`, `threads` and `mdc` settings.
struct ScenarioFile {
  ScenarioSpec spec;
  StudyConfig study;
};

ScenarioFile parse_scenario(std::string_view yaml, const std::string& source = "<scenario>");
ScenarioFile load_scenario(const std::string& path);

std::string read_file(const std::string& path);

}  // namespace ordmono
