#include "ordmono/design.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>
#include <unordered_map>

#include <fmt/format.h>

#include "ordmono/error.hpp"

namespace ordmono {

namespace {

void check_distinct(const std::string& name,
                    const std::vector<std::string>& levels) {
  std::set<std::string> seen;
  for (const auto& level : levels) {
    if (!seen.insert(level).second) {
      throw Error(ErrorKind::InvalidSchema,
                  fmt::format("variable '{}' repeats level '{}'", name, level));
    }
  }
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

bool is_missing(std::string_view cell) { return cell.empty() || cell == "NA"; }

int level_index(const std::vector<std::string>& levels, std::string_view value) {
  const auto it = std::find(levels.begin(), levels.end(), value);
  return it == levels.end() ? -1 : static_cast<int>(it - levels.begin());
}

}  // namespace

void ModelSchema::validate() const {
  if (response_levels.size() < 3) {
    throw Error(ErrorKind::InvalidSchema,
                fmt::format("response '{}' needs at least 3 levels, got {}",
                            response_name, response_levels.size()));
  }
  check_distinct(response_name, response_levels);
  std::set<std::string> names{response_name};
  auto claim = [&](const std::string& name) {
    if (name.empty() || !names.insert(name).second) {
      throw Error(ErrorKind::InvalidSchema,
                  fmt::format("duplicate or empty variable name '{}'", name));
    }
  };
  for (const auto& op : ordinal) {
    claim(op.name);
    if (op.levels.size() < 2) {
      throw Error(ErrorKind::InvalidSchema,
                  fmt::format("ordinal predictor '{}' needs at least 2 levels",
                              op.name));
    }
    check_distinct(op.name, op.levels);
  }
  for (const auto& nom : nominal) {
    claim(nom.name);
    if (nom.levels.size() < 2) {
      throw Error(ErrorKind::InvalidSchema,
                  fmt::format("nominal predictor '{}' needs at least 2 levels",
                              nom.name));
    }
    check_distinct(nom.name, nom.levels);
  }
  for (const auto& num : numeric) claim(num);
}

Eigen::Index ModelSchema::ordinal_columns() const {
  Eigen::Index cols = 0;
  for (const auto& op : ordinal) cols += static_cast<Eigen::Index>(op.levels.size()) - 1;
  return cols;
}

Eigen::Index ModelSchema::other_columns() const {
  Eigen::Index cols = static_cast<Eigen::Index>(numeric.size());
  for (const auto& nom : nominal) cols += static_cast<Eigen::Index>(nom.levels.size()) - 1;
  return cols;
}

Eigen::Index ModelSchema::ordinal_offset(std::size_t s) const {
  Eigen::Index offset = 0;
  for (std::size_t r = 0; r < s; ++r) offset += ordinal_levels(r) - 1;
  return offset;
}

Eigen::MatrixXi DesignMatrix::response_indicators() const {
  Eigen::MatrixXi y = Eigen::MatrixXi::Zero(n(), categories);
  for (Eigen::Index i = 0; i < n(); ++i) y(i, response[i]) = 1;
  return y;
}

DesignMatrix assemble_design(const ModelSchema& schema,
                             std::span<const Observation> observations,
                             DesignOptions options) {
  schema.validate();
  DesignMatrix d;
  d.categories = schema.categories();
  d.ordinal_cols = schema.ordinal_columns();
  const auto n = static_cast<Eigen::Index>(observations.size());
  d.x = Eigen::MatrixXd::Zero(n, schema.beta_size());
  d.response.resize(observations.size());

  Eigen::Index col = 0;
  for (std::size_t s = 0; s < schema.ordinal.size(); ++s) {
    const auto& op = schema.ordinal[s];
    const auto width = static_cast<Eigen::Index>(op.levels.size()) - 1;
    d.ordinal_blocks.emplace_back(col, width);
    for (int p = 1; p < static_cast<int>(op.levels.size()); ++p, ++col) {
      d.columns.push_back({ColumnKind::Ordinal, s, p,
                           fmt::format("{}[{}]", op.name, op.levels[p])});
    }
  }
  const Eigen::Index nominal_start = col;
  for (std::size_t u = 0; u < schema.nominal.size(); ++u) {
    const auto& nom = schema.nominal[u];
    for (int p = 1; p < static_cast<int>(nom.levels.size()); ++p, ++col) {
      d.columns.push_back({ColumnKind::Nominal, u, p,
                           fmt::format("{}[{}]", nom.name, nom.levels[p])});
    }
  }
  const Eigen::Index numeric_start = col;
  for (std::size_t u = 0; u < schema.numeric.size(); ++u, ++col) {
    d.columns.push_back({ColumnKind::Numeric, u, -1, schema.numeric[u]});
  }

  for (Eigen::Index i = 0; i < n; ++i) {
    const Observation& obs = observations[static_cast<std::size_t>(i)];
    if (obs.ordinal.size() != schema.ordinal.size() ||
        obs.nominal.size() != schema.nominal.size() ||
        obs.numeric.size() != schema.numeric.size()) {
      throw Error(ErrorKind::DimensionMismatch,
                  fmt::format("observation {} does not match the schema", i + 1));
    }
    if (obs.response < 0 || obs.response >= d.categories) {
      throw Error(ErrorKind::UnknownLevel,
                  fmt::format("observation {}: response code {} out of range",
                              i + 1, obs.response));
    }
    d.response[static_cast<std::size_t>(i)] = obs.response;
    for (std::size_t s = 0; s < schema.ordinal.size(); ++s) {
      const int p = obs.ordinal[s];
      if (p < 0 || p >= schema.ordinal_levels(s)) {
        throw Error(ErrorKind::UnknownLevel,
                    fmt::format("observation {}: '{}' code {} out of range", i + 1,
                                schema.ordinal[s].name, p));
      }
      if (p > 0) d.x(i, d.ordinal_blocks[s].first + p - 1) = 1.0;
    }
    Eigen::Index offset = nominal_start;
    for (std::size_t u = 0; u < schema.nominal.size(); ++u) {
      const int levels = static_cast<int>(schema.nominal[u].levels.size());
      const int p = obs.nominal[u];
      if (p < 0 || p >= levels) {
        throw Error(ErrorKind::UnknownLevel,
                    fmt::format("observation {}: '{}' code {} out of range", i + 1,
                                schema.nominal[u].name, p));
      }
      if (p > 0) d.x(i, offset + p - 1) = 1.0;
      offset += levels - 1;
    }
    for (std::size_t u = 0; u < schema.numeric.size(); ++u) {
      if (!std::isfinite(obs.numeric[u])) {
        throw Error(ErrorKind::MissingValue,
                    fmt::format("observation {}: '{}' is not finite", i + 1,
                                schema.numeric[u]));
      }
      d.x(i, numeric_start + static_cast<Eigen::Index>(u)) = obs.numeric[u];
    }
  }

  if (options.require_all_categories) {
    for (Eigen::Index c = 0; c < numeric_start; ++c) {
      if (d.x.col(c).sum() == 0.0) {
        throw Error(ErrorKind::EmptyCategory,
                    fmt::format("category {} has no observations", d.columns[c].name));
      }
    }
  }
  return d;
}

std::vector<Observation> parse_observations(const ModelSchema& schema,
                                            const Table& table) {
  schema.validate();
  std::unordered_map<std::string, std::size_t> position;
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    position.emplace(std::string(trim(table.header[c])), c);
  }
  auto column_of = [&](const std::string& name) {
    const auto it = position.find(name);
    if (it == position.end()) {
      throw Error(ErrorKind::MissingValue,
                  fmt::format("column '{}' declared in the schema is missing", name));
    }
    return it->second;
  };
  const std::size_t response_col = column_of(schema.response_name);
  std::vector<std::size_t> ordinal_cols, nominal_cols, numeric_cols;
  for (const auto& op : schema.ordinal) ordinal_cols.push_back(column_of(op.name));
  for (const auto& nom : schema.nominal) nominal_cols.push_back(column_of(nom.name));
  for (const auto& num : schema.numeric) numeric_cols.push_back(column_of(num));

  std::vector<Observation> out;
  out.reserve(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const std::string where =
        r < table.lines.size() ? fmt::format("line {}", table.lines[r])
                               : fmt::format("row {}", r + 1);
    auto cell = [&](std::size_t c, const std::string& name) -> std::string_view {
      if (c >= row.size() || is_missing(trim(row[c]))) {
        throw Error(ErrorKind::MissingValue,
                    fmt::format("{}: missing value for '{}'", where, name));
      }
      return trim(row[c]);
    };
    auto categorical = [&](std::size_t c, const std::string& name,
                           const std::vector<std::string>& levels) {
      const auto value = cell(c, name);
      const int idx = level_index(levels, value);
      if (idx < 0) {
        throw Error(ErrorKind::UnknownLevel,
                    fmt::format("{}: value '{}' of column '{}' is not a declared level",
                                where, value, name));
      }
      return idx;
    };

    Observation obs;
    obs.response = categorical(response_col, schema.response_name, schema.response_levels);
    for (std::size_t s = 0; s < schema.ordinal.size(); ++s) {
      obs.ordinal.push_back(
          categorical(ordinal_cols[s], schema.ordinal[s].name, schema.ordinal[s].levels));
    }
    for (std::size_t u = 0; u < schema.nominal.size(); ++u) {
      obs.nominal.push_back(
          categorical(nominal_cols[u], schema.nominal[u].name, schema.nominal[u].levels));
    }
    for (std::size_t u = 0; u < schema.numeric.size(); ++u) {
      const auto text = cell(numeric_cols[u], schema.numeric[u]);
      double value = 0.0;
      const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
      if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(value)) {
        throw Error(ErrorKind::Parse,
                    fmt::format("{}: column '{}' value '{}' is not a number", where,
                                schema.numeric[u], text));
      }
      obs.numeric.push_back(value);
    }
    out.push_back(std::move(obs));
  }
  return out;
}

DesignMatrix build_design(const ModelSchema& schema, const Table& table,
                          DesignOptions options) {
  const auto observations = parse_observations(schema, table);
  return assemble_design(schema, observations, options);
}

Observation decode_row(const ModelSchema& schema, const DesignMatrix& design,
                       Eigen::Index i) {
  Observation obs;
  obs.response = design.response[static_cast<std::size_t>(i)];
  obs.ordinal.assign(schema.ordinal.size(), 0);
  obs.nominal.assign(schema.nominal.size(), 0);
  obs.numeric.assign(schema.numeric.size(), 0.0);
  for (Eigen::Index c = 0; c < design.x.cols(); ++c) {
    const auto& info = design.columns[static_cast<std::size_t>(c)];
    const double v = design.x(i, c);
    switch (info.kind) {
      case ColumnKind::Ordinal:
        if (v != 0.0) obs.ordinal[info.predictor] = info.level;
        break;
      case ColumnKind::Nominal:
        if (v != 0.0) obs.nominal[info.predictor] = info.level;
        break;
      case ColumnKind::Numeric:
        obs.numeric[info.predictor] = v;
        break;
    }
  }
  return obs;
}

std::vector<ParameterDescriptor> parameter_layout(const ModelSchema& schema) {
  std::vector<ParameterDescriptor> layout;
  for (int j = 0; j + 1 < schema.categories(); ++j) {
    layout.push_back({ParameterKind::Intercept, static_cast<std::size_t>(j), -1,
                      fmt::format("alpha[{}]", j + 1)});
  }
  for (std::size_t s = 0; s < schema.ordinal.size(); ++s) {
    const auto& op = schema.ordinal[s];
    for (int p = 1; p < static_cast<int>(op.levels.size()); ++p) {
      layout.push_back({ParameterKind::Ordinal, s, p,
                        fmt::format("{}[{}]", op.name, op.levels[p])});
    }
  }
  for (std::size_t u = 0; u < schema.nominal.size(); ++u) {
    const auto& nom = schema.nominal[u];
    for (int p = 1; p < static_cast<int>(nom.levels.size()); ++p) {
      layout.push_back({ParameterKind::Nominal, u, p,
                        fmt::format("{}[{}]", nom.name, nom.levels[p])});
    }
  }
  for (std::size_t u = 0; u < schema.numeric.size(); ++u) {
    layout.push_back({ParameterKind::Numeric, u, -1, schema.numeric[u]});
  }
  return layout;
}

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidSchema: return "InvalidSchema";
    case ErrorKind::UnknownLevel: return "UnknownLevel";
    case ErrorKind::EmptyCategory: return "EmptyCategory";
    case ErrorKind::MissingValue: return "MissingValue";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::NonIncreasingIntercepts: return "NonIncreasingIntercepts";
    case ErrorKind::ProbabilityUnderflow: return "ProbabilityUnderflow";
    case ErrorKind::Nonconvergence: return "Nonconvergence";
    case ErrorKind::Separation: return "Separation";
    case ErrorKind::DegenerateDesign: return "DegenerateDesign";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::ConstrainedFitHasNoSE: return "ConstrainedFitHasNoSE";
    case ErrorKind::CombinationCapExceeded: return "CombinationCapExceeded";
    case ErrorKind::TooManyFailures: return "TooManyFailures";
    case ErrorKind::Parse: return "Parse";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace ordmono
