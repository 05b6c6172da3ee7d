#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace ordmono {

struct CategoricalVariable {
  std::string name;
  std::vector<std::string> levels;  // first level is the baseline
};

// Declares the response, the ordinal predictors (ordered levels), the nominal
// predictors and the numeric predictors. Declaration order fixes the column
// order of the design and of every parameter vector.
struct ModelSchema {
  std::string response_name = "y";
  std::vector<std::string> response_levels;
  std::vector<CategoricalVariable> ordinal;
  std::vector<CategoricalVariable> nominal;
  std::vector<std::string> numeric;

  // Throws Error(InvalidSchema) when k < 3, an ordinal predictor has fewer
  // than two levels, labels repeat within a variable or names collide.
  void validate() const;

  int categories() const { return static_cast<int>(response_levels.size()); }
  std::size_t ordinal_count() const { return ordinal.size(); }
  Eigen::Index ordinal_columns() const;
  Eigen::Index other_columns() const;
  Eigen::Index beta_size() const { return ordinal_columns() + other_columns(); }
  Eigen::Index parameter_count() const { return categories() - 1 + beta_size(); }

  // Position of the first dummy of ordinal predictor s inside beta.
  Eigen::Index ordinal_offset(std::size_t s) const;
  int ordinal_levels(std::size_t s) const {
    return static_cast<int>(ordinal[s].levels.size());
  }
};

enum class ColumnKind { Ordinal, Nominal, Numeric };

struct ColumnInfo {
  ColumnKind kind;
  std::size_t predictor;  // index within its kind's list
  int level;              // category index (>= 1) for dummies, -1 for numeric
  std::string name;       // "pred[level]" or "pred"
};

// One observation in coded form: category indices are 0-based positions in
// the schema's level lists.
struct Observation {
  int response = 0;
  std::vector<int> ordinal;
  std::vector<int> nominal;
  std::vector<double> numeric;
};

// In-memory table of string cells, e.g. straight from a CSV reader.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  // Source line of each row, used in error messages. Optional.
  std::vector<std::size_t> lines;
};

struct DesignMatrix {
  // n x (ordinal dummies | nominal dummies | numeric), no intercept column.
  Eigen::MatrixXd x;
  std::vector<int> response;  // 0-based response category per row
  int categories = 0;
  Eigen::Index ordinal_cols = 0;
  std::vector<ColumnInfo> columns;
  // (first column, width) of each ordinal predictor's dummy block.
  std::vector<std::pair<Eigen::Index, Eigen::Index>> ordinal_blocks;

  Eigen::Index n() const { return x.rows(); }
  Eigen::Index beta_size() const { return x.cols(); }
  Eigen::Index parameter_count() const { return categories - 1 + x.cols(); }

  auto ordinal_part() const { return x.leftCols(ordinal_cols); }
  auto other_part() const { return x.rightCols(x.cols() - ordinal_cols); }

  // n x k 0/1 matrix with y_ij = 1 iff observation i fell in category j.
  Eigen::MatrixXi response_indicators() const;
};

struct DesignOptions {
  // Reject designs where a declared non-baseline category is never observed.
  bool require_all_categories = true;
};

// Encodes coded observations. Throws EmptyCategory (when requested) and
// DimensionMismatch for malformed observations.
DesignMatrix assemble_design(const ModelSchema& schema,
                             std::span<const Observation> observations,
                             DesignOptions options = {});

// Parses string cells against the schema and encodes them. Cells are matched
// as exact strings after trimming surrounding whitespace; an empty cell or
// "NA" is a missing value.
DesignMatrix build_design(const ModelSchema& schema, const Table& table,
                          DesignOptions options = {});

std::vector<Observation> parse_observations(const ModelSchema& schema,
                                            const Table& table);

// Recovers the category index of each ordinal and nominal predictor of row i
// from its dummy columns.
Observation decode_row(const ModelSchema& schema, const DesignMatrix& design,
                       Eigen::Index i);

enum class ParameterKind { Intercept, Ordinal, Nominal, Numeric };

struct ParameterDescriptor {
  ParameterKind kind;
  std::size_t predictor;  // intercept index j (0-based) for intercepts
  int level;              // category index for dummies, -1 otherwise
  std::string name;
};

// alpha_1..alpha_{k-1}, ordinal blocks, nominal blocks, numeric predictors.
std::vector<ParameterDescriptor> parameter_layout(const ModelSchema& schema);

}  // namespace ordmono
