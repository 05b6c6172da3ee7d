#pragma once

#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "ordmono/design.hpp"

namespace ordmono {

enum class Direction { Isotonic, Antitonic, Unconstrained };

std::string_view to_string(Direction d);

// One entry per ordinal predictor, in schema order.
using DirectionAssignment = std::vector<Direction>;

struct ConstraintBlock {
  std::size_t predictor;
  Direction direction;
  Eigen::Index row;     // first row in C
  Eigen::Index column;  // first column within beta_ord
  Eigen::Index size;    // q_s - 1
};

// Block-diagonal C acting on beta_ord; the feasible set is C * beta_ord >= 0.
struct ConstraintSet {
  Eigen::MatrixXd C;  // rows: constrained dummies, cols: all ordinal dummies
  std::vector<ConstraintBlock> blocks;

  bool empty() const { return C.rows() == 0; }
  Eigen::Index rows() const { return C.rows(); }
  Eigen::Index ordinal_columns() const { return C.cols(); }
};

ConstraintSet build_constraints(const ModelSchema& schema,
                                const DirectionAssignment& dirs);

inline constexpr double kFeasibilityTol = 1e-8;

// True iff every row of C * beta_ord is >= -tol. Throws DimensionMismatch.
bool is_feasible(const ConstraintSet& cs, const Eigen::VectorXd& beta_ord,
                 double tol = kFeasibilityTol);

// Least-squares projection of (0, block) onto {0 <= b_2 <= ... <= b_q}
// (or its mirror image for antitonic) with the baseline pinned at zero.
Eigen::VectorXd monotone_project(const Eigen::VectorXd& block, Direction direction);

}  // namespace ordmono
