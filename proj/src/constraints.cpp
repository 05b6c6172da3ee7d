#include "ordmono/constraints.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "ordmono/error.hpp"

namespace ordmono {

namespace {

// Pool-adjacent-violators for a non-decreasing fit with unit weights.
Eigen::VectorXd pava_increasing(const Eigen::VectorXd& y) {
  struct Block {
    double sum;
    Eigen::Index count;
    double mean() const { return sum / static_cast<double>(count); }
  };
  std::vector<Block> stack;
  stack.reserve(static_cast<std::size_t>(y.size()));
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    stack.push_back({y[i], 1});
    while (stack.size() > 1 &&
           stack[stack.size() - 2].mean() > stack.back().mean()) {
      const Block top = stack.back();
      stack.pop_back();
      stack.back().sum += top.sum;
      stack.back().count += top.count;
    }
  }
  Eigen::VectorXd out(y.size());
  Eigen::Index i = 0;
  for (const Block& b : stack) {
    out.segment(i, b.count).setConstant(b.mean());
    i += b.count;
  }
  return out;
}

}  // namespace

std::string_view to_string(Direction d) {
  switch (d) {
    case Direction::Isotonic: return "isotonic";
    case Direction::Antitonic: return "antitonic";
    case Direction::Unconstrained: return "unconstrained";
  }
  return "unknown";
}

ConstraintSet build_constraints(const ModelSchema& schema,
                                const DirectionAssignment& dirs) {
  if (dirs.size() != schema.ordinal.size()) {
    throw Error(ErrorKind::DimensionMismatch,
                fmt::format("direction assignment covers {} predictors, schema has {}",
                            dirs.size(), schema.ordinal.size()));
  }
  ConstraintSet cs;
  Eigen::Index rows = 0;
  Eigen::Index column = 0;
  for (std::size_t s = 0; s < dirs.size(); ++s) {
    const Eigen::Index width = schema.ordinal_levels(s) - 1;
    if (dirs[s] != Direction::Unconstrained) {
      cs.blocks.push_back({s, dirs[s], rows, column, width});
      rows += width;
    }
    column += width;
  }
  cs.C = Eigen::MatrixXd::Zero(rows, column);
  for (const auto& b : cs.blocks) {
    const double sign = b.direction == Direction::Isotonic ? 1.0 : -1.0;
    for (Eigen::Index r = 0; r < b.size; ++r) {
      cs.C(b.row + r, b.column + r) = sign;
      if (r > 0) cs.C(b.row + r, b.column + r - 1) = -sign;
    }
  }
  return cs;
}

bool is_feasible(const ConstraintSet& cs, const Eigen::VectorXd& beta_ord, double tol) {
  if (beta_ord.size() != cs.C.cols()) {
    throw Error(ErrorKind::DimensionMismatch,
                fmt::format("beta_ord has {} entries, constraints expect {}",
                            beta_ord.size(), cs.C.cols()));
  }
  if (cs.empty()) return true;
  return ((cs.C * beta_ord).array() >= -tol).all();
}

Eigen::VectorXd monotone_project(const Eigen::VectorXd& block, Direction direction) {
  if (direction == Direction::Unconstrained) return block;
  const double sign = direction == Direction::Isotonic ? 1.0 : -1.0;
  // With a pinned zero baseline the bounded fit is the clipped free fit.
  Eigen::VectorXd fit = pava_increasing(sign * block).cwiseMax(0.0);
  return sign * fit;
}

}  // namespace ordmono
