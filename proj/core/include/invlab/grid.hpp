#pragma once

#include <array>
#include <functional>

#include <Eigen/Core>

#include "invlab/types.hpp"

namespace invlab {

/// Node values over a Grid, ordered with the first axis fastest.
using GridFunction = Eigen::VectorXd;

/// Uniform cell-centred tensor grid on a box: node i sits at
/// lo + (i + 1/2) h, so the box faces lie half a cell outside the outermost
/// nodes. Values beyond the box are zero (Dirichlet closure).
class Grid {
 public:
  /// `spacing` must divide every side of `box` into an integer number (>= 3)
  /// of cells, up to a relative 1e-9.
  Grid(const Box& box, double spacing);

  int dim() const { return box_.dim; }
  const Box& box() const { return box_; }
  double spacing() const { return h_; }
  /// Cell volume h^d, the weight of the discrete L2 inner product.
  double weight() const { return dim() == 1 ? h_ : h_ * h_; }
  int count(int axis) const { return n_[axis]; }
  Eigen::Index size() const { return size_; }

  Eigen::Index index(int i, int j = 0) const { return i + static_cast<Eigen::Index>(n_[0]) * j; }
  std::array<int, 2> multi_index(Eigen::Index p) const {
    return {static_cast<int>(p % n_[0]), static_cast<int>(p / n_[0])};
  }
  double coordinate(int axis, int i) const { return box_.lo[axis] + (i + 0.5) * h_; }
  Vec node(Eigen::Index p) const;

  GridFunction sample(const std::function<double(const Vec&)>& f) const;
  void check(const GridFunction& f, const char* what) const;

  bool operator==(const Grid& other) const { return box_ == other.box_ && h_ == other.h_; }

 private:
  Box box_;
  double h_;
  std::array<int, 2> n_{1, 1};
  Eigen::Index size_ = 0;
};

/// Discrete L2 norm (sum f^2 h^d)^(1/2).
double l2_norm(const Grid& grid, const GridFunction& f);
/// Discrete integral sum f h^d.
double integral(const Grid& grid, const GridFunction& f);

}  // namespace invlab
