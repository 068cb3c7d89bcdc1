#include "invlab/grid.hpp"

#include <cmath>
#include <string>

namespace invlab {

Grid::Grid(const Box& box, double spacing) : box_(box), h_(spacing) {
  if (box_.dim < 1 || box_.dim > kMaxDim) throw ValidationError("grid dimension must be 1 or 2");
  if (box_.degenerate()) throw ValidationError("grid box is degenerate");
  if (!(h_ > 0.0) || !std::isfinite(h_)) throw ValidationError("grid spacing must be positive");
  size_ = 1;
  for (int k = 0; k < box_.dim; ++k) {
    const double cells = box_.side(k) / h_;
    const double rounded = std::round(cells);
    if (std::fabs(cells - rounded) > 1e-9 * rounded) {
      throw ValidationError("spacing " + std::to_string(h_) + " does not divide box side " +
                            std::to_string(box_.side(k)));
    }
    if (rounded < 3) throw ValidationError("grid needs at least 3 cells per axis");
    if (rounded > 1 << 24) throw ValidationError("grid is too fine");
    n_[k] = static_cast<int>(rounded);
    size_ *= n_[k];
  }
}

Vec Grid::node(Eigen::Index p) const {
  const auto ij = multi_index(p);
  Vec x{coordinate(0, ij[0]), 0.0};
  if (dim() == 2) x[1] = coordinate(1, ij[1]);
  return x;
}

GridFunction Grid::sample(const std::function<double(const Vec&)>& f) const {
  GridFunction out(size_);
  for (Eigen::Index p = 0; p < size_; ++p) out[p] = f(node(p));
  return out;
}

void Grid::check(const GridFunction& f, const char* what) const {
  if (f.size() != size_) {
    throw ValidationError(std::string(what) + ": grid function has " + std::to_string(f.size()) +
                          " values, grid has " + std::to_string(size_) + " nodes");
  }
  if (!f.allFinite()) throw ValidationError(std::string(what) + ": grid function has non-finite values");
}

double l2_norm(const Grid& grid, const GridFunction& f) {
  grid.check(f, "l2_norm");
  return std::sqrt(f.squaredNorm() * grid.weight());
}

double integral(const Grid& grid, const GridFunction& f) {
  grid.check(f, "integral");
  return f.sum() * grid.weight();
}

}  // namespace invlab
