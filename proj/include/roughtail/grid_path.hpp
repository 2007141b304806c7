#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "roughtail/common.hpp"

namespace roughtail {

/// A real-valued path sampled on the uniform dyadic grid {k * 2^-level}.
/// values.size() == 2^level + 1. Paths that start at the origin (fBM samples,
/// Cameron-Martin shifts) carry origin_pinned = true and values[0] == 0.
struct GridPath {
  int level = 0;
  std::vector<double> values;
  bool origin_pinned = false;

  std::size_t size() const { return values.size(); }
  int cells() const { return 1 << level; }
  double step() const { return 1.0 / static_cast<double>(cells()); }
  double time_at(std::size_t k) const { return static_cast<double>(k) * step(); }
};

inline std::size_t grid_size(int level) { return (std::size_t{1} << level) + 1; }

GridPath make_grid_path(int level, std::vector<double> values, bool origin_pinned);

/// Sample a scalar function on the dyadic grid of the given level.
GridPath discretize(const std::function<double(double)>& f, int level, bool origin_pinned = false);

/// Exact decimation onto a coarser dyadic grid (keeps every 2^(M-m)-th node).
GridPath subsample(const GridPath& x, int coarser_level);

/// Exact refinement of the piecewise-linear interpolant onto a finer grid.
GridPath upsample(const GridPath& x, int finer_level);

/// a*x + b*y on a shared grid.
GridPath axpby(double a, const GridPath& x, double b, const GridPath& y);

GridPath scale(const GridPath& x, double a);

void require_same_grid(const GridPath& x, const GridPath& y, const char* where);

}  // namespace roughtail
