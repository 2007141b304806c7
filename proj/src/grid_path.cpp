#include "roughtail/grid_path.hpp"

#include <cmath>

namespace roughtail {

GridPath make_grid_path(int level, std::vector<double> values, bool origin_pinned) {
  if (level < 0) throw ConfigError("grid level must be >= 0");
  if (values.size() != grid_size(level)) {
    throw ConfigError("grid path of level " + std::to_string(level) + " needs " +
                      std::to_string(grid_size(level)) + " values, got " +
                      std::to_string(values.size()));
  }
  if (origin_pinned && values[0] != 0.0) {
    throw ConfigError("origin-pinned path must start at 0");
  }
  return GridPath{level, std::move(values), origin_pinned};
}

GridPath discretize(const std::function<double(double)>& f, int level, bool origin_pinned) {
  std::vector<double> v(grid_size(level));
  const double h = 1.0 / static_cast<double>(std::size_t{1} << level);
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = f(static_cast<double>(k) * h);
  if (origin_pinned) v[0] = 0.0;
  return GridPath{level, std::move(v), origin_pinned};
}

GridPath subsample(const GridPath& x, int coarser_level) {
  if (coarser_level > x.level || coarser_level < 0) {
    throw ConfigError("subsample target level must lie in [0, path level]");
  }
  const std::size_t stride = std::size_t{1} << (x.level - coarser_level);
  std::vector<double> v(grid_size(coarser_level));
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = x.values[k * stride];
  return GridPath{coarser_level, std::move(v), x.origin_pinned};
}

GridPath upsample(const GridPath& x, int finer_level) {
  if (finer_level < x.level) throw ConfigError("upsample target level must be >= path level");
  if (finer_level == x.level) return x;
  const std::size_t stride = std::size_t{1} << (finer_level - x.level);
  std::vector<double> v(grid_size(finer_level));
  const double inv = 1.0 / static_cast<double>(stride);
  for (std::size_t k = 0; k + 1 < x.values.size(); ++k) {
    const double a = x.values[k];
    const double b = x.values[k + 1];
    for (std::size_t r = 0; r < stride; ++r) {
      v[k * stride + r] = a + (b - a) * (static_cast<double>(r) * inv);
    }
  }
  v.back() = x.values.back();
  return GridPath{finer_level, std::move(v), x.origin_pinned};
}

GridPath axpby(double a, const GridPath& x, double b, const GridPath& y) {
  require_same_grid(x, y, "axpby");
  std::vector<double> v(x.values.size());
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = a * x.values[k] + b * y.values[k];
  return GridPath{x.level, std::move(v), x.origin_pinned && y.origin_pinned};
}

GridPath scale(const GridPath& x, double a) {
  std::vector<double> v(x.values.size());
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = a * x.values[k];
  return GridPath{x.level, std::move(v), x.origin_pinned};
}

void require_same_grid(const GridPath& x, const GridPath& y, const char* where) {
  if (x.level != y.level || x.values.size() != y.values.size()) {
    throw ConfigError(std::string(where) + ": paths live on different grids (levels " +
                      std::to_string(x.level) + " vs " + std::to_string(y.level) + ")");
  }
}

}  // namespace roughtail
