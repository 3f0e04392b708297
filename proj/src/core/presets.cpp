#include "presets.hpp"

#include "errors.hpp"

#include <algorithm>
#include <cmath>

namespace bucktop {

GridModel make_column(int nelx, int nely, double lx, const ColumnLayout& layout) {
  GridModel grid(nelx, nely, lx);
  if (layout.band_elements < 1 || layout.band_elements > nely)
    throw ConfigError("load band must span between 1 and nely elements");
  if (layout.passive_rows < 0 || layout.passive_rows > nely || layout.passive_cols < 0 ||
      layout.passive_cols > nelx)
    throw ConfigError("passive block does not fit in the grid");

  std::vector<Index> fixed;
  for (int r = 0; r <= nely; ++r) {
    fixed.push_back(2 * grid.node(r, 0));
    fixed.push_back(2 * grid.node(r, 0) + 1);
  }
  grid.set_fixed(std::move(fixed));

  std::vector<double> load(grid.num_dofs(), 0.0);
  const int band = layout.band_elements;
  const int r0 = (nely - band) / 2;
  const double per_interval = layout.total_load / band;
  for (int k = 0; k < band; ++k) {
    load[2 * grid.node(r0 + k, nelx)] -= 0.5 * per_interval;
    load[2 * grid.node(r0 + k + 1, nelx)] -= 0.5 * per_interval;
  }
  grid.set_load(std::move(load));

  std::vector<Index> solid;
  const int p0 = (nely - layout.passive_rows) / 2;
  for (int c = nelx - layout.passive_cols; c < nelx; ++c)
    for (int r = p0; r < p0 + layout.passive_rows; ++r) solid.push_back(grid.element(r, c));
  grid.set_passive(std::move(solid), {});
  return grid;
}

GridModel preset_compressed_column(int nelx, int nely, double lx) {
  if (nely % 15 != 0)
    throw ConfigError("the column preset needs nely divisible by 15 (got " + std::to_string(nely) + ")");
  ColumnLayout layout;
  layout.band_elements = nely / 15;
  layout.passive_rows = std::max(1, static_cast<int>(std::lround(nely / 12.0)));
  layout.passive_cols = std::max(1, static_cast<int>(std::lround(nelx / 48.0)));
  layout.total_load = 1e-3;
  return make_column(nelx, nely, lx, layout);
}

GridModel preset_wall(int n, double lx) {
  if (n < 40 || n % 40 != 0)
    throw ConfigError("the wall preset needs n divisible by 40 (got " + std::to_string(n) + ")");
  GridModel grid(n, n, lx);
  const int t = n / 40;

  // Base supports, as 1-based node columns.
  std::vector<std::pair<int, int>> spans = {
      {1, t + 1}, {3 * n / 8, 2 * n / 5}, {4 * n / 5 + 1, 4 * n / 5 + 1 + t}, {n - t + 1, n + 1}};
  std::vector<Index> fixed;
  for (const auto& [a, b] : spans) {
    for (int c = a; c <= b; ++c) {
      const Index node = grid.node(n, c - 1);
      fixed.push_back(2 * node);
      fixed.push_back(2 * node + 1);
    }
  }
  grid.set_fixed(std::move(fixed));

  std::vector<double> load(grid.num_dofs(), 0.0);
  const double mod_f = 1e-2 / grid.ly() / n;
  for (int r = 0; r <= n; ++r) load[2 * grid.node(r, 0)] = (r == 0 || r == n) ? 0.5 * mod_f : mod_f;
  grid.set_load(std::move(load));

  // Element blocks, 1-based inclusive row/column ranges.
  std::vector<Index> solid, opening;
  auto block = [&](std::vector<Index>& out, int r1, int r2, int c1, int c2) {
    for (int c = c1; c <= c2; ++c)
      for (int r = r1; r <= r2; ++r) out.push_back(grid.element(r - 1, c - 1));
  };
  const int f = 2 * n / 5;
  block(solid, 1, t, 1, n);                      // top frame
  block(solid, 1, n, 1, t);                      // left frame
  block(solid, 1, n, n - t + 1, n);              // right frame
  block(opening, f, n, f, n - n / 5);            // opening
  block(solid, f - t, n, f - t, f - 1);          // opening, left jamb
  block(solid, f - t, n, n - n / 5 + 1, n - n / 5 + t);  // opening, right jamb
  block(solid, f - t, f - 1, f, n - n / 5);      // opening, lintel
  grid.set_passive(std::move(solid), std::move(opening));
  return grid;
}

GridModel preset_mbb(int nelx, int nely, double lx) {
  GridModel grid(nelx, nely, lx);
  std::vector<Index> fixed;
  for (int r = 0; r <= nely; ++r) fixed.push_back(2 * grid.node(r, 0));
  fixed.push_back(2 * grid.node(nely, nelx) + 1);
  grid.set_fixed(std::move(fixed));
  std::vector<double> load(grid.num_dofs(), 0.0);
  load[2 * grid.node(0, 0) + 1] = -1.0;
  grid.set_load(std::move(load));
  return grid;
}

GridModel make_preset(const std::string& name, int nelx, int nely, double lx) {
  if (name == "column") return preset_compressed_column(nelx, nely, lx);
  if (name == "wall") {
    if (nelx != nely) throw ConfigError("the wall preset is square: nelx must equal nely");
    return preset_wall(nelx, lx);
  }
  if (name == "mbb") return preset_mbb(nelx, nely, lx);
  throw ConfigError("unknown preset '" + name + "' (expected column, wall or mbb)");
}

}  // namespace bucktop
