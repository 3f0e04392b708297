#pragma once

// Ready-made load cases. Every builder returns a fully configured grid.

#include "fem_core.hpp"

#include <string>

namespace bucktop {

/// Column clamped on its left edge and compressed by a uniform band of
/// -x nodal forces on its right edge.
struct ColumnLayout {
  int band_elements = 1;   // load band width, centred on the edge
  int passive_rows = 1;    // solid block next to the load, centred
  int passive_cols = 1;
  double total_load = 1e-3;
};

GridModel make_column(int nelx, int nely, double lx, const ColumnLayout& layout);

/// Proportional layout: band of nely/15 elements, solid block of
/// round(nely/12) x max(1, round(nelx/48)) elements. Requires nely % 15 == 0.
GridModel preset_compressed_column(int nelx, int nely, double lx = 2.0);

/// Square wall of n x n elements (n % 40 == 0) with a framed opening,
/// clamped at four base segments and loaded along the left edge.
GridModel preset_wall(int n, double lx = 1.0);

/// Half MBB beam: symmetry on the left edge, roller at the bottom-right
/// corner, unit downward load at the top-left node.
GridModel preset_mbb(int nelx, int nely, double lx);

/// Dispatch by name ("column", "wall", "mbb"). Throws ConfigError.
GridModel make_preset(const std::string& name, int nelx, int nely, double lx);

}  // namespace bucktop
