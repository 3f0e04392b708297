#pragma once

// Run artifacts: convergence CSV, raster images and JSON checkpoints.

#include "fem_core.hpp"
#include "optimizer.hpp"

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace bucktop {

/// Shortest round-trip text for a double, independent of the locale.
/// NaN is written as an empty field, infinities as "inf" / "-inf".
std::string format_number(double v);

/// Three significant digits, used for timings.
std::string format_seconds(double v);

/// Per-iteration history with the fixed column order
/// loop,f,c,lambda1..lambda4,JKS,g1,kappa,change,t_iter.
class HistoryWriter {
 public:
  explicit HistoryWriter(const std::filesystem::path& path);
  void write(const IterationRecord& rec);
  static std::string header();
  static std::string row(const IterationRecord& rec);

 private:
  std::ofstream out_;
};

/// All reported load factors per iteration: loop,lambda1..lambdaN.
class LambdaHistoryWriter {
 public:
  LambdaHistoryWriter(const std::filesystem::path& path, int n_eig);
  void write(const IterationRecord& rec);

 private:
  std::ofstream out_;
  int n_eig_;
};

/// One byte per pixel, rows top to bottom.
void write_pgm(const std::filesystem::path& path, int width, int height,
               const std::vector<std::uint8_t>& gray);
/// Three bytes per pixel.
void write_ppm(const std::filesystem::path& path, int width, int height,
               const std::vector<std::uint8_t>& rgb);

/// round(255 (1 - x)), one pixel per element (solid is black).
std::vector<std::uint8_t> density_pixels(const GridModel& grid, std::span<const double> x_phys);

/// Minor principal stress of the interpolated material, red for tension and
/// blue for compression, faded towards white in void regions.
std::vector<std::uint8_t> stress_pixels(const GridModel& grid, const ElementOperators& ops,
                                        const Interpolation& interp, std::span<const double> x_phys,
                                        std::span<const double> u);

/// Element strain energy density of a mode on a logarithmic colour ramp.
std::vector<std::uint8_t> mode_pixels(const GridModel& grid, const ElementOperators& ops,
                                      const Interpolation& interp, std::span<const double> x_phys,
                                      std::span<const double> phi);

struct Checkpoint {
  std::string preset;
  int nelx = 0;
  int nely = 0;
  double lx = 1.0;
  int loop = 0;
  std::string problem;
  std::vector<double> bounds;
  ContinuationState continuation;
  double eta = 0.5;
  std::vector<double> x;
  std::vector<Index> passive_solid;
  std::vector<Index> passive_void;
};

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& cp);
/// Throws IoError on unreadable files and ConfigError on malformed content.
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace bucktop
