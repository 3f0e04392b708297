#pragma once

// Batch run orchestration: builds the model from a RunConfig, iterates the
// optimizer and writes the artifacts.

#include "config.hpp"
#include "optimizer.hpp"
#include "output.hpp"

#include <filesystem>
#include <memory>
#include <optional>
#include <vector>

namespace bucktop {

class Run {
 public:
  /// Builds the grid and optimizer, loads the initial design when x0 is set
  /// and opens the history files. An empty output_dir disables all files.
  explicit Run(RunConfig config);
  ~Run();
  Run(const Run&) = delete;
  Run& operator=(const Run&) = delete;

  /// True once maxit iterations ran or the design stopped changing.
  bool finished() const;

  /// One iteration; appends to the history and writes periodic images.
  const IterationRecord& step();

  /// Steps until finished, then writes the final artifacts.
  void execute();

  /// Final density, stress and mode images plus the checkpoint.
  void finalize();

  Checkpoint checkpoint() const;

  const RunConfig& config() const { return config_; }
  const GridModel& grid() const { return *grid_; }
  const Optimizer& optimizer() const { return *optimizer_; }
  Optimizer& optimizer() { return *optimizer_; }
  const std::vector<IterationRecord>& history() const { return history_; }
  const std::filesystem::path& output_dir() const { return dir_; }

 private:
  void write_density(const std::filesystem::path& name) const;

  RunConfig config_;
  std::filesystem::path dir_;
  std::unique_ptr<GridModel> grid_;
  std::unique_ptr<Optimizer> optimizer_;
  std::optional<HistoryWriter> csv_;
  std::optional<LambdaHistoryWriter> lambda_csv_;
  std::vector<IterationRecord> history_;
};

/// Renders the density stored in a checkpoint as a PGM image.
void render_checkpoint(const std::filesystem::path& checkpoint, const std::filesystem::path& image);

}  // namespace bucktop
