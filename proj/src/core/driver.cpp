#include "driver.hpp"

#include "errors.hpp"
#include "log.hpp"
#include "presets.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace bucktop {

Run::Run(RunConfig config) : config_(std::move(config)), dir_(config_.output_dir) {
  grid_ = std::make_unique<GridModel>(make_preset(config_.preset, config_.nelx, config_.nely, config_.lx));

  std::vector<double> x0;
  if (!config_.x0.empty()) {
    const Checkpoint cp = load_checkpoint(config_.x0);
    if (cp.nelx != config_.nelx || cp.nely != config_.nely)
      throw ConfigError("initial design " + config_.x0 + " is " + std::to_string(cp.nelx) + "x" +
                        std::to_string(cp.nely) + ", the run is " + std::to_string(config_.nelx) +
                        "x" + std::to_string(config_.nely));
    x0 = cp.x;
  }
  optimizer_ = std::make_unique<Optimizer>(*grid_, config_.settings, std::move(x0));

  if (!dir_.empty()) {
    std::filesystem::create_directories(dir_);
    csv_.emplace(dir_ / "history.csv");
    if (config_.settings.problem.has_buckling())
      lambda_csv_.emplace(dir_ / "lambda_history.csv", config_.settings.n_eig);
  }
}

Run::~Run() = default;

bool Run::finished() const {
  return optimizer_->loop() >= config_.maxit || optimizer_->converged();
}

const IterationRecord& Run::step() {
  history_.push_back(optimizer_->step());
  const IterationRecord& rec = history_.back();
  if (csv_) csv_->write(rec);
  if (lambda_csv_) lambda_csv_->write(rec);

  std::ostringstream msg;
  msg << "It." << rec.loop << " f=" << format_number(rec.f) << " c=" << format_number(rec.c);
  if (!rec.lambda.empty()) msg << " lambda1=" << format_number(rec.lambda.front());
  msg << " g1=" << format_number(rec.g1) << " ch=" << format_number(rec.change);
  log::info(msg.str());

  if (!dir_.empty() && config_.write_images && config_.image_every > 0 &&
      rec.loop % config_.image_every == 0) {
    char name[32];
    std::snprintf(name, sizeof name, "density_%04d.pgm", rec.loop);
    write_density(name);
  }
  return rec;
}

void Run::execute() {
  while (!finished()) step();
  finalize();
}

void Run::write_density(const std::filesystem::path& name) const {
  write_pgm(dir_ / name, grid_->nelx(), grid_->nely(),
            density_pixels(*grid_, optimizer_->design().x_phys));
}

void Run::finalize() {
  if (dir_.empty()) return;
  save_checkpoint(dir_ / "checkpoint.json", checkpoint());
  if (!config_.write_images) return;
  write_density("density_final.pgm");

  const Optimizer& opt = *optimizer_;
  Interpolation interp = config_.settings.interp;
  interp.penal_k = opt.continuation().penal_k;
  interp.penal_g = opt.continuation().penal_g;
  // Fields below belong to the last analysed design, i.e. before the final update.
  if (!opt.displacement().empty() && !history_.empty()) {
    write_ppm(dir_ / "stress_final.ppm", grid_->nelx(), grid_->nely(),
              stress_pixels(*grid_, opt.assembler().ops(), interp, opt.design().x_phys,
                            opt.displacement()));
  }
  if (opt.buckling()) {
    const BucklingSolution& b = *opt.buckling();
    const int modes = std::min<int>(4, static_cast<int>(b.phi.cols()));
    for (int i = 0; i < modes; ++i) {
      const Eigen::VectorXd phi = b.phi.col(i);
      write_ppm(dir_ / ("mode_" + std::to_string(i + 1) + ".ppm"), grid_->nelx(), grid_->nely(),
                mode_pixels(*grid_, opt.assembler().ops(), interp, opt.design().x_phys,
                            std::span<const double>(phi.data(), phi.size())));
    }
  }
}

Checkpoint Run::checkpoint() const {
  Checkpoint cp;
  cp.preset = config_.preset;
  cp.nelx = grid_->nelx();
  cp.nely = grid_->nely();
  cp.lx = grid_->lx();
  cp.loop = optimizer_->loop();
  cp.problem = config_.settings.problem.letters();
  cp.bounds = config_.settings.problem.bounds();
  cp.continuation = optimizer_->continuation();
  cp.eta = optimizer_->design().eta;
  cp.x = optimizer_->design().x;
  cp.passive_solid = grid_->passive_solid();
  cp.passive_void = grid_->passive_void();
  return cp;
}

void render_checkpoint(const std::filesystem::path& checkpoint, const std::filesystem::path& image) {
  const Checkpoint cp = load_checkpoint(checkpoint);
  GridModel grid(cp.nelx, cp.nely, cp.lx);
  grid.set_passive(cp.passive_solid, cp.passive_void);
  // The stored x is the design variable; rendering shows it directly.
  write_pgm(image, cp.nelx, cp.nely, density_pixels(grid, cp.x));
}

}  // namespace bucktop
