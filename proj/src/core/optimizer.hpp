#pragma once

// Problem assembly, the MMA-like optimality-criteria update and the redesign loop.

#include "assembly.hpp"
#include "design_field.hpp"
#include "sensitivity.hpp"
#include "solvers.hpp"

#include <array>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace bucktop {

enum class Criterion { Buckling, Compliance, Volume };

/// Objective followed by constraints. Supported forms: BCV, VCB, CV, VC.
struct ProblemSpec {
  std::vector<Criterion> criteria;
  double cmax = 0.0;   // compliance bound as a multiple of the loop-1 compliance
  double vfmax = 0.0;  // volume fraction bound
  double lmin = 0.0;   // minimum buckling load factor

  /// letters: e.g. "BCV"; bounds in the order [Cmax, Vfmax], [Cmax, Lmin], Vfmax or Cmax.
  static ProblemSpec parse(const std::string& letters, const std::vector<double>& bounds);

  Criterion objective() const { return criteria.front(); }
  bool has(Criterion c) const;
  bool has_buckling() const { return has(Criterion::Buckling); }
  std::string letters() const;
  std::vector<double> bounds() const;
};

/// Physical responses of one iteration, differentiated with respect to x^.
struct Responses {
  ResponseGradient volume;
  ResponseGradient compliance;
  std::vector<double> mu;  // positive modes only
  Eigen::MatrixXd dmu;     // m x mu.size()
  double c_ref = 1.0;      // compliance at loop 1
  double c_bar = 1.0;      // compliance bound
};

struct ProblemFunctions {
  double g0 = 0.0;
  std::vector<double> dg0;
  double g1 = 0.0;
  std::vector<double> dg1;
  /// KS aggregate over mu (NaN when buckling is not part of the problem).
  double jks = 0.0;
  /// Individual constraint values before aggregation.
  std::vector<double> constraints;
};

ProblemFunctions build_problem(const ProblemSpec& spec, const Responses& responses, double rho);

struct OcParams {
  double move = 0.1;
  double as_reduce = 0.7;
  double as_relax = 1.2;
};

struct Asymptotes {
  std::vector<double> lower;
  std::vector<double> upper;
};

enum class DualBranch { Root, Inactive, Infeasible, Frozen };

struct OcResult {
  std::vector<double> x;
  Asymptotes asymptotes;
  std::vector<double> x_lower;  // adaptive bounds actually applied
  std::vector<double> x_upper;
  double kappa = 0.0;
  DualBranch branch = DualBranch::Inactive;
  double psi0 = 0.0;
  double psi_kappa = 0.0;
};

inline constexpr double kDualUpper = 1e6;

/// One MMA-like update of the active variables for a single constraint.
/// Asymptotes are (re)initialized when loop < 2.5 or restart is set.
OcResult oc_update(int loop, std::span<const double> xt, std::span<const double> dg0, double g1,
                   std::span<const double> dg1, const OcParams& par,
                   std::span<const double> x_old, std::span<const double> x_old1,
                   const Asymptotes& asymptotes, double beta, bool restart);

/// Closed-form primal map x(kappa) and dual function psi(kappa) for fixed
/// asymptotes and bounds.
struct OcSubproblem {
  std::vector<double> xt, lower, upper, x_lower, x_upper;
  std::vector<double> p0, q0, p1, q1;
  double psi_offset = 0.0;

  std::vector<double> primal(double kappa) const;
  double psi(double kappa) const;
};

struct UpdateRequest {
  int loop = 1;
  std::span<const double> x;  // active variables
  double g0 = 0.0;
  std::span<const double> dg0;
  double g1 = 0.0;
  std::span<const double> dg1;
  double beta = 1.0;
  bool restart = false;
};

struct UpdateResult {
  std::vector<double> x;
  double kappa = 0.0;
};

/// Seam for swapping in another optimizer.
class DesignUpdater {
 public:
  virtual ~DesignUpdater() = default;
  virtual UpdateResult update(const UpdateRequest& request) = 0;
};

class OcUpdater final : public DesignUpdater {
 public:
  explicit OcUpdater(OcParams params) : params_(params) {}
  UpdateResult update(const UpdateRequest& request) override;
  const OcResult& last() const { return last_; }

 private:
  OcParams params_;
  std::vector<double> x_old_;
  std::vector<double> x_old1_;
  Asymptotes asymptotes_;
  OcResult last_;
};

struct OptimizerSettings {
  ProblemSpec problem;
  Interpolation interp;
  double nu = 0.3;
  double rmin = 2.0;
  FilterBC filter_bc = FilterBC::Neumann;
  FilterMode filter_mode = FilterMode::Projection;
  double eta = 0.5;
  double beta = 2.0;
  double rho = 160.0;
  ContinuationSchedule penal_k_cont{1, 3.0, 1, 0.0};
  ContinuationSchedule penal_g_cont{1, 3.0, 1, 0.0};
  ContinuationSchedule beta_cont{1, 2.0, 1, 0.0};
  ContinuationSchedule rho_cont{1, 160.0, 1, 0.0};
  int n_eig = 12;
  OcParams oc;
  EigenOptions eig;
  double stop_change = 1e-6;
  bool log_timings = true;
};

struct IterationRecord {
  int loop = 0;
  double f = 0.0;
  double c = 0.0;
  std::vector<double> lambda;  // all reported modes, empty without buckling
  double jks = 0.0;
  double g0 = 0.0;
  double g1 = 0.0;
  double kappa = 0.0;
  double change = 0.0;
  double t_iter = 0.0;
};

/// Continuation-controlled parameters.
struct ContinuationState {
  double penal_k = 3.0;
  double penal_g = 3.0;
  double beta = 2.0;
  double rho = 160.0;
};

class Optimizer {
 public:
  /// x0: full design field (passive values are imposed). When empty the
  /// design starts at 1 on active elements for volume objectives, otherwise
  /// at the uniform value matching the volume bound.
  Optimizer(const GridModel& grid, OptimizerSettings settings, std::vector<double> x0 = {});

  /// One redesign iteration. Throws on solver failure.
  IterationRecord step();

  bool converged() const { return converged_; }
  int loop() const { return loop_; }
  const DesignState& design() const { return state_; }
  const std::vector<double>& displacement() const { return u_; }
  const std::optional<BucklingSolution>& buckling() const { return buckling_; }
  const ContinuationState& continuation() const { return cont_; }
  const OptimizerSettings& settings() const { return settings_; }
  const Assembler& assembler() const { return assembler_; }
  const DesignPipeline& pipeline() const { return pipeline_; }
  double c_ref() const { return c_ref_; }

  /// Restores continuation values (e.g. from a checkpoint).
  void set_continuation(const ContinuationState& cont);
  void set_updater(std::unique_ptr<DesignUpdater> updater);

  /// Recomputes x~ and x^ from the current x without solving anything.
  void refresh_fields();

 private:
  Interpolation interpolation() const;

  const GridModel* grid_;
  OptimizerSettings settings_;
  Assembler assembler_;
  DesignPipeline pipeline_;
  std::unique_ptr<DesignUpdater> updater_;
  DesignState state_;
  ContinuationState cont_;
  std::vector<double> u_;
  std::optional<BucklingSolution> buckling_;
  double c_ref_ = 0.0;
  double c_bar_ = 0.0;
  int loop_ = 0;
  bool restart_ = false;
  bool converged_ = false;
};

}  // namespace bucktop
