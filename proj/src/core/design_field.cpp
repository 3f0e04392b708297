#include "design_field.hpp"

#include "errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace bucktop {

DensityFilter::DensityFilter(int nelx, int nely, double rmin, FilterBC bc) : rmin_(rmin), bc_(bc) {
  if (!(rmin > 0.0)) throw InvalidArgument("filter radius must be positive");
  const int reach = std::max(0, static_cast<int>(std::ceil(rmin)) - 1);

  double full_stencil = 0.0;
  for (int di = -reach; di <= reach; ++di)
    for (int dj = -reach; dj <= reach; ++dj)
      full_stencil += std::max(0.0, rmin - std::hypot(di, dj));

  const Index m = static_cast<Index>(nelx) * nely;
  row_ptr_.assign(1, 0);
  row_ptr_.reserve(m + 1);
  for (int c = 0; c < nelx; ++c) {
    for (int r = 0; r < nely; ++r) {
      const std::size_t begin = col_idx_.size();
      double sum = 0.0;
      for (int dj = -reach; dj <= reach; ++dj) {
        const int cc = c + dj;
        if (cc < 0 || cc >= nelx) continue;
        for (int di = -reach; di <= reach; ++di) {
          const int rr = r + di;
          if (rr < 0 || rr >= nely) continue;
          const double w = std::max(0.0, rmin - std::hypot(di, dj));
          if (w <= 0.0) continue;
          col_idx_.push_back(static_cast<Index>(cc) * nely + rr);
          weights_.push_back(w);
          sum += w;
        }
      }
      const double norm = bc == FilterBC::Neumann ? sum : full_stencil;
      for (std::size_t k = begin; k < weights_.size(); ++k) weights_[k] /= norm;
      row_ptr_.push_back(static_cast<Index>(col_idx_.size()));
    }
  }
}

std::vector<double> DensityFilter::apply(std::span<const double> x) const {
  if (static_cast<Index>(x.size()) != size()) throw InvalidArgument("filter input size mismatch");
  std::vector<double> out(x.size(), 0.0);
  for (Index e = 0; e < size(); ++e) {
    double acc = 0.0;
    for (Index k = row_ptr_[e]; k < row_ptr_[e + 1]; ++k) acc += weights_[k] * x[col_idx_[k]];
    out[e] = acc;
  }
  return out;
}

std::vector<double> DensityFilter::apply_adjoint(std::span<const double> s) const {
  if (static_cast<Index>(s.size()) != size()) throw InvalidArgument("filter input size mismatch");
  std::vector<double> out(s.size(), 0.0);
  for (Index e = 0; e < size(); ++e)
    for (Index k = row_ptr_[e]; k < row_ptr_[e + 1]; ++k) out[col_idx_[k]] += weights_[k] * s[e];
  return out;
}

double project_value(double x_tilde, double eta, double beta) {
  if (beta == 0.0) return x_tilde;
  const double num = std::tanh(beta * eta) + std::tanh(beta * (x_tilde - eta));
  const double den = std::tanh(beta * eta) + std::tanh(beta * (1.0 - eta));
  return num / den;
}

std::vector<double> project(std::span<const double> x_tilde, double eta, double beta) {
  std::vector<double> out(x_tilde.size());
  std::transform(x_tilde.begin(), x_tilde.end(), out.begin(),
                 [&](double v) { return project_value(v, eta, beta); });
  return out;
}

ProjectionDerivs project_derivs(std::span<const double> x_tilde, double eta, double beta) {
  ProjectionDerivs d;
  d.d_dtilde.resize(x_tilde.size());
  d.d_deta.resize(x_tilde.size());
  if (beta == 0.0) {
    std::fill(d.d_dtilde.begin(), d.d_dtilde.end(), 1.0);
    std::fill(d.d_deta.begin(), d.d_deta.end(), 0.0);
    return d;
  }
  auto sech2 = [](double v) {
    const double c = std::cosh(v);
    return 1.0 / (c * c);
  };
  const double den = std::tanh(beta * eta) + std::tanh(beta * (1.0 - eta));
  const double dden = beta * (sech2(beta * eta) - sech2(beta * (1.0 - eta)));
  for (std::size_t e = 0; e < x_tilde.size(); ++e) {
    const double s = beta * (x_tilde[e] - eta);
    const double num = std::tanh(beta * eta) + std::tanh(s);
    const double dnum = beta * (sech2(beta * eta) - sech2(s));
    d.d_dtilde[e] = beta * sech2(s) / den;
    d.d_deta[e] = (dnum * den - num * dden) / (den * den);
  }
  return d;
}

EtaSolution volume_preserving_eta(std::span<const double> x_tilde, double beta,
                                  double target_mean) {
  if (x_tilde.empty()) return {};
  auto projected_mean = [&](double eta) {
    double acc = 0.0;
    for (double v : x_tilde) acc += project_value(v, eta, beta);
    return acc / static_cast<double>(x_tilde.size());
  };

  constexpr double kTol = 1e-10;
  const double at_zero = projected_mean(0.0);  // largest mean
  const double at_one = projected_mean(1.0);   // smallest mean
  if (at_zero - at_one <= kTol) {
    const bool reachable = target_mean <= at_zero + kTol && target_mean >= at_one - kTol;
    return {0.5, !reachable};
  }
  if (target_mean >= at_zero) return {0.0, target_mean - at_zero > kTol};
  if (target_mean <= at_one) return {1.0, at_one - target_mean > kTol};

  double lo = 0.0;
  double hi = 1.0;
  for (int it = 0; it < 200 && hi - lo > 1e-16; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (projected_mean(mid) > target_mean)
      lo = mid;
    else
      hi = mid;
  }
  return {0.5 * (lo + hi), false};
}

ContinuationStep apply_continuation(double current, int loop, const ContinuationSchedule& schedule) {
  if (schedule.isteps < 1) throw InvalidArgument("continuation period must be >= 1");
  if (loop < schedule.istart || (loop - schedule.istart) % schedule.isteps != 0)
    return {current, false};
  const double next = std::min(schedule.max_value, current + schedule.delta);
  if (next <= current) return {current, false};
  return {next, true};
}

DesignPipeline::DesignPipeline(const GridModel& grid, double rmin, FilterBC bc, FilterMode mode)
    : grid_(&grid), filter_(grid.nelx(), grid.nely(), rmin, bc), mode_(mode) {}

void DesignPipeline::update(DesignState& state) const {
  const GridModel& g = *grid_;
  if (static_cast<Index>(state.x.size()) != g.num_elements())
    throw InvalidArgument("design vector size does not match the grid");
  for (Index e : g.passive_solid()) state.x[e] = 1.0;
  for (Index e : g.passive_void()) state.x[e] = 0.0;

  state.x_tilde = filter_.apply(state.x);
  if (mode_ == FilterMode::FilterOnly) {
    state.x_phys = state.x_tilde;
    state.dphys_dtilde.assign(state.x.size(), 1.0);
  } else {
    if (mode_ == FilterMode::VolumePreserving) {
      std::vector<double> act_tilde;
      act_tilde.reserve(g.active().size());
      for (Index e : g.active()) act_tilde.push_back(state.x_tilde[e]);
      const double target =
          act_tilde.empty() ? 0.5
                            : std::accumulate(act_tilde.begin(), act_tilde.end(), 0.0) /
                                  static_cast<double>(act_tilde.size());
      state.eta = volume_preserving_eta(act_tilde, state.beta, target).eta;
    }
    state.x_phys = project(state.x_tilde, state.eta, state.beta);
    state.dphys_dtilde = project_derivs(state.x_tilde, state.eta, state.beta).d_dtilde;
  }
  // Passive values are pinned, so they carry no derivative.
  for (Index e : g.passive_solid()) {
    state.x_phys[e] = 1.0;
    state.dphys_dtilde[e] = 0.0;
  }
  for (Index e : g.passive_void()) {
    state.x_phys[e] = 0.0;
    state.dphys_dtilde[e] = 0.0;
  }
}

std::vector<double> DesignPipeline::chain_to_design(std::span<const double> d_dphys,
                                                    const DesignState& state) const {
  if (d_dphys.size() != state.dphys_dtilde.size())
    throw InvalidArgument("sensitivity size does not match the design state");
  std::vector<double> scaled(d_dphys.size());
  for (std::size_t e = 0; e < scaled.size(); ++e) scaled[e] = d_dphys[e] * state.dphys_dtilde[e];
  return filter_.apply_adjoint(scaled);
}

}  // namespace bucktop
