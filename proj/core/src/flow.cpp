#include "wegnerflow/flow.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <sstream>

#include "wegnerflow/error.hpp"
#include "wegnerflow/numerics.hpp"

namespace wegnerflow {

std::string describe(const GeneratorChoice& choice) {
  if (const auto* b = std::get_if<BandGenerator>(&choice)) {
    return "band(" + std::to_string(b->offset) + ")";
  }
  return "wegner";
}

std::string to_string(StopReason r) {
  switch (r) {
    case StopReason::Converged: return "Converged";
    case StopReason::MaxL: return "MaxL";
    case StopReason::Stalled: return "Stalled";
    case StopReason::IntegratorFailure: return "IntegratorFailure";
  }
  return "Unknown";
}

namespace {

// eta_mn = (eps_m - eps_n) H_mn restricted to the targeted entries.
Matrix generator_matrix(const Matrix& h, const GeneratorChoice& choice) {
  const Eigen::Index d = h.rows();
  Matrix eta = Matrix::Zero(d, d);
  const Eigen::VectorXd eps = h.diagonal().real();
  if (const auto* b = std::get_if<BandGenerator>(&choice)) {
    const int i = b->offset;
    for (Eigen::Index n = 0; n + i < d; ++n) {
      const Complex lower = (eps[n + i] - eps[n]) * h(n + i, n);
      eta(n + i, n) = lower;
      eta(n, n + i) = -std::conj(lower);
    }
    return eta;
  }
  for (Eigen::Index c = 0; c < d; ++c) {
    for (Eigen::Index r = 0; r < d; ++r) {
      if (r != c) eta(r, c) = (eps[r] - eps[c]) * h(r, c);
    }
  }
  return eta;
}

double target_sq_of(const Matrix& h, const GeneratorChoice& choice) {
  if (const auto* b = std::get_if<BandGenerator>(&choice)) {
    if (b->offset <= 0 || b->offset >= h.rows()) return 0.0;
    return 2.0 * h.diagonal(-b->offset).squaredNorm();
  }
  return h.squaredNorm() - h.diagonal().squaredNorm();
}

}  // namespace

AntiHermitianOperator wegner_generator(const HermitianOperator& h) {
  return AntiHermitianOperator::symmetrized(generator_matrix(h.matrix(), WegnerGenerator{}));
}

AntiHermitianOperator band_generator(const HermitianOperator& h, int offset) {
  if (!band_split(h).has_band(offset)) {
    throw Error(ErrorCode::NoSuchBand,
                "band " + std::to_string(offset) + " is not present in H");
  }
  return AntiHermitianOperator::symmetrized(generator_matrix(h.matrix(), BandGenerator{offset}));
}

AntiHermitianOperator generator(const HermitianOperator& h, const GeneratorChoice& choice) {
  return AntiHermitianOperator::symmetrized(generator_matrix(h.matrix(), choice));
}

HermitianOperator flow_rhs(const HermitianOperator& h, const AntiHermitianOperator& eta) {
  if (h.dim() != eta.dim()) {
    throw Error(ErrorCode::DimMismatch, "generator and Hamiltonian dimensions differ");
  }
  return HermitianOperator::symmetrized(commutator(eta.matrix(), h.matrix()));
}

double target_norm_sq(const HermitianOperator& h, const GeneratorChoice& choice) {
  return target_sq_of(h.matrix(), choice);
}

BlockReport block_report(const HermitianOperator& h, double cluster_tol) {
  const Eigen::Index d = h.dim();
  const Eigen::VectorXd eps = h.diagonal();
  std::vector<int> order(static_cast<std::size_t>(d));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return eps[a] < eps[b]; });

  BlockReport report;
  std::vector<int> cluster_of(static_cast<std::size_t>(d), 0);
  for (std::size_t k = 0; k < order.size(); ++k) {
    if (k == 0 || eps[order[k]] - eps[order[k - 1]] >= cluster_tol) report.clusters.emplace_back();
    report.clusters.back().push_back(order[k]);
    cluster_of[static_cast<std::size_t>(order[k])] = static_cast<int>(report.clusters.size()) - 1;
  }
  for (auto& c : report.clusters) std::sort(c.begin(), c.end());

  for (Eigen::Index c = 0; c < d; ++c) {
    for (Eigen::Index r = 0; r < d; ++r) {
      if (r == c) continue;
      const double w = std::norm(h(r, c));
      if (cluster_of[static_cast<std::size_t>(r)] == cluster_of[static_cast<std::size_t>(c)]) {
        report.intra_cluster_sq += w;
      } else {
        report.inter_cluster_sq += w;
      }
    }
  }
  return report;
}

FlowTrajectory integrate_flow(const HermitianOperator& h0, const GeneratorChoice& choice,
                              const FlowConfig& cfg) {
  if (!(cfg.l_max > 0.0) || !std::isfinite(cfg.l_max)) {
    throw Error(ErrorCode::InvalidArgument, "l_max must be positive and finite");
  }
  if (const auto* sp = std::get_if<SampleSpacing>(&cfg.sampling); sp && !(sp->dl > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "sample_dl must be positive");
  }
  if (const auto* se = std::get_if<SampleEvery>(&cfg.sampling); se && se->steps <= 0) {
    throw Error(ErrorCode::InvalidArgument, "sample_every must be positive");
  }

  const BandDecomposition bd0 = band_split(h0);
  if (const auto* b = std::get_if<BandGenerator>(&choice); b && !bd0.has_band(b->offset)) {
    throw Error(ErrorCode::NoSuchBand, "Band(a) requires i_a to be a band of H at l = 0; band " +
                                           std::to_string(b->offset) + " is absent");
  }

  const Eigen::Index d = h0.dim();
  const bool track = cfg.track_unitary;
  const double h_norm = h0.frobenius_norm();

  FlowTrajectory traj;
  traj.choice = choice;
  traj.initial_bands = bd0.band_indices();

  ode::State y(d, track ? 2 * d : d);
  y.leftCols(d) = h0.matrix();
  if (track) y.rightCols(d) = Matrix::Identity(d, d);

  auto rhs = [&](double, const ode::State& state) -> ode::State {
    const Matrix h = state.leftCols(d);
    const Matrix eta = generator_matrix(h, choice);
    ode::State out(d, state.cols());
    const Matrix x = eta * h;
    out.leftCols(d) = x + x.adjoint();  // [eta, H] = eta H + (eta H)^dagger
    if (track) out.rightCols(d) = eta * state.rightCols(d);
    return out;
  };

  auto record = [&](double l) {
    FlowSample s;
    s.l = l;
    s.h = HermitianOperator::symmetrized(y.leftCols(d));
    const Matrix& m = s.h.matrix();
    if (track) {
      s.u = y.rightCols(d);
      const double defect = unitarity_defect(*s.u);
      if (defect > cfg.unitarity_limit) {
        std::ostringstream os;
        os << "U^dagger U = I violated at l = " << l << ": max deviation " << defect << " > "
           << cfg.unitarity_limit << " (step too large)";
        throw Error(ErrorCode::UnitarityDrift, os.str());
      }
    }
    s.eps_sq_sum = m.diagonal().squaredNorm();
    s.offdiag_sq = m.squaredNorm() - s.eps_sq_sum;
    s.trace_h = m.diagonal().real().sum();
    s.trace_h2 = m.squaredNorm();
    s.target_sq = target_sq_of(m, choice);
    s.eta_norm = generator_matrix(m, choice).norm();
    for (int offset : traj.initial_bands) s.band_norms[offset] = band_norm_sq(s.h, offset);
    traj.samples.push_back(std::move(s));
  };

  // Returns true when the flow should stop at the state just recorded.
  auto stop_here = [&]() -> bool {
    const FlowSample& s = traj.samples.back();
    if (s.target_sq <= cfg.stop_offdiag) {
      traj.stop_reason = StopReason::Converged;
      return true;
    }
    if (s.eta_norm < kStallRelative * h_norm) {
      traj.stop_reason = StopReason::Stalled;
      std::ostringstream os;
      os << "generator vanishes (||eta||_F = " << s.eta_norm << ") while targeted norm^2 = "
         << s.target_sq << " > stop_offdiag: degenerate-diagonal fixed point at l = " << s.l;
      traj.warnings.push_back(os.str());
      return true;
    }
    return false;
  };

  record(0.0);
  if (!stop_here()) {
    ode::Stepper stepper(cfg.integrator);
    double l = 0.0;
    std::size_t next_grid = 1;
    int since_sample = 0;
    const auto* spacing = std::get_if<SampleSpacing>(&cfg.sampling);
    const int every = spacing ? 0 : std::get<SampleEvery>(cfg.sampling).steps;
    bool stopped = false;

    while (!stopped) {
      double limit = cfg.l_max - l;
      double grid_l = 0.0;
      if (spacing) {
        grid_l = static_cast<double>(next_grid) * spacing->dl;
        limit = std::min(limit, grid_l - l);
      }
      double h = 0.0;
      try {
        h = stepper.advance(rhs, l, y, limit);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::IntegratorFailure) throw;
        traj.stop_reason = StopReason::IntegratorFailure;
        traj.warnings.emplace_back(e.what());
        break;
      }
      ++traj.steps;
      l += h;

      bool on_grid = false;
      if (spacing && std::abs(l - grid_l) <= 1e-12 * std::max(1.0, grid_l)) {
        l = grid_l;
        ++next_grid;
        on_grid = true;
      } else if (!spacing && ++since_sample >= every) {
        since_sample = 0;
        on_grid = true;
      }
      const bool at_end = l >= cfg.l_max * (1.0 - 1e-15);

      // With a fixed sample spacing the flow stops on grid points only, so the
      // samples stay uniform. Otherwise stop conditions are checked every step
      // and off-grid samples are recorded only when stopping.
      bool stop_candidate = false;
      if (!spacing) {
        const Matrix hm = y.leftCols(d);
        stop_candidate = target_sq_of(hm, choice) <= cfg.stop_offdiag ||
                         generator_matrix(hm, choice).norm() < kStallRelative * h_norm;
      }
      if (on_grid || at_end || stop_candidate) {
        record(l);
        if (stop_here()) {
          stopped = true;
        } else if (at_end) {
          traj.stop_reason = StopReason::MaxL;
          stopped = true;
        }
      }
    }
  }

  traj.blocks = block_report(traj.back().h, cfg.cluster_tol_rel * h_norm);
  return traj;
}

double DecayIdentity::max_relative_decay_residual() const {
  double worst = 0.0;
  for (double r : decay_residual) worst = std::max(worst, r);
  return scale > 0.0 ? worst / scale : worst;
}

DecayIdentity decay_identity_residual(const FlowTrajectory& traj) {
  const std::size_t n = traj.samples.size();
  if (n < 3) {
    throw Error(ErrorCode::TooFewSamples, "decay identity needs at least 3 samples");
  }
  std::vector<double> ls(n), off(n), eps2(n);
  for (std::size_t k = 0; k < n; ++k) {
    ls[k] = traj.samples[k].l;
    off[k] = traj.samples[k].offdiag_sq;
    eps2[k] = traj.samples[k].eps_sq_sum;
  }
  const auto* band = std::get_if<BandGenerator>(&traj.choice);

  DecayIdentity out;
  for (std::size_t k = 1; k + 1 < n; ++k) {
    const Matrix& m = traj.samples[k].h.matrix();
    const Eigen::VectorXd eps = m.diagonal().real();
    const Eigen::Index d = m.rows();
    double analytic = 0.0;
    for (Eigen::Index i = 1; i < d; ++i) {
      if (band && band->offset != i) continue;
      for (Eigen::Index r = 0; r + i < d; ++r) {
        const double gap = eps[r + i] - eps[r];
        analytic -= 4.0 * gap * gap * std::norm(m(r + i, r));
      }
    }
    const double d_off = central_derivative<double>(ls, off, k);
    const double d_eps = central_derivative<double>(ls, eps2, k);
    out.l.push_back(ls[k]);
    out.numeric_rate.push_back(d_off);
    out.analytic_rate.push_back(analytic);
    out.decay_residual.push_back(std::abs(d_off - analytic));
    out.trace_residual.push_back(std::abs(d_off + d_eps));
    out.scale = std::max(out.scale, std::abs(analytic));
  }
  return out;
}

}  // namespace wegnerflow
