#pragma once

#include <functional>
#include <string>
#include <vector>

#include "wegnerflow/operator.hpp"

namespace wegnerflow {

/// A map alpha -> U(alpha) on a k-dimensional coordinate chart together with
/// the base state |psi>; the family's states are |psi(alpha)> = U^dagger(alpha)|psi>.
class ParametrizedFamily {
 public:
  using UnitaryMap = std::function<Matrix(const RealVector&)>;
  using Predicate = std::function<bool(const RealVector&)>;
  /// Recovers coordinates from a unitary known to lie in the family.
  /// `previous` (may be null) resolves chart ambiguities such as an
  /// undefined azimuth at a pole.
  using Projection = std::function<RealVector(const Matrix& u, const RealVector* previous)>;

  /// Throws InvalidArgument on empty coordinates, a non-normalized base
  /// state (tolerance 1e-12) or a non-positive fd step.
  ParametrizedFamily(std::string name, std::vector<std::string> coord_names,
                     UnitaryMap unitary_at, Vector base_state, RealVector fd_step);

  /// Declared coordinate domain; unitary() rejects points outside it.
  ParametrizedFamily& with_domain(Predicate in_domain);
  /// Where unitary_at is defined at all. Finite-difference stencils may
  /// leave the declared domain but never this set. Defaults to everywhere.
  ParametrizedFamily& with_evaluable(Predicate evaluable);
  /// Where finite-difference stencil points may go; keeps stencils away from
  /// chart singularities. Defaults to the evaluable set.
  ParametrizedFamily& with_stencil_region(Predicate region);
  ParametrizedFamily& with_projection(Projection projection);
  /// Basis indices on which flow unitaries are compared with the family
  /// (truncated models exclude edge rows). Empty means all.
  ParametrizedFamily& with_compare_indices(std::vector<Eigen::Index> indices);
  /// Compare operators through their action on the base state only. Used
  /// where the truncated flow is faithful on the flowed state but not on the
  /// whole operator block.
  ParametrizedFamily& with_state_comparison(bool on = true);

  /// Same unitaries, different base state.
  ParametrizedFamily rebased(Vector base_state) const;

  const std::string& name() const { return name_; }
  int k() const { return static_cast<int>(coord_names_.size()); }
  Eigen::Index dim() const { return base_.size(); }
  const std::vector<std::string>& coord_names() const { return coord_names_; }
  const Vector& base_state() const { return base_; }
  const RealVector& fd_step() const { return fd_step_; }
  const std::vector<Eigen::Index>& compare_indices() const { return compare_; }
  bool has_projection() const { return static_cast<bool>(projection_); }
  bool compares_states() const { return compare_states_; }

  /// The part of an operator that comparisons look at: the block on the
  /// compared indices, or (state comparison) op|psi> on the compared rows.
  Matrix compared(const Matrix& op) const;

  bool in_domain(const RealVector& alpha) const;
  bool evaluable(const RealVector& alpha) const;
  /// alpha and all points alpha +- reach * e_i are evaluable and inside the
  /// stencil region.
  bool stencil_evaluable(const RealVector& alpha, double reach) const;

  /// Throws CoordinateOutOfDomain outside the declared domain.
  Matrix unitary(const RealVector& alpha) const;
  /// Only requires evaluability; used by finite-difference stencils.
  Matrix unitary_raw(const RealVector& alpha) const;
  /// |psi(alpha)> = U^dagger(alpha)|psi>
  Vector state(const RealVector& alpha) const;

  /// Throws NotInFamily when no projection is registered.
  RealVector project(const Matrix& u, const RealVector* previous) const;

 private:
  std::string name_;
  std::vector<std::string> coord_names_;
  UnitaryMap unitary_at_;
  Vector base_;
  RealVector fd_step_;
  Predicate in_domain_;
  Predicate evaluable_;
  Predicate stencil_region_;
  Projection projection_;
  std::vector<Eigen::Index> compare_;
  bool compare_states_ = false;
};

/// Sampled curve alpha(l) with its l-derivative.
struct CoordinateTrajectory {
  std::vector<double> l;
  std::vector<RealVector> alpha;
  std::vector<RealVector> alpha_dot;
  /// Filled by coordinate_projection: ||U(alpha(l))^dagger - U(l)^dagger e^{i chi}||_max
  /// on the compared part, and the part of eta_flow outside span{G_i}.
  std::vector<double> reconstruction_residual;
  std::vector<double> tangent_residual;

  std::size_t size() const { return l.size(); }
  /// Throws InvalidArgument on size mismatches or non-increasing l.
  void validate() const;

  /// Builds a trajectory from a callable curve and its derivative.
  static CoordinateTrajectory from_curve(const std::vector<double>& ls,
                                         const std::function<RealVector(double)>& curve,
                                         const std::function<RealVector(double)>& derivative);
};

/// Estimate of d alpha / dl at every sample (fourth-order five-point stencils
/// on uniform grids, see sample_derivative).
std::vector<RealVector> differentiate_alpha(const CoordinateTrajectory& traj);

}  // namespace wegnerflow
