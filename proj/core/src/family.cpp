#include "wegnerflow/family.hpp"

#include <cmath>
#include <span>

#include "wegnerflow/error.hpp"
#include "wegnerflow/numerics.hpp"

namespace wegnerflow {

ParametrizedFamily::ParametrizedFamily(std::string name, std::vector<std::string> coord_names,
                                       UnitaryMap unitary_at, Vector base_state,
                                       RealVector fd_step)
    : name_(std::move(name)),
      coord_names_(std::move(coord_names)),
      unitary_at_(std::move(unitary_at)),
      base_(std::move(base_state)),
      fd_step_(std::move(fd_step)) {
  if (coord_names_.empty()) throw Error(ErrorCode::InvalidArgument, "family needs coordinates");
  if (fd_step_.size() != k() || (fd_step_.array() <= 0.0).any()) {
    throw Error(ErrorCode::InvalidArgument, "fd_step must be positive per coordinate");
  }
  if (std::abs(base_.norm() - 1.0) > 1e-12) {
    throw Error(ErrorCode::InvalidArgument, "base state must be normalized to 1e-12");
  }
}

ParametrizedFamily& ParametrizedFamily::with_domain(Predicate in_domain) {
  in_domain_ = std::move(in_domain);
  return *this;
}

ParametrizedFamily& ParametrizedFamily::with_evaluable(Predicate evaluable) {
  evaluable_ = std::move(evaluable);
  return *this;
}

ParametrizedFamily& ParametrizedFamily::with_stencil_region(Predicate region) {
  stencil_region_ = std::move(region);
  return *this;
}

ParametrizedFamily& ParametrizedFamily::with_projection(Projection projection) {
  projection_ = std::move(projection);
  return *this;
}

ParametrizedFamily& ParametrizedFamily::with_compare_indices(std::vector<Eigen::Index> indices) {
  compare_ = std::move(indices);
  return *this;
}

ParametrizedFamily& ParametrizedFamily::with_state_comparison(bool on) {
  compare_states_ = on;
  return *this;
}

Matrix ParametrizedFamily::compared(const Matrix& op) const {
  if (op.rows() != dim() || op.cols() != dim()) {
    throw Error(ErrorCode::DimMismatch, "operator dimension differs from the family");
  }
  const auto n = static_cast<Eigen::Index>(compare_.size());
  if (compare_states_) {
    const Vector v = op * base_;
    if (compare_.empty()) return v;
    Matrix out(n, 1);
    for (Eigen::Index r = 0; r < n; ++r) out(r, 0) = v[compare_[static_cast<std::size_t>(r)]];
    return out;
  }
  if (compare_.empty()) return op;
  Matrix out(n, n);
  for (Eigen::Index r = 0; r < n; ++r) {
    for (Eigen::Index c = 0; c < n; ++c) {
      out(r, c) = op(compare_[static_cast<std::size_t>(r)], compare_[static_cast<std::size_t>(c)]);
    }
  }
  return out;
}

ParametrizedFamily ParametrizedFamily::rebased(Vector base_state) const {
  ParametrizedFamily copy = *this;
  if (base_state.size() != base_.size()) {
    throw Error(ErrorCode::DimMismatch, "base state dimension differs from the family");
  }
  if (std::abs(base_state.norm() - 1.0) > 1e-12) {
    throw Error(ErrorCode::InvalidArgument, "base state must be normalized to 1e-12");
  }
  copy.base_ = std::move(base_state);
  return copy;
}

bool ParametrizedFamily::in_domain(const RealVector& alpha) const {
  return alpha.size() == k() && (!in_domain_ || in_domain_(alpha));
}

bool ParametrizedFamily::evaluable(const RealVector& alpha) const {
  return alpha.size() == k() && alpha.allFinite() && (!evaluable_ || evaluable_(alpha));
}

bool ParametrizedFamily::stencil_evaluable(const RealVector& alpha, double reach) const {
  auto ok = [this](const RealVector& p) {
    return evaluable(p) && (!stencil_region_ || stencil_region_(p));
  };
  if (!ok(alpha)) return false;
  for (int i = 0; i < k(); ++i) {
    RealVector p = alpha;
    p[i] += reach;
    if (!ok(p)) return false;
    p[i] = alpha[i] - reach;
    if (!ok(p)) return false;
  }
  return true;
}

Matrix ParametrizedFamily::unitary(const RealVector& alpha) const {
  if (!in_domain(alpha)) {
    throw Error(ErrorCode::CoordinateOutOfDomain, name_ + ": coordinates outside the chart");
  }
  return unitary_raw(alpha);
}

Matrix ParametrizedFamily::unitary_raw(const RealVector& alpha) const {
  if (!evaluable(alpha)) {
    throw Error(ErrorCode::CoordinateOutOfDomain,
                name_ + ": family is not defined at the requested coordinates");
  }
  return unitary_at_(alpha);
}

Vector ParametrizedFamily::state(const RealVector& alpha) const {
  return unitary_raw(alpha).adjoint() * base_;
}

RealVector ParametrizedFamily::project(const Matrix& u, const RealVector* previous) const {
  if (!projection_) throw Error(ErrorCode::NotInFamily, name_ + " has no coordinate projection");
  return projection_(u, previous);
}

void CoordinateTrajectory::validate() const {
  if (alpha.size() != l.size() || alpha_dot.size() != l.size()) {
    throw Error(ErrorCode::InvalidArgument, "coordinate trajectory columns differ in length");
  }
  for (std::size_t k = 1; k < l.size(); ++k) {
    if (!(l[k] > l[k - 1])) {
      throw Error(ErrorCode::InvalidArgument, "coordinate trajectory l must increase strictly");
    }
  }
}

CoordinateTrajectory CoordinateTrajectory::from_curve(
    const std::vector<double>& ls, const std::function<RealVector(double)>& curve,
    const std::function<RealVector(double)>& derivative) {
  CoordinateTrajectory t;
  t.l = ls;
  for (double l : ls) {
    t.alpha.push_back(curve(l));
    t.alpha_dot.push_back(derivative(l));
  }
  t.validate();
  return t;
}

std::vector<RealVector> differentiate_alpha(const CoordinateTrajectory& traj) {
  const std::size_t n = traj.size();
  if (n < 3) throw Error(ErrorCode::TooFewSamples, "need at least 3 samples to differentiate");
  std::vector<RealVector> out(n);
  const std::span<const double> ls(traj.l);
  const std::span<const RealVector> as(traj.alpha);
  for (std::size_t k = 0; k < n; ++k) out[k] = sample_derivative<RealVector>(ls, as, k);
  return out;
}

}  // namespace wegnerflow
