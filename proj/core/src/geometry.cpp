#include "wegnerflow/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <limits>
#include <set>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "wegnerflow/error.hpp"
#include "wegnerflow/numerics.hpp"
#include "wegnerflow/report.hpp"

namespace wegnerflow {

namespace {

Complex expect(const Vector& psi, const Matrix& a) { return psi.dot(a * psi); }

RealMatrix metric_from_generators(const std::vector<Matrix>& g_ops, const Vector& psi) {
  const int k = static_cast<int>(g_ops.size());
  std::vector<Vector> w;
  std::vector<Complex> mean;
  for (const Matrix& gi : g_ops) {
    w.push_back(gi * psi);
    mean.push_back(psi.dot(w.back()));
  }
  RealMatrix g(k, k);
  for (int i = 0; i < k; ++i) {
    for (int j = i; j < k; ++j) {
      // Re<w_i|w_j> - Re(<psi|w_i>^* <psi|w_j>)
      const double v = std::real(w[i].dot(w[j])) - std::real(std::conj(mean[i]) * mean[j]);
      g(i, j) = v;
      g(j, i) = v;
    }
  }
  return g;
}

RealMatrix metric_fast(const ParametrizedFamily& family, const RealVector& alpha) {
  return metric_from_generators(family_generators(family, alpha), family.base_state());
}

double min_eigenvalue(const RealMatrix& g) {
  Eigen::SelfAdjointEigenSolver<RealMatrix> es(g, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

bool degenerate(const RealMatrix& g) { return min_eigenvalue(g) <= kDegenerateMetric; }

// Generators use a five-point stencil reaching two fd steps out.
double max_fd(const ParametrizedFamily& family) { return 2.0 * family.fd_step().maxCoeff(); }

/// Gamma^h_ij v^i v^j from a tensor stored as [h](i, j).
RealVector contract(const std::vector<RealMatrix>& gamma, const RealVector& v) {
  RealVector out(static_cast<Eigen::Index>(gamma.size()));
  for (std::size_t h = 0; h < gamma.size(); ++h) {
    out[static_cast<Eigen::Index>(h)] = v.dot(gamma[h] * v);
  }
  return out;
}

double vec_max_abs(const std::vector<RealVector>& vs) {
  double worst = 0.0;
  for (const RealVector& v : vs) {
    if (v.size() > 0) worst = std::max(worst, v.cwiseAbs().maxCoeff());
  }
  return worst;
}

Matrix eta_along(const std::vector<Matrix>& g_ops, const RealVector& alpha_dot) {
  Matrix eta = Matrix::Zero(g_ops.front().rows(), g_ops.front().cols());
  for (std::size_t i = 0; i < g_ops.size(); ++i) {
    eta += alpha_dot[static_cast<Eigen::Index>(i)] * g_ops[i];
  }
  return eta;
}

}  // namespace

// ---------------------------------------------------------------- condition

BandCondition band_condition_offset(std::span<const int> bands, int offset) {
  std::set<int> present;
  for (int b : bands) {
    if (b <= 0) throw Error(ErrorCode::InvalidArgument, "band offsets must be positive");
    present.insert(b);
  }
  if (!present.count(offset)) {
    throw Error(ErrorCode::NoSuchBand, "band " + std::to_string(offset) + " is not in the band set");
  }
  BandCondition out;
  out.offset = offset;
  for (int b : present) {
    for (int m : {2, 3}) {
      if (b == m * offset && !out.offender) {
        out.holds = false;
        out.offender = std::make_pair(b, m);
      }
    }
  }
  return out;
}

BandCondition band_condition(std::span<const int> bands, int a) {
  std::set<int> present;
  for (int b : bands) {
    if (b <= 0) throw Error(ErrorCode::InvalidArgument, "band offsets must be positive");
    present.insert(b);
  }
  if (a < 1 || a > static_cast<int>(present.size())) {
    throw Error(ErrorCode::NoSuchBand, "band label " + std::to_string(a) + " outside 1.." +
                                           std::to_string(present.size()));
  }
  const int offset = *std::next(present.begin(), a - 1);
  return band_condition_offset(bands, offset);
}

// ------------------------------------------------------------------- metric

std::vector<Matrix> family_generators(const ParametrizedFamily& family, const RealVector& alpha) {
  const Matrix u0_adj = family.unitary_raw(alpha).adjoint();
  std::vector<Matrix> out;
  out.reserve(static_cast<std::size_t>(family.k()));
  for (int i = 0; i < family.k(); ++i) {
    const double h = family.fd_step()[i];
    auto at = [&](double shift) {
      RealVector p = alpha;
      p[i] += shift;
      return family.unitary_raw(p);
    };
    const Matrix du = (8.0 * (at(h) - at(-h)) - (at(2.0 * h) - at(-2.0 * h))) / (12.0 * h);
    out.push_back(du * u0_adj);
  }
  return out;
}

MetricSample fs_metric(const ParametrizedFamily& family, const RealVector& alpha,
                       const MetricOptions& options) {
  const Matrix u0 = family.unitary(alpha);
  const double defect = unitarity_defect(u0);
  if (defect > options.unitarity_tol) {
    std::ostringstream os;
    os << family.name() << ": ||U^dagger U - I||_max = " << defect << " exceeds "
       << options.unitarity_tol;
    throw Error(ErrorCode::NonUnitaryFamily, os.str());
  }

  MetricSample out;
  out.alpha = alpha;
  out.g = metric_fast(family, alpha);

  if (options.cross_check) {
    const int k = family.k();
    const Vector psi0 = u0.adjoint() * family.base_state();
    const RealVector& h = family.fd_step();
    auto f = [&](const RealVector& delta) {
      const Vector psi = family.state(alpha + delta);
      return 1.0 - std::norm(psi0.dot(psi));
    };
    RealMatrix go(k, k);
    for (int i = 0; i < k; ++i) {
      RealVector d = RealVector::Zero(k);
      d[i] = h[i];
      go(i, i) = (f(d) + f(-d)) / (2.0 * h[i] * h[i]);
      for (int j = i + 1; j < k; ++j) {
        RealVector pp = RealVector::Zero(k);
        pp[i] = h[i];
        pp[j] = h[j];
        RealVector pm = pp;
        pm[j] = -h[j];
        const double v = (f(pp) + f(-pp) - f(pm) - f(-pm)) / (8.0 * h[i] * h[j]);
        go(i, j) = v;
        go(j, i) = v;
      }
    }
    const double scale = out.g.cwiseAbs().maxCoeff();
    const double diff = (out.g - go).cwiseAbs().maxCoeff();
    out.route_mismatch = scale > 0.0 ? diff / scale : diff;
    out.g_overlap = go;
    if (out.route_mismatch > options.route_rel_tol) {
      std::ostringstream os;
      os << family.name() << ": overlap and generator routes of the metric disagree by "
         << out.route_mismatch << " (relative) > " << options.route_rel_tol;
      throw Error(ErrorCode::RouteMismatch, os.str());
    }
  }

  if (options.christoffel && !degenerate(out.g)) {
    out.christoffel = christoffel(family, alpha, options.christoffel_step);
  }
  return out;
}

std::vector<RealMatrix> christoffel_lowered(const ParametrizedFamily& family,
                                            const RealVector& alpha, double step) {
  if (!(step > 0.0)) throw Error(ErrorCode::InvalidArgument, "Christoffel step must be positive");
  const int k = family.k();
  if (!family.stencil_evaluable(alpha, 2.0 * step + max_fd(family))) {
    throw Error(ErrorCode::CoordinateOutOfDomain,
                family.name() + ": Christoffel stencil leaves the chart");
  }
  // dg[m](i, j) = d_m g_ij, five-point stencil
  std::vector<RealMatrix> dg;
  for (int m = 0; m < k; ++m) {
    auto at = [&](double shift) {
      RealVector p = alpha;
      p[m] += shift;
      return metric_fast(family, p);
    };
    dg.push_back((8.0 * (at(step) - at(-step)) - (at(2.0 * step) - at(-2.0 * step))) /
                 (12.0 * step));
  }
  std::vector<RealMatrix> out(static_cast<std::size_t>(k), RealMatrix::Zero(k, k));
  for (int h = 0; h < k; ++h) {
    for (int i = 0; i < k; ++i) {
      for (int j = 0; j < k; ++j) {
        out[h](i, j) = 0.5 * (dg[i](h, j) + dg[j](i, h) - dg[h](i, j));
      }
    }
  }
  return out;
}

std::vector<RealMatrix> christoffel(const ParametrizedFamily& family, const RealVector& alpha,
                                    double step) {
  const RealMatrix g = metric_fast(family, alpha);
  const double lo = min_eigenvalue(g);
  if (lo <= kDegenerateMetric) {
    std::ostringstream os;
    os << family.name() << ": metric minimum eigenvalue " << lo << " <= " << kDegenerateMetric;
    throw Error(ErrorCode::DegenerateMetric, os.str());
  }
  const std::vector<RealMatrix> low = christoffel_lowered(family, alpha, step);
  const RealMatrix g_inv = g.inverse();
  const int k = family.k();
  std::vector<RealMatrix> out(static_cast<std::size_t>(k), RealMatrix::Zero(k, k));
  for (int h = 0; h < k; ++h) {
    for (int l = 0; l < k; ++l) out[h] += g_inv(h, l) * low[l];
  }
  return out;
}

// ------------------------------------------------------ curve diagnostics

double GeodesicResidual::max_abs() const { return vec_max_abs(residual); }

GeodesicResidual geodesic_residual(const CoordinateTrajectory& traj,
                                   const ParametrizedFamily& family,
                                   const GeodesicOptions& options) {
  traj.validate();
  const std::size_t n = traj.size();
  if (n < 5) throw Error(ErrorCode::TooFewSamples, "geodesic residual needs at least 5 samples");
  const double reach = 2.0 * options.christoffel_step + max_fd(family);

  std::vector<char> usable(n, 0);
  std::vector<RealMatrix> g(n);
  std::vector<double> speed(n, 0.0);
  double max_speed = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    if (!family.stencil_evaluable(traj.alpha[k], reach)) continue;
    usable[k] = 1;
    g[k] = metric_fast(family, traj.alpha[k]);
    speed[k] = std::sqrt(std::max(0.0, traj.alpha_dot[k].dot(g[k] * traj.alpha_dot[k])));
    max_speed = std::max(max_speed, speed[k]);
  }
  if (!(max_speed > 0.0)) {
    throw Error(ErrorCode::StationaryCurve, "ds/dl vanishes along the whole trajectory");
  }

  GeodesicResidual out;
  std::vector<char> kept(n, 0);
  for (std::size_t k = 0; k < n; ++k) {
    kept[k] = usable[k] && speed[k] >= options.drop_relative * max_speed;
    if (!kept[k]) ++out.dropped;
  }

  // Interior points of contiguous runs of kept samples.
  struct Point {
    std::size_t k;
    RealVector accel;  // d^2 alpha/ds^2
    RealVector tangent;
  };
  std::vector<Point> points;
  std::size_t start = 0;
  while (start < n) {
    if (!kept[start]) {
      ++start;
      continue;
    }
    std::size_t end = start;
    while (end + 1 < n && kept[end + 1]) ++end;
    if (end - start >= 2) {
      std::vector<double> ls(traj.l.begin() + static_cast<std::ptrdiff_t>(start),
                             traj.l.begin() + static_cast<std::ptrdiff_t>(end + 1));
      std::vector<RealVector> ts;
      for (std::size_t k = start; k <= end; ++k) ts.push_back(traj.alpha_dot[k] / speed[k]);
      for (std::size_t j = 1; j + 1 < ls.size(); ++j) {
        const RealVector dt =
            central_derivative<RealVector>(std::span<const double>(ls), std::span<const RealVector>(ts), j);
        points.push_back({start + j, RealVector(dt / speed[start + j]), ts[j]});
      }
    }
    start = end + 1;
  }
  if (points.empty()) {
    throw Error(ErrorCode::StationaryCurve,
                "no interior samples with ds/dl above the drop threshold");
  }

  for (const Point& p : points) {
    if (degenerate(g[p.k])) out.lowered = true;
  }

  // Cumulative arc length over usable samples.
  std::vector<double> s(n, 0.0);
  {
    double acc = 0.0;
    std::size_t prev = n;
    for (std::size_t k = 0; k < n; ++k) {
      if (!usable[k]) {
        s[k] = acc;
        continue;
      }
      if (prev != n) acc += 0.5 * (speed[k] + speed[prev]) * (traj.l[k] - traj.l[prev]);
      s[k] = acc;
      prev = k;
    }
  }

  for (const Point& p : points) {
    const RealVector& a = traj.alpha[p.k];
    RealVector r;
    if (out.lowered) {
      r = g[p.k] * p.accel + contract(christoffel_lowered(family, a, options.christoffel_step),
                                      p.tangent);
    } else {
      r = p.accel + contract(christoffel(family, a, options.christoffel_step), p.tangent);
    }
    out.index.push_back(p.k);
    out.l.push_back(traj.l[p.k]);
    out.s.push_back(s[p.k]);
    out.residual.push_back(std::move(r));
  }
  return out;
}

ArcLength arc_length(const CoordinateTrajectory& traj, const ParametrizedFamily& family) {
  traj.validate();
  ArcLength out;
  const std::size_t n = traj.size();
  out.cumulative.assign(n, 0.0);
  out.speed.assign(n, std::numeric_limits<double>::quiet_NaN());
  const double reach = max_fd(family);
  std::size_t prev = n;
  for (std::size_t k = 0; k < n; ++k) {
    // Samples where the metric stencil leaves the chart are bridged by the
    // neighbouring trapezoid.
    if (family.stencil_evaluable(traj.alpha[k], reach)) {
      const RealMatrix g = metric_fast(family, traj.alpha[k]);
      out.speed[k] = std::sqrt(std::max(0.0, traj.alpha_dot[k].dot(g * traj.alpha_dot[k])));
      if (prev != n) out.total += 0.5 * (out.speed[k] + out.speed[prev]) * (traj.l[k] - traj.l[prev]);
      prev = k;
    }
    out.cumulative[k] = out.total;
  }
  return out;
}

double VariationalGradient::max_abs() const { return vec_max_abs(gradient); }

VariationalGradient variational_gradient(const CoordinateTrajectory& traj,
                                         const ParametrizedFamily& family,
                                         const VariationalOptions& options) {
  traj.validate();
  const std::size_t n = traj.size();
  if (n < 7) throw Error(ErrorCode::TooFewSamples, "variational gradient needs at least 7 samples");
  const double h = options.h_var;
  if (!(h > 0.0)) throw Error(ErrorCode::InvalidArgument, "h_var must be positive");
  const double reach = max_fd(family) + h;
  const int k = family.k();

  // Length of the straight coordinate segment a -> b, two-point Gauss rule.
  auto segment = [&](const RealVector& a, const RealVector& b) {
    const RealVector d = b - a;
    const double off = 0.5 / std::numbers::sqrt3;
    double len = 0.0;
    for (double t : {0.5 - off, 0.5 + off}) {
      const RealMatrix g = metric_fast(family, a + t * d);
      len += 0.5 * std::sqrt(std::max(0.0, d.dot(g * d)));
    }
    return len;
  };

  // Nodes: a subsequence of samples whose consecutive members differ by at
  // least min_segment_over_h * h_var in max norm.
  const double min_step = options.min_segment_over_h * h;
  std::vector<std::size_t> nodes{0};
  for (std::size_t j = 1; j < n; ++j) {
    if ((traj.alpha[j] - traj.alpha[nodes.back()]).cwiseAbs().maxCoeff() >= min_step) {
      nodes.push_back(j);
    }
  }
  const bool any_motion = nodes.size() >= 3;

  VariationalGradient out;
  for (std::size_t q = 1; any_motion && q + 1 < nodes.size(); ++q) {
    const std::size_t j = nodes[q];
    const RealVector& prev = traj.alpha[nodes[q - 1]];
    const RealVector& node = traj.alpha[j];
    const RealVector& next = traj.alpha[nodes[q + 1]];
    // Chart regions are coordinate boxes, so checking the three nodes covers
    // every quadrature point on both segments.
    if (!family.stencil_evaluable(prev, reach) || !family.stencil_evaluable(node, reach) ||
        !family.stencil_evaluable(next, reach)) {
      continue;
    }
    const double weight = 0.5 * (traj.l[nodes[q + 1]] - traj.l[nodes[q - 1]]);
    RealVector grad(k);
    for (int i = 0; i < k; ++i) {
      RealVector p = node;
      p[i] += h;
      const double sp = segment(prev, p) + segment(p, next);
      p[i] = node[i] - h;
      const double sm = segment(prev, p) + segment(p, next);
      grad[i] = (sp - sm) / (2.0 * h) / weight;
    }
    out.index.push_back(j);
    out.l.push_back(traj.l[j]);
    out.gradient.push_back(std::move(grad));
  }
  if (!any_motion || out.index.empty()) {
    throw Error(ErrorCode::StationaryCurve,
                "no interior node moves by more than the variational step");
  }
  return out;
}

double XiResidual::max_abs() const { return vec_max_abs(x); }
double XiResidual::max_relative() const {
  const double m = max_abs();
  return scale > 0.0 ? m / scale : m;
}

namespace {

struct EtaSeries {
  std::vector<std::size_t> index;  // trajectory sample indices
  std::vector<double> l;
  std::vector<std::vector<Matrix>> g_ops;
  std::vector<Matrix> eta;
  std::vector<Matrix> eta_sq;
};

// eta = G_i alpha_dot^i on the longest contiguous run of evaluable samples.
EtaSeries eta_series(const ParametrizedFamily& family, const CoordinateTrajectory& traj) {
  traj.validate();
  const std::size_t n = traj.size();
  if (n < 3) throw Error(ErrorCode::TooFewSamples, "X_i needs at least 3 samples");
  const double reach = max_fd(family);
  std::size_t best_start = 0;
  std::size_t best_len = 0;
  std::size_t start = 0;
  while (start < n) {
    if (!family.stencil_evaluable(traj.alpha[start], reach)) {
      ++start;
      continue;
    }
    std::size_t end = start;
    while (end + 1 < n && family.stencil_evaluable(traj.alpha[end + 1], reach)) ++end;
    if (end - start + 1 > best_len) {
      best_len = end - start + 1;
      best_start = start;
    }
    start = end + 1;
  }
  if (best_len < 3) throw Error(ErrorCode::TooFewSamples, "fewer than 3 evaluable samples");
  EtaSeries s;
  for (std::size_t k = best_start; k < best_start + best_len; ++k) {
    s.index.push_back(k);
    s.l.push_back(traj.l[k]);
    s.g_ops.push_back(family_generators(family, traj.alpha[k]));
    s.eta.push_back(eta_along(s.g_ops.back(), traj.alpha_dot[k]));
    s.eta_sq.push_back(s.eta.back() * s.eta.back());
  }
  return s;
}

}  // namespace

XiResidual xi_residual(const ParametrizedFamily& family, const CoordinateTrajectory& traj) {
  const EtaSeries s = eta_series(family, traj);
  const Vector& psi = family.base_state();
  const std::span<const double> ls(s.l);
  XiResidual out;
  for (std::size_t j = 1; j + 1 < s.l.size(); ++j) {
    const Matrix d_eta = central_derivative<Matrix>(ls, std::span<const Matrix>(s.eta), j);
    const Matrix d_eta_sq = central_derivative<Matrix>(ls, std::span<const Matrix>(s.eta_sq), j);
    const Matrix& eta = s.eta[j];
    const double e2 = std::real(expect(psi, s.eta_sq[j]));
    const double de2 = std::real(expect(psi, d_eta_sq));
    RealVector x(family.k());
    for (int i = 0; i < family.k(); ++i) {
      const Matrix& gi = s.g_ops[j][static_cast<std::size_t>(i)];
      const double t1 = 2.0 * e2 * std::real(expect(psi, d_eta * gi + gi * d_eta));
      const double t2 = de2 * std::real(expect(psi, gi * eta + eta * gi));
      x[i] = t1 - t2;
      out.scale = std::max({out.scale, std::abs(t1), std::abs(t2)});
    }
    out.l.push_back(s.l[j]);
    out.x.push_back(std::move(x));
  }
  return out;
}

XiResidual xi_general(const ParametrizedFamily& family, const CoordinateTrajectory& traj) {
  const EtaSeries s = eta_series(family, traj);
  const Vector& psi = family.base_state();
  const std::span<const double> ls(s.l);
  // variance V = <eta^2> - <eta>^2 along the run
  std::vector<double> var;
  for (std::size_t j = 0; j < s.l.size(); ++j) {
    const Complex m = expect(psi, s.eta[j]);
    var.push_back(std::real(expect(psi, s.eta_sq[j]) - m * m));
  }
  XiResidual out;
  for (std::size_t j = 1; j + 1 < s.l.size(); ++j) {
    const Matrix d_eta = central_derivative<Matrix>(ls, std::span<const Matrix>(s.eta), j);
    const double d_var = central_derivative<double>(ls, std::span<const double>(var), j);
    const Matrix& eta = s.eta[j];
    const Matrix& eta_sq = s.eta_sq[j];
    const Complex m_eta = expect(psi, eta);
    const Complex m_deta = expect(psi, d_eta);
    RealVector x(family.k());
    for (int i = 0; i < family.k(); ++i) {
      const Matrix& gi = s.g_ops[j][static_cast<std::size_t>(i)];
      const Complex m_g = expect(psi, gi);
      const Complex first = (2.0 * m_eta * m_g - expect(psi, gi * eta + eta * gi)) * d_var;
      const Complex bracket = expect(psi, d_eta * gi + gi * d_eta + eta_sq * gi - gi * eta_sq) -
                              2.0 * m_deta * m_g -
                              2.0 * m_eta * expect(psi, eta * gi - gi * eta);
      const Complex second = 2.0 * bracket * var[j];
      x[i] = std::real(first + second);
      out.scale = std::max({out.scale, std::abs(first), std::abs(second)});
    }
    out.l.push_back(s.l[j]);
    out.x.push_back(std::move(x));
  }
  return out;
}

double SampleResidual::max() const {
  double worst = 0.0;
  for (double v : value) worst = std::max(worst, v);
  return worst;
}

SampleResidual generator_consistency(const ParametrizedFamily& family,
                                     const CoordinateTrajectory& coords,
                                     const FlowTrajectory& flow) {
  coords.validate();
  if (flow.samples.empty() || flow.front().h.dim() != family.dim()) {
    throw Error(ErrorCode::DimMismatch, "flow and family dimensions differ");
  }
  const std::vector<RealVector> alpha_dot = differentiate_alpha(coords);
  const double reach = max_fd(family);
  SampleResidual out;
  std::size_t f = 0;
  for (std::size_t k = 0; k < coords.size(); ++k) {
    const double l = coords.l[k];
    while (f < flow.samples.size() && flow.samples[f].l < l - 1e-12 * std::max(1.0, l)) ++f;
    if (f == flow.samples.size() || std::abs(flow.samples[f].l - l) > 1e-12 * std::max(1.0, l)) {
      throw Error(ErrorCode::DimMismatch,
                  "coordinate sample at l = " + format_double(l) + " has no flow sample");
    }
    if (!family.stencil_evaluable(coords.alpha[k], reach)) continue;
    const Matrix eta_fam = eta_along(family_generators(family, coords.alpha[k]), alpha_dot[k]);
    const Matrix eta_flow = generator(flow.samples[f].h, flow.choice).matrix();
    const Matrix diff = family.compared(eta_fam - eta_flow);
    out.l.push_back(l);
    out.value.push_back(diff.cwiseAbs().maxCoeff());
  }
  return out;
}

SampleResidual generator_relation_residual(const ParametrizedFamily& family,
                                   const CoordinateTrajectory& traj, double h) {
  traj.validate();
  const std::size_t n = traj.size();
  if (n < 5) throw Error(ErrorCode::TooFewSamples, "relation check needs at least 5 samples");
  if (!(h > 0.0)) throw Error(ErrorCode::InvalidArgument, "step must be positive");
  const int k = family.k();
  const double reach = max_fd(family) + h;

  std::vector<char> ok(n, 0);
  std::vector<std::vector<Matrix>> g_ops(n);
  for (std::size_t j = 0; j < n; ++j) {
    if (!family.stencil_evaluable(traj.alpha[j], reach)) continue;
    ok[j] = 1;
    g_ops[j] = family_generators(family, traj.alpha[j]);
  }

  SampleResidual out;
  for (std::size_t j = 1; j + 1 < n; ++j) {
    if (!ok[j - 1] || !ok[j] || !ok[j + 1]) continue;
    // Five-point window when all neighbours have a valid G, else three.
    const bool wide = j >= 2 && j + 2 < n && ok[j - 2] && ok[j + 2];
    const std::size_t lo_used = wide ? j - 2 : j - 1;
    const std::size_t centre = wide ? 2 : 1;
    const std::vector<double> ls(traj.l.begin() + static_cast<std::ptrdiff_t>(lo_used),
                                 traj.l.begin() + static_cast<std::ptrdiff_t>(lo_used + 2 * centre + 1));

    const RealVector& a = traj.alpha[j];
    const Matrix eta = eta_along(g_ops[j], traj.alpha_dot[j]);
    double worst = 0.0;
    for (int i = 0; i < k; ++i) {
      std::vector<Matrix> gi_series;
      for (std::size_t m = 0; m < ls.size(); ++m) gi_series.push_back(g_ops[lo_used + m][static_cast<std::size_t>(i)]);
      const Matrix d_gi = central_derivative<Matrix>(std::span<const double>(ls),
                                                     std::span<const Matrix>(gi_series), centre);
      RealVector p = a;
      p[i] += h;
      const Matrix eta_p = eta_along(family_generators(family, p), traj.alpha_dot[j]);
      p[i] = a[i] - h;
      const Matrix eta_m = eta_along(family_generators(family, p), traj.alpha_dot[j]);
      const Matrix d_eta = (eta_p - eta_m) / (2.0 * h);
      const Matrix& gi = g_ops[j][static_cast<std::size_t>(i)];
      const Matrix r = family.compared(d_gi - d_eta - (eta * gi - gi * eta));
      worst = std::max(worst, r.cwiseAbs().maxCoeff());
    }
    out.l.push_back(traj.l[j]);
    out.value.push_back(worst);
  }
  return out;
}

// ------------------------------------------------------ case analysis

std::string to_string(Case c) {
  switch (c) {
    case Case::A: return "A";
    case Case::B: return "B";
    case Case::C: return "C";
    case Case::None: return "None";
  }
  return "None";
}

CaseLabel case_classify(const BandDecomposition& bd, Eigen::Index n, int offset) {
  if (!bd.has_band(offset)) {
    throw Error(ErrorCode::NoSuchBand, "band " + std::to_string(offset) + " is not present");
  }
  const Eigen::Index d = bd.dim();
  if (n < 0 || n >= d) {
    throw Error(ErrorCode::IndexOverflow, "basis index " + std::to_string(n) + " outside 0.." +
                                              std::to_string(d - 1));
  }
  const double norm = bd.frobenius_norm();
  CaseLabel out;
  out.c_lower = bd.lower(offset, n);
  out.c_upper = bd.lower(offset, n + offset);
  if (n - offset >= 0 && n + offset < d) {
    out.gap = std::abs(bd.eps[n + offset] + bd.eps[n - offset] - 2.0 * bd.eps[n]);
  }
  const bool zero_lower = std::abs(out.c_lower) <= kCaseZeroRelative * norm;
  const bool zero_upper = std::abs(out.c_upper) <= kCaseZeroRelative * norm;
  if (zero_lower && zero_upper) {
    out.value = Case::A;
  } else if (zero_lower != zero_upper) {
    out.value = Case::B;
  } else {
    out.value = out.gap <= kGapZeroRelative * norm ? Case::C : Case::None;
  }
  return out;
}

double SandwichedResidual::max_residual() const {
  double worst = 0.0;
  for (double v : residual_lower) worst = std::max(worst, v);
  for (double v : residual_upper) worst = std::max(worst, v);
  return worst;
}

double SandwichedResidual::max_relative() const {
  const double m = max_residual();
  return scale > 0.0 ? m / scale : m;
}

SandwichedResidual sandwiched_ode_residual(const FlowTrajectory& flow, Eigen::Index n,
                                           int offset) {
  if (flow.samples.size() < 3) {
    throw Error(ErrorCode::TooFewSamples, "sandwiched equations need at least 3 samples");
  }
  const Eigen::Index d = flow.front().h.dim();
  if (n < 0 || n >= d) throw Error(ErrorCode::IndexOverflow, "basis index outside the basis");
  const std::vector<int>& bands = flow.initial_bands;
  if (!bands.empty()) {
    const BandCondition cond = band_condition_offset(bands, offset);
    if (!cond.holds) {
      throw Error(ErrorCode::ConditionViolated,
                  "band " + std::to_string(cond.offender->first) + " = " +
                      std::to_string(cond.offender->second) + " x " + std::to_string(offset) +
                      " is present; the sandwiched equations are not claimed");
    }
  }
  if (const auto* b = std::get_if<BandGenerator>(&flow.choice)) {
    if (b->offset != offset) {
      throw Error(ErrorCode::ConditionViolated, "flow generator acts on band " +
                                                    std::to_string(b->offset) + ", not " +
                                                    std::to_string(offset));
    }
  } else if (bands.size() > 1) {
    throw Error(ErrorCode::ConditionViolated,
                "Wegner generator acts on several bands; single-band flow required");
  }

  const std::size_t m = flow.samples.size();
  const bool has_lower = n - offset >= 0;
  const bool has_upper = n + offset < d;
  std::vector<double> ls(m);
  std::vector<Complex> lower(m, 0.0), upper(m, 0.0);
  std::vector<double> gap_lower(m, 0.0), gap_upper(m, 0.0);
  for (std::size_t k = 0; k < m; ++k) {
    const Matrix& h = flow.samples[k].h.matrix();
    ls[k] = flow.samples[k].l;
    if (has_lower) {
      lower[k] = h(n, n - offset);
      gap_lower[k] = std::real(h(n, n) - h(n - offset, n - offset));
    }
    if (has_upper) {
      upper[k] = h(n + offset, n);
      gap_upper[k] = std::real(h(n + offset, n + offset) - h(n, n));
    }
  }

  SandwichedResidual out;
  const std::span<const double> lspan(ls);
  for (std::size_t k = 1; k + 1 < m; ++k) {
    out.l.push_back(ls[k]);
    const Complex dl = central_derivative<Complex>(lspan, std::span<const Complex>(lower), k);
    const Complex du = central_derivative<Complex>(lspan, std::span<const Complex>(upper), k);
    const Complex rhs_l = -gap_lower[k] * gap_lower[k] * lower[k];
    const Complex rhs_u = -gap_upper[k] * gap_upper[k] * upper[k];
    out.residual_lower.push_back(std::abs(dl - rhs_l));
    out.residual_upper.push_back(std::abs(du - rhs_u));
    out.scale = std::max({out.scale, std::abs(rhs_l), std::abs(rhs_u)});
  }

  const double norm = flow.front().h.frobenius_norm();
  auto drift = [&](const std::vector<Complex>& c) {
    double worst = 0.0;
    if (std::abs(c[0]) <= kCaseZeroRelative * norm) return worst;
    const double phase0 = std::arg(c[0]);
    for (const Complex& z : c) {
      if (std::abs(z) > 1e-250) worst = std::max(worst, std::abs(wrap_angle(std::arg(z) - phase0)));
    }
    return worst;
  };
  out.phase_drift = std::max(drift(lower), drift(upper));
  return out;
}

}  // namespace wegnerflow
