#include "wegnerflow/models.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "wegnerflow/error.hpp"
#include "wegnerflow/geometry.hpp"
#include "wegnerflow/integrator.hpp"
#include "wegnerflow/numerics.hpp"
#include "wegnerflow/report.hpp"

namespace wegnerflow {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kPoleTolerance = 1e-13;

bool finite(Complex z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::SpecViolation, what);
}

bool is_half_integer(double s) {
  const double two_s = 2.0 * s;
  return std::isfinite(s) && two_s >= 1.0 - 1e-12 && std::abs(two_s - std::round(two_s)) <= 1e-12;
}

// exp(t K0) = V diag(e^{-i w t}) V^dagger with i K0 = V diag(w) V^dagger,
// conjugated by a diagonal phase matrix R: R exp(t K0) R^dagger.
struct RotatedExp {
  Matrix v;
  RealVector w;

  explicit RotatedExp(const Matrix& k0) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(Matrix(kI * k0));
    v = es.eigenvectors();
    w = es.eigenvalues();
  }

  Matrix at(double t, const Vector& r) const {
    Vector phases(w.size());
    for (Eigen::Index i = 0; i < w.size(); ++i) phases[i] = std::exp(-kI * (w[i] * t));
    Matrix m = v * phases.asDiagonal() * v.adjoint();
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      for (Eigen::Index row = 0; row < m.rows(); ++row) m(row, c) *= r[row] * std::conj(r[c]);
    }
    return m;
  }
};

// Carries `previous[i]` forward when `angle` is undefined (NaN) and otherwise
// picks the representative closest to it.
double continue_angle(double angle, const RealVector* previous, Eigen::Index i, double period) {
  if (!previous || !std::isfinite((*previous)[i])) return angle;
  if (!std::isfinite(angle)) return (*previous)[i];
  return unwrap_near(angle, (*previous)[i], period);
}

double positive_mod(double x, double period) {
  double r = std::fmod(x, period);
  if (r < 0.0) r += period;
  return r;
}

Complex parse_complex(const nlohmann::json& v, const std::string& field) {
  if (v.is_number()) return {v.get<double>(), 0.0};
  if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number()) {
    return {v[0].get<double>(), v[1].get<double>()};
  }
  throw Error(ErrorCode::SpecViolation, field + " must be a number or [re, im]");
}

double parse_real(const nlohmann::json& doc, const std::string& field,
                  std::optional<double> fallback) {
  if (!doc.contains(field)) {
    if (fallback) return *fallback;
    throw Error(ErrorCode::SpecViolation, "missing field '" + field + "'");
  }
  if (!doc[field].is_number()) throw Error(ErrorCode::SpecViolation, field + " must be a number");
  return doc[field].get<double>();
}

int parse_int(const nlohmann::json& doc, const std::string& field, int fallback) {
  if (!doc.contains(field)) return fallback;
  if (!doc[field].is_number_integer()) {
    throw Error(ErrorCode::SpecViolation, field + " must be an integer");
  }
  return doc[field].get<int>();
}

nlohmann::json complex_json(Complex z) { return nlohmann::json::array({z.real(), z.imag()}); }

}  // namespace

// ---------------------------------------------------------------- specs

void GhoSpec::validate() const {
  require(std::isfinite(omega) && finite(lambda) && finite(mu) && std::isfinite(nu),
          "gho fields must be finite");
  require(omega > 0.0, "gho requires omega > 0");
  require(omega > 2.0 * std::abs(lambda), "gho requires omega > 2|lambda|");
  require(n_max >= 4, "gho requires n_max >= 4");
}

void SpinSpec::validate() const {
  require(is_half_integer(s), "spin s must be a positive half-integer");
  require(b_field.allFinite(), "spin b_field must be finite");
  require(b_field.norm() > 0.0, "spin requires |B| > 0");
}

Eigen::Index SpinSpec::dim() const {
  return static_cast<Eigen::Index>(std::llround(2.0 * s)) + 1;
}

void JcSpec::validate() const {
  require(std::isfinite(omega0) && std::isfinite(omega) && std::isfinite(kappa),
          "jc fields must be finite");
  require(n_max >= 2, "jc requires n_max >= 2");
}

std::string model_name(const ModelSpec& spec) {
  switch (spec.index()) {
    case 0: return "gho";
    case 1: return "spin";
    default: return "jc";
  }
}

ModelSpec parse_model(const nlohmann::json& doc) {
  if (!doc.is_object() || !doc.contains("model") || !doc["model"].is_string()) {
    throw Error(ErrorCode::SpecViolation, "model spec needs a string field 'model'");
  }
  const std::string name = doc["model"].get<std::string>();
  if (name == "gho") {
    GhoSpec s;
    s.omega = parse_real(doc, "omega", std::nullopt);
    if (doc.contains("lambda")) s.lambda = parse_complex(doc["lambda"], "lambda");
    if (doc.contains("mu")) s.mu = parse_complex(doc["mu"], "mu");
    s.nu = parse_real(doc, "nu", 0.0);
    s.n_max = parse_int(doc, "n_max", s.n_max);
    s.validate();
    return s;
  }
  if (name == "spin") {
    SpinSpec s;
    s.s = parse_real(doc, "s", std::nullopt);
    if (!doc.contains("b_field") || !doc["b_field"].is_array() || doc["b_field"].size() != 3) {
      throw Error(ErrorCode::SpecViolation, "spin needs b_field as a 3-vector");
    }
    for (int i = 0; i < 3; ++i) {
      if (!doc["b_field"][i].is_number()) {
        throw Error(ErrorCode::SpecViolation, "b_field entries must be numbers");
      }
      s.b_field[i] = doc["b_field"][i].get<double>();
    }
    s.validate();
    return s;
  }
  if (name == "jc") {
    JcSpec s;
    s.omega0 = parse_real(doc, "omega0", std::nullopt);
    s.omega = parse_real(doc, "omega", std::nullopt);
    s.kappa = parse_real(doc, "kappa", std::nullopt);
    s.n_max = parse_int(doc, "n_max", s.n_max);
    s.validate();
    return s;
  }
  throw Error(ErrorCode::SpecViolation, "unknown model '" + name + "' (gho, spin, jc)");
}

nlohmann::json to_json(const ModelSpec& spec) {
  nlohmann::json j;
  j["model"] = model_name(spec);
  if (const auto* g = std::get_if<GhoSpec>(&spec)) {
    j["omega"] = g->omega;
    j["lambda"] = complex_json(g->lambda);
    j["mu"] = complex_json(g->mu);
    j["nu"] = g->nu;
    j["n_max"] = g->n_max;
  } else if (const auto* s = std::get_if<SpinSpec>(&spec)) {
    j["s"] = s->s;
    j["b_field"] = {s->b_field[0], s->b_field[1], s->b_field[2]};
  } else {
    const auto& c = std::get<JcSpec>(spec);
    j["omega0"] = c.omega0;
    j["omega"] = c.omega;
    j["kappa"] = c.kappa;
    j["n_max"] = c.n_max;
  }
  return j;
}

// ------------------------------------------------------------ operators

Matrix annihilation(int n_max) {
  if (n_max < 1) throw Error(ErrorCode::InvalidArgument, "n_max must be at least 1");
  Matrix a = Matrix::Zero(n_max + 1, n_max + 1);
  for (int n = 1; n <= n_max; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  return a;
}

SpinMatrices spin_matrices(double s) {
  require(is_half_integer(s), "spin s must be a positive half-integer");
  const Eigen::Index d = static_cast<Eigen::Index>(std::llround(2.0 * s)) + 1;
  SpinMatrices out{Matrix::Zero(d, d), Matrix::Zero(d, d), Matrix::Zero(d, d)};
  for (Eigen::Index j = 0; j < d; ++j) {
    const double m = s - static_cast<double>(j);
    out.sz(j, j) = m;
    if (j > 0) out.splus(j - 1, j) = std::sqrt(s * (s + 1.0) - m * (m + 1.0));
  }
  out.sminus = out.splus.adjoint();
  return out;
}

// ------------------------------------------------------------- builders

Complex displacement_shift(double omega, Complex lambda, Complex mu) {
  const double den = omega * omega - 4.0 * std::norm(lambda);
  if (std::abs(den) <= 1e-14 * omega * omega || !std::isfinite(den)) {
    throw Error(ErrorCode::SingularShift, "omega^2 = 4|lambda|^2: the shift equation is singular");
  }
  const Complex alpha = (omega * mu - 2.0 * lambda * std::conj(mu)) / den;
  const double residual = std::abs(omega * alpha + 2.0 * lambda * std::conj(alpha) - mu);
  if (residual > 1e-12 * std::max(1.0, std::abs(mu))) {
    throw Error(ErrorCode::SingularShift, "shift residual " + format_double(residual) +
                                              " exceeds 1e-12 (ill-conditioned)");
  }
  return alpha;
}

GhoSpec reduce_gho(const GhoSpec& spec) {
  spec.validate();
  if (spec.mu == 0.0 || spec.lambda == 0.0) return spec;
  const Complex a = displacement_shift(spec.omega, spec.lambda, spec.mu);
  GhoSpec out = spec;
  out.mu = 0.0;
  out.nu = spec.nu + spec.omega * std::norm(a) +
           2.0 * std::real(spec.lambda * std::conj(a) * std::conj(a)) -
           2.0 * std::real(spec.mu * std::conj(a));
  return out;
}

HermitianOperator build_gho(const GhoSpec& spec) {
  const GhoSpec r = reduce_gho(spec);
  const Matrix a = annihilation(r.n_max);
  const Matrix ad = a.adjoint();
  const Eigen::Index d = a.rows();
  Matrix h = Matrix::Zero(d, d);
  for (Eigen::Index n = 0; n < d; ++n) h(n, n) = r.omega * static_cast<double>(n) + r.nu;
  h += r.lambda * (ad * ad) + std::conj(r.lambda) * (a * a) + r.mu * ad + std::conj(r.mu) * a;
  return HermitianOperator::symmetrized(h);
}

HermitianOperator build_spin(const SpinSpec& spec) {
  spec.validate();
  const SpinMatrices sm = spin_matrices(spec.s);
  const double tol = 1e-12 * std::max(1.0, spec.s * spec.s);
  require(max_abs(commutator(sm.sz, sm.splus) - sm.splus) <= tol, "[S_z, S_+] = S_+ violated");
  require(max_abs(commutator(sm.sz, sm.sminus) + sm.sminus) <= tol, "[S_z, S_-] = -S_- violated");
  require(max_abs(commutator(sm.splus, sm.sminus) - 2.0 * sm.sz) <= tol,
          "[S_+, S_-] = 2 S_z violated");
  const Complex beta{0.5 * spec.b_field[0], -0.5 * spec.b_field[1]};
  const Matrix h = spec.b_field[2] * sm.sz + beta * sm.splus + std::conj(beta) * sm.sminus;
  return HermitianOperator::symmetrized(h);
}

HermitianOperator build_jc(const JcSpec& spec) {
  spec.validate();
  const Eigen::Index d = spec.dim();
  Matrix h = Matrix::Zero(d, d);
  for (int n = 0; n <= spec.n_max; ++n) {
    h(2 * n, 2 * n) = -0.5 * spec.omega0 + spec.omega * n;
    h(2 * n + 1, 2 * n + 1) = 0.5 * spec.omega0 + spec.omega * n;
    if (n < spec.n_max) {
      // sigma_+ a |g, n+1> = sqrt(n+1) |e, n>
      const double c = spec.kappa * std::sqrt(static_cast<double>(n + 1));
      h(2 * n + 1, 2 * n + 2) = c;
      h(2 * n + 2, 2 * n + 1) = c;
    }
  }
  return HermitianOperator::symmetrized(h);
}

JcSectors sector_blocks(const JcSpec& spec) {
  const HermitianOperator h = build_jc(spec);
  JcSectors out;
  out.ground = h(0, 0).real();
  for (int n = 0; n < spec.n_max; ++n) {
    JcSector s;
    s.n = n;
    s.e_index = 2 * n + 1;
    s.g_index = 2 * n + 2;
    s.block << h(s.e_index, s.e_index).real(), h(s.e_index, s.g_index).real(),
        h(s.g_index, s.e_index).real(), h(s.g_index, s.g_index).real();
    out.sectors.push_back(s);
  }
  return out;
}

HermitianOperator build_model(const ModelSpec& spec) {
  return std::visit(
      [](const auto& s) -> HermitianOperator {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, GhoSpec>) return build_gho(s);
        else if constexpr (std::is_same_v<T, SpinSpec>) return build_spin(s);
        else return build_jc(s);
      },
      spec);
}

// ------------------------------------------------------------- families

std::vector<Eigen::Index> interior_indices(Eigen::Index dim) {
  const Eigen::Index drop =
      std::max<Eigen::Index>(1, static_cast<Eigen::Index>(std::ceil(0.1 * static_cast<double>(dim))));
  std::vector<Eigen::Index> out;
  for (Eigen::Index i = 0; i + drop < dim; ++i) out.push_back(i);
  return out;
}

ParametrizedFamily displacement_family(int n_max, int base_n) {
  if (base_n < 0 || base_n > n_max) {
    throw Error(ErrorCode::InvalidArgument, "base level outside 0..n_max");
  }
  const Matrix a = annihilation(n_max);
  const Eigen::Index d = a.rows();
  auto gen = std::make_shared<const RotatedExp>(Matrix(a.adjoint() - a));
  auto unitary = [gen, d](const RealVector& x) {
    const Complex z = Complex(x[0], x[1]) / std::numbers::sqrt2;
    const double rho = std::abs(z);
    const double theta = std::arg(z);
    Vector r(d);
    for (Eigen::Index n = 0; n < d; ++n) r[n] = std::exp(kI * (theta * static_cast<double>(n)));
    return gen->at(rho, r);
  };
  auto projection = [a](const Matrix& u, const RealVector*) {
    const Complex z = (u.adjoint() * a * u)(0, 0);
    RealVector out(2);
    out << std::numbers::sqrt2 * z.real(), std::numbers::sqrt2 * z.imag();
    return out;
  };
  Vector base = Vector::Zero(d);
  base[base_n] = 1.0;
  ParametrizedFamily f("displacement", {"x", "p"}, unitary, base, RealVector::Constant(2, 1e-4));
  f.with_projection(projection).with_compare_indices(interior_indices(d)).with_state_comparison();
  return f;
}

ParametrizedFamily squeeze_family(int base_n, int n_max) {
  if (base_n < 0) throw Error(ErrorCode::InvalidArgument, "base level must be non-negative");
  if (n_max < base_n + 20) {
    throw Error(ErrorCode::TruncationTooSmall,
                "squeeze family needs n_max >= n + 20 (n = " + std::to_string(base_n) +
                    ", n_max = " + std::to_string(n_max) + ")");
  }
  const Matrix a = annihilation(n_max);
  const Eigen::Index d = a.rows();
  const Matrix ad = a.adjoint();
  auto gen = std::make_shared<const RotatedExp>(Matrix(0.5 * (ad * ad - a * a)));
  auto unitary = [gen, d](const RealVector& x) {
    Vector r(d);
    for (Eigen::Index n = 0; n < d; ++n) r[n] = std::exp(-kI * (x[1] * static_cast<double>(n)));
    return gen->at(x[0], r);
  };
  auto projection = [a](const Matrix& u, const RealVector* previous) {
    // U^dagger a U = a cosh r + a^dagger e^{-2 i phi} sinh r
    const Complex c = (u.adjoint() * a * u)(1, 0);
    RealVector out(2);
    out[0] = std::asinh(std::abs(c));
    const double phi = std::abs(c) > kPoleTolerance ? -0.5 * std::arg(c) : kNaN;
    out[1] = continue_angle(phi, previous, 1, std::numbers::pi);
    if (!previous && std::isfinite(out[1])) out[1] = positive_mod(out[1], std::numbers::pi);
    return out;
  };
  Vector base = Vector::Zero(d);
  base[base_n] = 1.0;
  ParametrizedFamily f("squeeze", {"r", "phi"}, unitary, base, RealVector::Constant(2, 1e-4));
  f.with_domain([](const RealVector& x) { return x[0] >= 0.0; })
      .with_projection(projection)
      .with_compare_indices(interior_indices(d))
      .with_state_comparison();
  return f;
}

ParametrizedFamily spin_family(double s, double m) {
  const SpinMatrices sm = spin_matrices(s);
  const Eigen::Index d = sm.sz.rows();
  const double j_real = s - m;
  if (std::abs(j_real - std::round(j_real)) > 1e-12 || j_real < -1e-12 ||
      j_real > static_cast<double>(d - 1) + 1e-12) {
    throw Error(ErrorCode::InvalidArgument, "m must be one of s, s-1, ..., -s");
  }
  const Eigen::Index j = static_cast<Eigen::Index>(std::llround(j_real));
  auto gen = std::make_shared<const RotatedExp>(Matrix(0.5 * (sm.splus - sm.sminus)));
  RealVector ms(d);
  for (Eigen::Index i = 0; i < d; ++i) ms[i] = s - static_cast<double>(i);
  auto unitary = [gen, ms, d](const RealVector& x) {
    Vector r(d);
    for (Eigen::Index i = 0; i < d; ++i) r[i] = std::exp(-kI * (x[1] * ms[i]));
    return gen->at(x[0], r);
  };
  const Matrix sx = 0.5 * (sm.splus + sm.sminus);
  const Matrix sy = (sm.splus - sm.sminus) / (2.0 * kI);
  const Matrix sz = sm.sz;
  auto projection = [sx, sy, sz, s](const Matrix& u, const RealVector* previous) {
    // Bloch vector of U^dagger |s> is (sin t cos p, sin t sin p, cos t).
    const Vector top = u.adjoint().col(0);
    const double nx = std::real(top.dot(sx * top)) / s;
    const double ny = std::real(top.dot(sy * top)) / s;
    const double nz = std::real(top.dot(sz * top)) / s;
    const double rho = std::hypot(nx, ny);
    RealVector out(2);
    out[0] = std::atan2(rho, nz);
    const double phi = rho > kPoleTolerance ? std::atan2(ny, nx) : kNaN;
    out[1] = continue_angle(phi, previous, 1, 2.0 * std::numbers::pi);
    if (!previous && std::isfinite(out[1])) out[1] = positive_mod(out[1], 2.0 * std::numbers::pi);
    return out;
  };
  Vector base = Vector::Zero(d);
  base[j] = 1.0;
  ParametrizedFamily f("spin", {"theta", "varphi"}, unitary, base, RealVector::Constant(2, 1e-4));
  f.with_domain([](const RealVector& x) { return x[0] >= 0.0 && x[0] <= std::numbers::pi; })
      .with_projection(projection);
  return f;
}

ParametrizedFamily jc_family(int n_max, int n) {
  if (n < 0 || n + 1 > n_max) {
    throw Error(ErrorCode::InvalidArgument, "JC sector n needs 0 <= n < n_max");
  }
  const Eigen::Index d = 2 * (static_cast<Eigen::Index>(n_max) + 1);
  const Eigen::Index e = 2 * n + 1;
  const Eigen::Index g = 2 * n + 2;
  auto unitary = [d, e, g](const RealVector& x) {
    const double a = x[0];
    const double c = std::sqrt(std::max(0.0, 1.0 - a * a));
    Matrix u = Matrix::Identity(d, d);
    u(e, e) = a * std::exp(kI * x[1]);
    u(e, g) = c * std::exp(kI * x[2]);
    u(g, e) = -c * std::exp(kI * (x[1] - x[2]));
    u(g, g) = a;
    return u;
  };
  auto projection = [e, g](const Matrix& u, const RealVector* previous) {
    // Global phase fixed by theta_beta = 0.
    const Complex beta = u(g, g);
    const Complex phase = std::abs(beta) > kPoleTolerance ? std::conj(beta) / std::abs(beta) : 1.0;
    const Complex alpha = u(e, e) * phase;
    const Complex gamma = u(e, g) * phase;
    RealVector out(3);
    out[0] = std::min(1.0, std::abs(alpha));
    const double ta = std::abs(alpha) > kPoleTolerance ? std::arg(alpha) : kNaN;
    const double tg = std::abs(gamma) > kPoleTolerance ? std::arg(gamma) : kNaN;
    out[1] = continue_angle(ta, previous, 1, 2.0 * std::numbers::pi);
    out[2] = continue_angle(tg, previous, 2, 2.0 * std::numbers::pi);
    return out;
  };
  Vector base = Vector::Zero(d);
  base[e] = 1.0;
  ParametrizedFamily f("jc", {"abs_alpha", "theta_alpha", "theta_gamma"}, unitary, base,
                       RealVector::Constant(3, 1e-4));
  f.with_domain([](const RealVector& x) { return x[0] >= 0.0 && x[0] <= 1.0; })
      .with_evaluable([](const RealVector& x) { return std::abs(x[0]) <= 1.0; })
      .with_stencil_region([](const RealVector& x) { return std::abs(x[0]) <= kJcStencilLimit; })
      .with_projection(projection)
      .with_compare_indices({e, g});
  return f;
}

// ------------------------------------------------- reduced coefficients

std::string to_string(ReducedKind k) {
  switch (k) {
    case ReducedKind::Displacement: return "displacement";
    case ReducedKind::Squeeze: return "squeeze";
    case ReducedKind::Spin: return "spin";
    case ReducedKind::JcSector: return "jc_sector";
  }
  return "unknown";
}

const std::vector<Complex>& ReducedCoefficients::at(const std::string& name) const {
  const auto it = columns.find(name);
  if (it == columns.end()) {
    throw Error(ErrorCode::InvalidArgument, "no coefficient column '" + name + "'");
  }
  return it->second;
}

namespace {

struct ReducedSystem {
  ReducedKind kind;
  std::vector<std::string> names;
  Matrix y0;  // 1 x m
  std::function<Matrix(const Matrix&)> rhs;
};

ReducedSystem reduced_system(const ModelSpec& spec, int sector) {
  if (const auto* g = std::get_if<GhoSpec>(&spec)) {
    const GhoSpec r = reduce_gho(*g);
    if (r.lambda == 0.0 && r.mu != 0.0) {
      Matrix y(1, 3);
      y << r.omega, r.mu, r.nu;
      return {ReducedKind::Displacement, {"omega", "mu", "nu"}, y, [](const Matrix& s) {
                const Complex w = s(0, 0), mu = s(0, 1);
                Matrix d(1, 3);
                d << 0.0, -w * w * mu, -2.0 * w * std::norm(mu);
                return d;
              }};
    }
    Matrix y(1, 3);
    y << r.omega, r.lambda, r.nu;
    return {ReducedKind::Squeeze, {"omega", "lambda", "nu"}, y, [](const Matrix& s) {
              const Complex w = s(0, 0), lam = s(0, 1);
              const double l2 = std::norm(lam);
              Matrix d(1, 3);
              d << -16.0 * w * l2, -4.0 * w * w * lam, -8.0 * w * l2;
              return d;
            }};
  }
  if (const auto* sp = std::get_if<SpinSpec>(&spec)) {
    sp->validate();
    Matrix y(1, 2);
    y << sp->b_field[2], Complex(0.5 * sp->b_field[0], -0.5 * sp->b_field[1]);
    return {ReducedKind::Spin, {"beta_z", "beta"}, y, [](const Matrix& s) {
              const Complex bz = s(0, 0), b = s(0, 1);
              Matrix d(1, 2);
              d << 4.0 * bz * std::norm(b), -bz * bz * b;
              return d;
            }};
  }
  const auto& jc = std::get<JcSpec>(spec);
  const JcSectors blocks = sector_blocks(jc);
  if (sector < 0 || sector >= static_cast<int>(blocks.sectors.size())) {
    throw Error(ErrorCode::InvalidArgument, "JC sector outside 0..n_max-1");
  }
  const Eigen::Matrix2d& b = blocks.sectors[static_cast<std::size_t>(sector)].block;
  Matrix y(1, 3);
  y << b(0, 0), b(1, 1), b(0, 1);
  return {ReducedKind::JcSector, {"A", "B", "C"}, y, [](const Matrix& s) {
            const Complex diff = s(0, 0) - s(0, 1), c = s(0, 2);
            const Complex da = 2.0 * c * c * diff;
            Matrix d(1, 3);
            d << da, -da, -diff * diff * c;
            return d;
          }};
}

}  // namespace

ReducedCoefficients closed_form_flow(const ModelSpec& spec, const std::vector<double>& l_grid,
                                     int sector) {
  for (std::size_t k = 0; k < l_grid.size(); ++k) {
    if (!(l_grid[k] >= 0.0) || (k > 0 && !(l_grid[k] > l_grid[k - 1]))) {
      throw Error(ErrorCode::InvalidArgument, "l grid must be non-negative and increasing");
    }
  }
  const ReducedSystem sys = reduced_system(spec, sector);
  ReducedCoefficients out;
  out.kind = sys.kind;
  out.sector = sector;
  out.l = l_grid;
  for (const auto& n : sys.names) out.columns[n] = {};

  ode::Stepper stepper(ode::AdaptiveRk45{1e-12, 1e-15, 1e-14, 0.5});
  auto f = [&](double, const ode::State& s) -> ode::State { return sys.rhs(s); };
  ode::State y = sys.y0;
  double l = 0.0;
  for (double target : l_grid) {
    stepper.integrate_to(f, l, y, target);
    l = target;
    for (std::size_t i = 0; i < sys.names.size(); ++i) {
      out.columns[sys.names[i]].push_back(y(0, static_cast<Eigen::Index>(i)));
    }
  }
  return out;
}

ReducedCoefficients extract_coefficients(const FlowTrajectory& flow, const ModelSpec& spec,
                                         int sector) {
  const ReducedSystem sys = reduced_system(spec, sector);
  ReducedCoefficients out;
  out.kind = sys.kind;
  out.sector = sector;
  for (const auto& n : sys.names) out.columns[n] = {};
  for (const FlowSample& s : flow.samples) {
    const Matrix& h = s.h.matrix();
    out.l.push_back(s.l);
    switch (sys.kind) {
      case ReducedKind::Displacement:
        out.columns["omega"].push_back(h(1, 1) - h(0, 0));
        out.columns["mu"].push_back(h(1, 0));
        out.columns["nu"].push_back(h(0, 0));
        break;
      case ReducedKind::Squeeze:
        out.columns["omega"].push_back(h(1, 1) - h(0, 0));
        out.columns["lambda"].push_back(h(2, 0) / std::numbers::sqrt2);
        out.columns["nu"].push_back(h(0, 0));
        break;
      case ReducedKind::Spin: {
        const double s2 = std::get<SpinSpec>(spec).s * 2.0;
        out.columns["beta_z"].push_back(h(0, 0) - h(1, 1));
        out.columns["beta"].push_back(h(0, 1) / std::sqrt(s2));
        break;
      }
      case ReducedKind::JcSector: {
        const Eigen::Index e = 2 * sector + 1, g = 2 * sector + 2;
        out.columns["A"].push_back(h(e, e));
        out.columns["B"].push_back(h(g, g));
        out.columns["C"].push_back(h(e, g));
        break;
      }
    }
  }
  return out;
}

// ------------------------------------------------------------ projection

namespace {

// Stacks real and imaginary parts column-major.
RealVector flatten(const Matrix& m) {
  RealVector v(2 * m.size());
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    v[2 * i] = m(i).real();
    v[2 * i + 1] = m(i).imag();
  }
  return v;
}

}  // namespace

double edge_amplitude(const Matrix& u, const ParametrizedFamily& family) {
  const auto& keep = family.compare_indices();
  if (keep.empty()) return 0.0;
  const std::set<Eigen::Index> kept(keep.begin(), keep.end());
  const Vector state = u.adjoint() * family.base_state();
  double worst = 0.0;
  for (Eigen::Index r = 0; r < state.size(); ++r) {
    if (!kept.count(r)) worst = std::max(worst, std::abs(state[r]));
  }
  return worst;
}

CoordinateTrajectory coordinate_projection(const FlowTrajectory& flow,
                                           const ParametrizedFamily& family, double tolerance) {
  if (!family.has_projection()) {
    throw Error(ErrorCode::NotInFamily, family.name() + " has no coordinate projection");
  }
  const std::size_t n = flow.samples.size();
  for (const FlowSample& s : flow.samples) {
    if (!s.u) throw Error(ErrorCode::InvalidArgument, "coordinate projection needs a tracked U");
    if (s.u->rows() != family.dim()) {
      throw Error(ErrorCode::DimMismatch, "flow and family dimensions differ");
    }
  }
  CoordinateTrajectory out;
  const int k = family.k();
  for (std::size_t j = 0; j < n; ++j) {
    const RealVector* prev = out.alpha.empty() ? nullptr : &out.alpha.back();
    out.l.push_back(flow.samples[j].l);
    out.alpha.push_back(family.project(*flow.samples[j].u, prev));
  }
  // Backfill coordinates that were undefined from the first sample onwards.
  for (int i = 0; i < k; ++i) {
    double first = 0.0;
    for (const RealVector& a : out.alpha) {
      if (std::isfinite(a[i])) {
        first = a[i];
        break;
      }
    }
    for (RealVector& a : out.alpha) {
      if (!std::isfinite(a[i])) a[i] = first;
      else break;
    }
  }

  for (std::size_t j = 0; j < n; ++j) {
    const Matrix fam = family.compared(family.unitary_raw(out.alpha[j]).adjoint());
    const Matrix act = family.compared(flow.samples[j].u->adjoint());
    const Complex overlap = (act.conjugate().cwiseProduct(fam)).sum();
    const Complex phase = std::abs(overlap) > 0.0 ? overlap / std::abs(overlap) : 1.0;
    const double residual = (fam - phase * act).cwiseAbs().maxCoeff();
    out.reconstruction_residual.push_back(residual);
    if (!(residual <= tolerance)) {
      std::ostringstream os;
      os << "U(l) at l = " << out.l[j] << " is not in the " << family.name()
         << " family: reconstruction residual " << residual << " > " << tolerance;
      throw Error(ErrorCode::NotInFamily, os.str());
    }
  }

  const std::vector<RealVector> fd = n >= 3 ? differentiate_alpha(out)
                                            : std::vector<RealVector>(n, RealVector::Zero(k));
  const double reach = 2.0 * family.fd_step().maxCoeff();
  for (std::size_t j = 0; j < n; ++j) {
    if (!family.stencil_evaluable(out.alpha[j], reach)) {
      out.alpha_dot.push_back(fd[j]);
      out.tangent_residual.push_back(kNaN);
      continue;
    }
    // Solve G_i alpha_dot^i = eta_flow on the compared part.
    const RealVector b = flatten(family.compared(generator(flow.samples[j].h, flow.choice).matrix()));
    const std::vector<Matrix> g_ops = family_generators(family, out.alpha[j]);
    RealMatrix a(b.size(), k);
    for (int i = 0; i < k; ++i) a.col(i) = flatten(family.compared(g_ops[static_cast<std::size_t>(i)]));
    Eigen::CompleteOrthogonalDecomposition<RealMatrix> cod(a);
    cod.setThreshold(1e-10);
    const RealVector x = cod.solve(b);
    out.alpha_dot.push_back(x);
    out.tangent_residual.push_back((a * x - b).cwiseAbs().maxCoeff());
  }
  return out;
}

}  // namespace wegnerflow
