#include <algorithm>
#include <cmath>

#include "helpers.hpp"
#include "wegnerflow/band.hpp"
#include "wegnerflow/error.hpp"
#include "wegnerflow/flow.hpp"
#include "wegnerflow/models.hpp"
#include "wegnerflow/numerics.hpp"

using namespace wftest;

namespace {

FlowConfig tight(double l_max = 50.0) {
  FlowConfig cfg;
  cfg.integrator = ode::AdaptiveRk45{1e-11, 1e-14, 1e-14, 0.1};
  cfg.l_max = l_max;
  return cfg;
}

HermitianOperator two_band(std::uint64_t seed) {
  BandDecomposition bd = band_split(random_h(6, seed));
  for (auto it = bd.bands.begin(); it != bd.bands.end();) {
    it = (it->first == 1 || it->first == 4) ? std::next(it) : bd.bands.erase(it);
  }
  return band_assemble(bd);
}

}  // namespace

TEST_SUITE("flow") {

TEST_CASE("wegner_generator examples") {
  CHECK(wegner_generator(HermitianOperator::symmetrized(mat2(1.0, 0.0, 0.0, 3.0))).frobenius_norm() == 0.0);

  const double a = 1.3, b = -0.4, c = 0.7;
  const AntiHermitianOperator eta = wegner_generator(HermitianOperator::symmetrized(mat2(a, c, c, b)));
  CHECK(std::abs(eta(0, 1) - c * (a - b)) < 1e-15);
  CHECK(std::abs(eta(1, 0) + c * (a - b)) < 1e-15);
  CHECK(std::abs(eta(0, 0)) == 0.0);
}

TEST_CASE("wegner_generator of the squeeze form") {
  const GhoSpec spec{1.3, Complex(0.2, 0.1), 0.0, 0.0, 12};
  const Matrix a = annihilation(spec.n_max);
  const Matrix ad = a.adjoint();
  const Matrix expected = 2.0 * spec.omega * (spec.lambda * ad * ad - std::conj(spec.lambda) * a * a);
  const Matrix eta = wegner_generator(build_gho(spec)).matrix();
  for (int r = 0; r <= spec.n_max - 2; ++r) {
    for (int col = 0; col <= spec.n_max - 2; ++col) CHECK(std::abs(eta(r, col) - expected(r, col)) < 1e-12);
  }
}

TEST_CASE("band_generator examples") {
  const HermitianOperator single = build_gho(GhoSpec{1.0, 0.2, 0.0, 0.0, 10});
  CHECK(max_abs(band_generator(single, 2).matrix() - wegner_generator(single).matrix()) == 0.0);

  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const HermitianOperator h = two_band(seed);
    const Matrix sum = band_generator(h, 1).matrix() + band_generator(h, 4).matrix();
    CHECK(max_abs(sum - wegner_generator(h).matrix()) == 0.0);
  }
  CHECK_THROWS_AS(band_generator(single, 1), Error);
}

TEST_CASE("band generators sum to Wegner's for every band set") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const HermitianOperator h = random_h(7, seed);
    Matrix sum = Matrix::Zero(7, 7);
    for (int b : band_split(h).band_indices()) sum += band_generator(h, b).matrix();
    CHECK(max_abs(sum - wegner_generator(h).matrix()) == 0.0);
  }
}

TEST_CASE("flow_rhs examples") {
  const HermitianOperator h = random_h(4, 3);
  CHECK(flow_rhs(h, AntiHermitianOperator::zero(4)).frobenius_norm() == 0.0);

  const double a = 0.9, b = -0.2, c = 0.35;
  const HermitianOperator h2 = HermitianOperator::symmetrized(mat2(a, c, c, b));
  const Matrix d = flow_rhs(h2, wegner_generator(h2)).matrix();
  CHECK(std::abs(d(1, 0) - (-(a - b) * (a - b) * c)) < 1e-15);
  CHECK(std::abs(d(0, 0) - 2.0 * c * c * (a - b)) < 1e-15);
  CHECK(std::abs(d(1, 1) + 2.0 * c * c * (a - b)) < 1e-15);

  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Matrix r = flow_rhs(random_h(5, seed), random_k(5, seed + 1)).matrix();
    CHECK(r == r.adjoint());
  }
  CHECK_THROWS_AS(flow_rhs(random_h(3, 0), random_k(4, 0)), Error);
}

TEST_CASE("diagonal input converges at l = 0") {
  FlowConfig cfg = tight();
  cfg.track_unitary = true;
  const FlowTrajectory t = integrate_flow(HermitianOperator::symmetrized(mat2(2.0, 0.0, 0.0, 1.0)),
                                          WegnerGenerator{}, cfg);
  CHECK(t.samples.size() == 1);
  CHECK(t.stop_reason == StopReason::Converged);
  CHECK(t.back().l == 0.0);
  CHECK(max_abs(*t.back().u - Matrix::Identity(2, 2)) == 0.0);
}

TEST_CASE("2x2 flow converges to the ordered eigenvalues") {
  const HermitianOperator h0 = HermitianOperator::symmetrized(mat2(1.0, 0.5, 0.5, 0.0));
  const FlowTrajectory t = integrate_flow(h0, WegnerGenerator{}, tight());
  REQUIRE(t.stop_reason == StopReason::Converged);
  const RealVector d = t.back().h.diagonal();
  CHECK(std::abs(d[0] - (1.0 + std::sqrt(2.0)) / 2.0) < 1e-8);
  CHECK(std::abs(d[1] - (1.0 - std::sqrt(2.0)) / 2.0) < 1e-8);
}

TEST_CASE("degenerate diagonal stalls with eta = 0") {
  const FlowTrajectory t =
      integrate_flow(HermitianOperator::symmetrized(mat2(0.0, 1.0, 1.0, 0.0)), WegnerGenerator{}, tight());
  CHECK(t.stop_reason == StopReason::Stalled);
  CHECK(t.back().eta_norm == 0.0);
  REQUIRE(!t.warnings.empty());
  CHECK(t.warnings.back().find("degenerate-diagonal fixed point") != std::string::npos);
}

TEST_CASE("band flow requires the band at l = 0") {
  CHECK_THROWS_AS(integrate_flow(build_gho(GhoSpec{1.0, 0.2, 0.0, 0.0, 8}), BandGenerator{1}, tight()), Error);
}

TEST_CASE("tracked unitary reproduces H(l) and stays unitary") {
  FlowConfig cfg = tight(20.0);
  cfg.track_unitary = true;
  cfg.sampling = SampleSpacing{0.05};
  const HermitianOperator h0 = HermitianOperator::symmetrized(mat2(1.0, 0.5, 0.5, 0.0));
  const FlowTrajectory t = integrate_flow(h0, WegnerGenerator{}, cfg);
  for (const FlowSample& s : t.samples) {
    const Matrix& u = *s.u;
    CHECK(max_abs(u * h0.matrix() * u.adjoint() - s.h.matrix()) <= 1e-8);
    CHECK(unitarity_defect(u) <= 1e-8);
  }
}

TEST_CASE("isospectrality, monotonicity and eigenvalues along random flows") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const HermitianOperator h0 = random_h(6, seed);
    FlowConfig cfg = tight(30.0);
    cfg.integrator = ode::AdaptiveRk45{1e-10, 1e-13, 1e-14, 1.0};
    cfg.sampling = SampleEvery{5};
    const FlowTrajectory t = integrate_flow(h0, WegnerGenerator{}, cfg);
    const RealVector exact = sorted_eigenvalues(h0);
    for (std::size_t k = 0; k < t.samples.size(); ++k) {
      const FlowSample& s = t.samples[k];
      CHECK(std::abs(s.trace_h - t.front().trace_h) <= 1e-8 * h0.frobenius_norm());
      CHECK(std::abs(s.trace_h2 - t.front().trace_h2) <= 1e-8 * t.front().trace_h2);
      CHECK((sorted_eigenvalues(s.h) - exact).cwiseAbs().maxCoeff() <= 1e-8);
      if (k > 0) CHECK(s.offdiag_sq <= t.samples[k - 1].offdiag_sq + 10.0 * 1e-13);
    }
  }
}

TEST_CASE("band-norm is non-increasing under the band generator") {
  std::mt19937_64 rng(11);
  const HermitianOperator h0 = two_band(4);
  FlowConfig cfg = tight(10.0);
  cfg.sampling = SampleSpacing{0.01};
  const FlowTrajectory t = integrate_flow(h0, BandGenerator{4}, cfg);
  for (std::size_t k = 1; k < t.samples.size(); ++k) {
    CHECK(t.samples[k].target_sq <= t.samples[k - 1].target_sq + 1e-13);
  }
}

TEST_CASE("degenerate targeted pair is stationary at l = 0") {
  BandDecomposition bd;
  bd.eps = vec({0.0, 0.0, 1.0});
  bd.bands[1] = Vector(2);
  bd.bands[1] << 0.4, 0.3;
  const HermitianOperator h = band_assemble(bd);
  const Matrix d = flow_rhs(h, band_generator(h, 1)).matrix();
  CHECK(std::abs(d(1, 0)) <= 1e-15);
}

TEST_CASE("decay identity on a diagonal trajectory is zero") {
  FlowTrajectory t;
  const HermitianOperator h = HermitianOperator::symmetrized(mat2(1.0, 0.0, 0.0, -1.0));
  for (double l : {0.0, 0.1, 0.2, 0.3}) {
    FlowSample s;
    s.l = l;
    s.h = h;
    s.eps_sq_sum = 2.0;
    t.samples.push_back(s);
  }
  const DecayIdentity d = decay_identity_residual(t);
  CHECK(*std::max_element(d.decay_residual.begin(), d.decay_residual.end()) == 0.0);
  CHECK(*std::max_element(d.trace_residual.begin(), d.trace_residual.end()) == 0.0);
  t.samples.resize(2);
  CHECK_THROWS_AS(decay_identity_residual(t), Error);
}

TEST_CASE("decay identity on the 2x2 flow and the spin-1/2 flow") {
  FlowConfig cfg = tight(5.0);
  cfg.stop_offdiag = 0.0;
  cfg.sampling = SampleSpacing{1e-3};
  const FlowTrajectory t2 =
      integrate_flow(HermitianOperator::symmetrized(mat2(1.0, 0.5, 0.5, 0.0)), WegnerGenerator{}, cfg);
  CHECK(decay_identity_residual(t2).max_relative_decay_residual() <= 1e-6);

  const FlowTrajectory ts = integrate_flow(
      build_spin(SpinSpec{0.5, Eigen::Vector3d(0.6, 0.0, 0.8)}), WegnerGenerator{}, cfg);
  CHECK(decay_identity_residual(ts).max_relative_decay_residual() <= 1e-6);
}

TEST_CASE("block report groups degenerate diagonal entries") {
  Matrix m = Matrix::Zero(3, 3);
  m(0, 0) = 1.0;
  m(1, 1) = 1.0;
  m(2, 2) = 3.0;
  m(0, 1) = m(1, 0) = 0.5;
  const BlockReport r = block_report(HermitianOperator::symmetrized(m), 1e-8);
  REQUIRE(r.clusters.size() == 2);
  CHECK(r.clusters[0] == std::vector<int>{0, 1});
  CHECK(r.intra_cluster_sq == doctest::Approx(0.5));
  CHECK(r.inter_cluster_sq == 0.0);
}

TEST_CASE("fixed-step RK4 and adaptive RK45 agree on a linear ODE") {
  Matrix a(1, 1);
  a(0, 0) = Complex(-1.0, 2.0);
  const auto rhs = [&](double, const ode::State& y) { return ode::State(a * y); };
  ode::State y4 = Matrix::Ones(1, 1), y45 = Matrix::Ones(1, 1);
  ode::Stepper(ode::FixedRk4{1e-3}).integrate_to(rhs, 0.0, y4, 1.0);
  ode::Stepper(ode::AdaptiveRk45{1e-12, 1e-14, 1e-14, 0.1}).integrate_to(rhs, 0.0, y45, 1.0);
  const Complex exact = std::exp(a(0, 0));
  CHECK(std::abs(y4(0, 0) - exact) < 1e-10);
  CHECK(std::abs(y45(0, 0) - exact) < 1e-10);
}

TEST_CASE("five-point sample derivatives are exact on quartics") {
  std::vector<double> l, v;
  for (int k = 0; k <= 10; ++k) {
    l.push_back(0.1 * k);
    const double x = 0.1 * k;
    v.push_back(x * x * x * x - 2.0 * x * x + 3.0 * x);
  }
  for (std::size_t k = 0; k < l.size(); ++k) {
    const double x = l[k];
    CHECK(sample_derivative<double>(l, v, k) == doctest::Approx(4 * x * x * x - 4 * x + 3).epsilon(1e-10));
  }
}

TEST_CASE("non-uniform grids fall back to second-order stencils") {
  const std::vector<double> l{0.0, 0.1, 0.3, 0.4, 0.7};
  std::vector<double> v;
  for (double x : l) v.push_back(2.0 * x * x + x);
  for (std::size_t k = 1; k + 1 < l.size(); ++k) {
    CHECK(sample_derivative<double>(l, v, k) == doctest::Approx(4.0 * l[k] + 1.0).epsilon(1e-12));
  }
}

}  // TEST_SUITE
