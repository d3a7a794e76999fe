#include <cmath>
#include <numbers>
#include <limits>

#include "helpers.hpp"
#include "wegnerflow/band.hpp"
#include "wegnerflow/error.hpp"
#include "wegnerflow/matrix_io.hpp"
#include "wegnerflow/models.hpp"

using namespace wftest;

TEST_SUITE("operator") {

TEST_CASE("validate_hermitian accepts Hermitian grids and rejects others") {
  const Matrix m = mat2(1.0, 0.5, 0.5, 0.0);
  CHECK(validate_hermitian(m, 0.0).matrix() == m);

  const Matrix y = mat2(0.0, kI, -kI, 0.0);
  CHECK(validate_hermitian(y, 1e-12).matrix() == y);

  try {
    validate_hermitian(mat2(0.0, 1.0, 0.0, 0.0), 1e-12);
    FAIL("expected NotHermitian");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NotHermitian);
  }

  Matrix bad = m;
  bad(0, 0) = std::numeric_limits<double>::quiet_NaN();
  try {
    validate_hermitian(bad, 1.0);
    FAIL("expected NonFinite");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonFinite);
  }
}

TEST_CASE("validate_hermitian symmetrizes within tolerance") {
  const Matrix m = mat2(1.0, Complex(0.5, 1e-13), Complex(0.5, 0.0), 2.0);
  const HermitianOperator h = validate_hermitian(m, 1e-12);
  CHECK(h(0, 1) == std::conj(h(1, 0)));
  CHECK(std::abs(h(0, 1).imag() - 5e-14) < 1e-20);
}

TEST_CASE("commutator examples") {
  const Matrix a = random_h(5, 1).matrix();
  CHECK(max_abs(commutator(a, a)) == 0.0);

  const Matrix sp = mat2(0.0, 1.0, 0.0, 0.0);
  const Matrix sm = sp.adjoint();
  const Matrix expected = mat2(1.0, 0.0, 0.0, -1.0);
  CHECK(max_abs(commutator(sp, sm) - expected) == 0.0);

  CHECK_THROWS_AS(commutator(Matrix::Zero(2, 2), Matrix::Zero(3, 3)), Error);
}

TEST_CASE("[a^dagger a, a^dagger^2] = 2 a^dagger^2 on interior rows") {
  constexpr int n_max = 10;
  const Matrix a = annihilation(n_max);
  const Matrix ad = a.adjoint();
  const Matrix lhs = commutator(ad * a, ad * ad);
  const Matrix rhs = 2.0 * ad * ad;
  for (int r = 0; r <= n_max - 2; ++r) {
    for (int c = 0; c <= n_max; ++c) CHECK(std::abs(lhs(r, c) - rhs(r, c)) < 1e-12);
  }
}

TEST_CASE("commutator of anti-Hermitian and Hermitian is Hermitian") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Matrix c = commutator(random_k(6, seed).matrix(), random_h(6, seed + 100).matrix());
    CHECK(max_abs(c - c.adjoint()) < 1e-13);
  }
}

TEST_CASE("band_split of a diagonal matrix has no bands") {
  RealVector d(3);
  d << 1.0, -2.0, 0.5;
  const BandDecomposition bd = band_split(HermitianOperator::symmetrized(d.cast<Complex>().asDiagonal()));
  CHECK(bd.eps == d);
  CHECK(bd.bands.empty());
}

TEST_CASE("band_split of the squeeze oscillator is exactly band 2") {
  const BandDecomposition bd = band_split(build_gho(GhoSpec{1.0, 0.2, 0.0, 0.0, 12}));
  CHECK(bd.band_indices() == std::vector<int>{2});
}

TEST_CASE("band_split and band_assemble are inverse") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const HermitianOperator h = random_h(7, seed);
    CHECK(band_assemble(band_split(h)).matrix() == h.matrix());
  }
}

TEST_CASE("band_assemble examples") {
  BandDecomposition bd;
  bd.eps = vec({1.0, 2.0});
  CHECK(band_assemble(bd).matrix() == mat2(1.0, 0.0, 0.0, 2.0));

  const Complex c(0.3, -0.4);
  BandDecomposition tri;
  tri.eps = RealVector::Zero(3);
  tri.bands[1] = Vector::Constant(2, c);
  const Matrix m = band_assemble(tri).matrix();
  CHECK(m(1, 0) == c);
  CHECK(m(2, 1) == c);
  CHECK(m(0, 1) == std::conj(c));
  CHECK(m(0, 2) == Complex(0.0));

  BandDecomposition overflow;
  overflow.eps = RealVector::Zero(2);
  overflow.bands[2] = Vector::Zero(1);
  CHECK_THROWS_AS(band_assemble(overflow), Error);
}

TEST_CASE("tiny bands are pruned") {
  Matrix m = mat2(1.0, 1e-17, 1e-17, 2.0);
  CHECK(band_split(HermitianOperator::symmetrized(m)).bands.empty());
}

TEST_CASE("off_diag_norm_sq") {
  CHECK(off_diag_norm_sq(HermitianOperator::symmetrized(mat2(3.0, 0.0, 0.0, 1.0))) == 0.0);
  CHECK(off_diag_norm_sq(HermitianOperator::symmetrized(mat2(0.0, 1.0, 1.0, 0.0))) == 2.0);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const HermitianOperator h = random_h(6, seed);
    const double tr2 = (h.matrix() * h.matrix()).trace().real();
    const double diag2 = h.diagonal().squaredNorm();
    CHECK(std::abs(off_diag_norm_sq(h) + diag2 - tr2) <= 1e-12 * tr2);
  }
}

TEST_CASE("expm_antihermitian examples") {
  CHECK(max_abs(expm_antihermitian(AntiHermitianOperator::zero(4)) - Matrix::Identity(4, 4)) < 1e-15);

  const Matrix sx = mat2(0.0, 1.0, 1.0, 0.0);
  const Matrix u = expm_antihermitian(AntiHermitianOperator::symmetrized(kI * (std::numbers::pi / 2.0) * sx));
  CHECK(max_abs(u - kI * sx) < 1e-14);

  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const AntiHermitianOperator k = random_k(6, seed);
    const Matrix prod = expm_antihermitian(k) * expm_antihermitian(AntiHermitianOperator::symmetrized(-k.matrix()));
    CHECK(max_abs(prod - Matrix::Identity(6, 6)) < 1e-12);
  }
}

TEST_CASE("expm_antihermitian stays unitary for large generators") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    AntiHermitianOperator k = random_k(8, seed);
    k = AntiHermitianOperator::symmetrized(k.matrix() * (50.0 / k.frobenius_norm()));
    CHECK(unitarity_defect(expm_antihermitian(k)) <= 1e-12);
  }
}

TEST_CASE("matrix JSON roundtrip") {
  const HermitianOperator h = random_h(4, 7);
  const nlohmann::json j = matrix_to_json(h.matrix());
  CHECK(j["dim"] == 4);
  CHECK(matrix_from_json(j) == h.matrix());
  CHECK_THROWS_AS(matrix_from_json(nlohmann::json{{"dim", 2}}), Error);
}

}  // TEST_SUITE
