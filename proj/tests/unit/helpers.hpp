#pragma once

#include <doctest.h>

#include <random>

#include "wegnerflow/operator.hpp"

namespace wftest {

using namespace wegnerflow;

inline Matrix mat2(Complex a, Complex b, Complex c, Complex d) {
  Matrix m(2, 2);
  m << a, b, c, d;
  return m;
}

inline RealVector vec(std::initializer_list<double> xs) {
  RealVector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

inline Matrix random_matrix(Eigen::Index d, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix m(d, d);
  for (Eigen::Index c = 0; c < d; ++c) {
    for (Eigen::Index r = 0; r < d; ++r) m(r, c) = Complex(n(rng), n(rng));
  }
  return m;
}

inline HermitianOperator random_h(Eigen::Index d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return HermitianOperator::symmetrized(random_matrix(d, rng));
}

inline AntiHermitianOperator random_k(Eigen::Index d, std::uint64_t seed, double scale = 1.0) {
  std::mt19937_64 rng(seed);
  return AntiHermitianOperator::symmetrized(scale * random_matrix(d, rng));
}

}  // namespace wftest
