#include "wegnerflow/matrix_io.hpp"

#include <fstream>

#include "wegnerflow/error.hpp"
#include "wegnerflow/report.hpp"

namespace wegnerflow {

nlohmann::json matrix_to_json(const Matrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      row.push_back({m(r, c).real(), m(r, c).imag()});
    }
    rows.push_back(std::move(row));
  }
  return {{"dim", m.rows()}, {"entries", std::move(rows)}};
}

Matrix matrix_from_json(const nlohmann::json& doc) {
  if (!doc.is_object() || !doc.contains("dim") || !doc.contains("entries")) {
    throw Error(ErrorCode::InvalidArgument, "matrix JSON needs \"dim\" and \"entries\"");
  }
  const auto d = doc.at("dim").get<long long>();
  const auto& entries = doc.at("entries");
  if (d <= 0 || !entries.is_array() || static_cast<long long>(entries.size()) != d) {
    throw Error(ErrorCode::InvalidArgument, "matrix JSON \"entries\" must have dim rows");
  }
  Matrix m(d, d);
  for (long long r = 0; r < d; ++r) {
    const auto& row = entries[r];
    if (!row.is_array() || static_cast<long long>(row.size()) != d) {
      throw Error(ErrorCode::InvalidArgument, "matrix JSON row " + std::to_string(r) +
                                                  " must have dim entries");
    }
    for (long long c = 0; c < d; ++c) {
      const auto& z = row[c];
      if (z.is_number()) {
        m(r, c) = {z.get<double>(), 0.0};
      } else if (z.is_array() && z.size() == 2) {
        m(r, c) = {z[0].get<double>(), z[1].get<double>()};
      } else {
        throw Error(ErrorCode::InvalidArgument, "matrix entry must be [re, im]");
      }
    }
  }
  return m;
}

HermitianOperator read_hermitian(const std::filesystem::path& path, double tol) {
  return validate_hermitian(matrix_from_json(read_json(path)), tol);
}

void write_matrix(const std::filesystem::path& path, const Matrix& m) {
  write_json(path, matrix_to_json(m));
}

}  // namespace wegnerflow
