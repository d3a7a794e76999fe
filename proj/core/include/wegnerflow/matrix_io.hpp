#pragma once

// Matrix JSON format:
//   {"dim": d, "entries": [[[re, im], ...], ...]}   (row-major)

#include <nlohmann/json.hpp>

#include <filesystem>

#include "wegnerflow/operator.hpp"

namespace wegnerflow {

nlohmann::json matrix_to_json(const Matrix& m);

/// Parses the grid without any Hermiticity check. Throws InvalidArgument on
/// malformed documents.
Matrix matrix_from_json(const nlohmann::json& doc);

/// Reads a matrix file and applies validate_hermitian with `tol`.
HermitianOperator read_hermitian(const std::filesystem::path& path, double tol);

void write_matrix(const std::filesystem::path& path, const Matrix& m);

}  // namespace wegnerflow
