#pragma once

#include <array>
#include <cstddef>
#include <vector>

namespace ragprobe {

struct PcaResult {
  std::vector<std::array<double, 2>> coords;      // N x 2 projection
  std::array<double, 2> explained = {0.0, 0.0};   // fractions of total variance
  std::array<std::vector<double>, 2> components;  // top-2 principal directions (unit)
  std::vector<double> eigenvalues;                // all, descending, clamped at 0
};

/// Two-dimensional PCA: mean-center, eigendecompose the sample covariance
/// (cyclic Jacobi), project onto the top-2 eigenvectors. Sign convention: the
/// first loading of each component with |x| > 1e-12 is positive. Requires
/// N >= 3 rows, d >= 2 columns, and nonzero total variance.
PcaResult pca_project(const std::vector<std::vector<double>>& rows);

/// Eigendecomposition of a symmetric matrix (row-major d*d) by the cyclic
/// Jacobi method: returns (eigenvalues, eigenvectors as columns), sorted
/// descending. Exposed for reuse and direct testing.
void jacobi_eigh(std::vector<double> matrix, size_t d, std::vector<double>& eigenvalues,
                 std::vector<double>& eigenvectors);

}  // namespace ragprobe
