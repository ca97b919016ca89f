#include "ragprobe/pca.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ragprobe/error.hpp"

namespace ragprobe {

void jacobi_eigh(std::vector<double> matrix, size_t d, std::vector<double>& eigenvalues,
                 std::vector<double>& eigenvectors) {
  if (matrix.size() != d * d) raise(Errc::invalid_argument, "jacobi: matrix size mismatch");

  auto& a = matrix;
  std::vector<double> v(d * d, 0.0);
  for (size_t i = 0; i < d; ++i) v[i * d + i] = 1.0;

  auto off_norm = [&] {
    double s = 0.0;
    for (size_t p = 0; p < d; ++p) {
      for (size_t q = p + 1; q < d; ++q) s += a[p * d + q] * a[p * d + q];
    }
    return std::sqrt(s);
  };
  double scale = 0.0;
  for (size_t i = 0; i < d; ++i) {
    for (size_t j = 0; j < d; ++j) scale = std::max(scale, std::abs(a[i * d + j]));
  }
  double tol = 1e-14 * std::max(scale, 1.0);

  const int max_sweeps = 100;
  for (int sweep = 0; sweep < max_sweeps && off_norm() > tol; ++sweep) {
    for (size_t p = 0; p < d; ++p) {
      for (size_t q = p + 1; q < d; ++q) {
        double apq = a[p * d + q];
        if (std::abs(apq) <= tol * 1e-2) continue;
        double app = a[p * d + p];
        double aqq = a[q * d + q];
        double theta = (aqq - app) / (2.0 * apq);
        double t = (theta >= 0 ? 1.0 : -1.0) /
                   (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        double c = 1.0 / std::sqrt(t * t + 1.0);
        double s = t * c;

        for (size_t i = 0; i < d; ++i) {
          double aip = a[i * d + p];
          double aiq = a[i * d + q];
          a[i * d + p] = c * aip - s * aiq;
          a[i * d + q] = s * aip + c * aiq;
        }
        for (size_t i = 0; i < d; ++i) {
          double api = a[p * d + i];
          double aqi = a[q * d + i];
          a[p * d + i] = c * api - s * aqi;
          a[q * d + i] = s * api + c * aqi;
        }
        for (size_t i = 0; i < d; ++i) {
          double vip = v[i * d + p];
          double viq = v[i * d + q];
          v[i * d + p] = c * vip - s * viq;
          v[i * d + q] = s * vip + c * viq;
        }
      }
    }
  }

  std::vector<size_t> order(d);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](size_t i, size_t j) { return a[i * d + i] > a[j * d + j]; });

  eigenvalues.assign(d, 0.0);
  eigenvectors.assign(d * d, 0.0);
  for (size_t col = 0; col < d; ++col) {
    eigenvalues[col] = a[order[col] * d + order[col]];
    for (size_t i = 0; i < d; ++i) eigenvectors[i * d + col] = v[i * d + order[col]];
  }
}

PcaResult pca_project(const std::vector<std::vector<double>>& rows) {
  size_t n = rows.size();
  if (n < 3) raise(Errc::invalid_argument, "pca requires at least 3 rows");
  size_t d = rows[0].size();
  if (d < 2) raise(Errc::invalid_argument, "pca requires at least 2 dimensions");
  for (const auto& row : rows) {
    if (row.size() != d) raise(Errc::dimension_mismatch, "pca: ragged input rows");
  }

  std::vector<double> mean(d, 0.0);
  for (const auto& row : rows) {
    for (size_t j = 0; j < d; ++j) mean[j] += row[j];
  }
  for (double& m : mean) m /= static_cast<double>(n);

  std::vector<std::vector<double>> centered(n, std::vector<double>(d));
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < d; ++j) centered[i][j] = rows[i][j] - mean[j];
  }

  // Sample covariance, divisor N-1.
  std::vector<double> cov(d * d, 0.0);
  for (size_t i = 0; i < n; ++i) {
    for (size_t p = 0; p < d; ++p) {
      double xp = centered[i][p];
      for (size_t q = p; q < d; ++q) cov[p * d + q] += xp * centered[i][q];
    }
  }
  for (size_t p = 0; p < d; ++p) {
    for (size_t q = p; q < d; ++q) {
      double value = cov[p * d + q] / static_cast<double>(n - 1);
      cov[p * d + q] = value;
      cov[q * d + p] = value;
    }
  }

  std::vector<double> eigenvalues;
  std::vector<double> eigenvectors;
  jacobi_eigh(cov, d, eigenvalues, eigenvectors);

  double total = 0.0;
  for (double& lambda : eigenvalues) {
    lambda = std::max(lambda, 0.0);
    total += lambda;
  }
  if (total <= 0.0) raise(Errc::degenerate_variance, "pca: zero total variance");

  PcaResult result;
  result.eigenvalues = eigenvalues;
  for (size_t c = 0; c < 2; ++c) {
    std::vector<double> component(d);
    for (size_t i = 0; i < d; ++i) component[i] = eigenvectors[i * d + c];
    for (size_t i = 0; i < d; ++i) {
      if (std::abs(component[i]) > 1e-12) {
        if (component[i] < 0) {
          for (double& x : component) x = -x;
        }
        break;
      }
    }
    result.explained[c] = eigenvalues[c] / total;
    result.components[c] = std::move(component);
  }

  result.coords.resize(n);
  for (size_t i = 0; i < n; ++i) {
    for (size_t c = 0; c < 2; ++c) {
      double dot = 0.0;
      for (size_t j = 0; j < d; ++j) dot += centered[i][j] * result.components[c][j];
      result.coords[i][c] = dot;
    }
  }
  return result;
}

}  // namespace ragprobe
