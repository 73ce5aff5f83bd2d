#pragma once

// Symmetric tridiagonal eigensolver: QL iteration with implicit Wilkinson
// shifts, accumulating the rotations into the eigenvector matrix (tql2).

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace qst {

class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TridiagonalEigensystem {
  Eigen::VectorXd values;   // ascending
  Eigen::MatrixXd vectors;  // column j pairs with values[j]
};

/// Eigen-decomposes the symmetric tridiagonal matrix with main diagonal
/// `diag` and off-diagonal `offdiag` (size diag.size()-1). At most
/// `sweeps_per_value` QL sweeps per eigenvalue and 30*order sweeps overall.
inline TridiagonalEigensystem tridiagonal_eigensystem(const std::vector<double>& diag,
                                                      const std::vector<double>& offdiag,
                                                      int sweeps_per_value = 30) {
  const int n = static_cast<int>(diag.size());
  if (n == 0) return {};
  if (static_cast<int>(offdiag.size()) != n - 1)
    throw std::invalid_argument("off-diagonal must have order-1 entries");

  std::vector<double> d(diag);
  std::vector<double> e(static_cast<std::size_t>(n), 0.0);
  std::copy(offdiag.begin(), offdiag.end(), e.begin());
  Eigen::MatrixXd z = Eigen::MatrixXd::Identity(n, n);

  const double eps = std::numeric_limits<double>::epsilon();
  const int total_cap = 30 * n;
  int total_sweeps = 0;
  double f = 0.0;
  double tst1 = 0.0;

  for (int l = 0; l < n; ++l) {
    tst1 = std::max(tst1, std::abs(d[l]) + std::abs(e[l]));
    int m = l;
    while (m < n - 1 && std::abs(e[m]) > eps * tst1) ++m;

    if (m > l) {
      int sweeps = 0;
      do {
        if (++sweeps > sweeps_per_value || ++total_sweeps > total_cap)
          throw ConvergenceError("tridiagonal QL did not converge for eigenvalue " + std::to_string(l));

        double g = d[l];
        double p = (d[l + 1] - g) / (2.0 * e[l]);
        double r = std::hypot(p, 1.0);
        if (p < 0) r = -r;
        d[l] = e[l] / (p + r);
        d[l + 1] = e[l] * (p + r);
        const double dl1 = d[l + 1];
        double h = g - d[l];
        for (int i = l + 2; i < n; ++i) d[i] -= h;
        f += h;

        p = d[m];
        double c = 1.0, c2 = 1.0, c3 = 1.0;
        const double el1 = e[l + 1];
        double s = 0.0, s2 = 0.0;
        for (int i = m - 1; i >= l; --i) {
          c3 = c2;
          c2 = c;
          s2 = s;
          g = c * e[i];
          h = c * p;
          r = std::hypot(p, e[i]);
          e[i + 1] = s * r;
          s = e[i] / r;
          c = p / r;
          p = c * d[i] - s * g;
          d[i + 1] = h + s * (c * g + s * d[i]);
          for (int k = 0; k < n; ++k) {
            h = z(k, i + 1);
            z(k, i + 1) = s * z(k, i) + c * h;
            z(k, i) = c * z(k, i) - s * h;
          }
        }
        p = -s * s2 * c3 * el1 * e[l] / dl1;
        e[l] = s * p;
        d[l] = c * p;
      } while (std::abs(e[l]) > eps * tst1);
    }
    d[l] += f;
    e[l] = 0.0;
  }

  std::vector<int> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return d[a] < d[b]; });

  TridiagonalEigensystem out{Eigen::VectorXd(n), Eigen::MatrixXd(n, n)};
  for (int j = 0; j < n; ++j) {
    out.values[j] = d[idx[j]];
    out.vectors.col(j) = z.col(idx[j]);
  }
  return out;
}

}  // namespace qst
