#pragma once

#include "qcore.hpp"

#include <cmath>
#include <vector>

namespace scrambleswap {

/// Hermitian operator basis of dimension d^2, orthonormal under the trace
/// inner product: normalized identity plus the generalized Gell-Mann matrices
/// (symmetric, antisymmetric and diagonal families).
inline std::vector<Mat> hermitian_basis(Index d) {
  std::vector<Mat> basis;
  basis.reserve(static_cast<size_t>(d * d));
  basis.push_back(Mat::Identity(d, d) / std::sqrt(static_cast<double>(d)));
  const double s = 1.0 / std::sqrt(2.0);
  for (Index j = 0; j < d; ++j) {
    for (Index k = j + 1; k < d; ++k) {
      Mat sym = Mat::Zero(d, d);
      sym(j, k) = s;
      sym(k, j) = s;
      basis.push_back(sym);
      Mat asym = Mat::Zero(d, d);
      asym(j, k) = cplx(0.0, -s);
      asym(k, j) = cplx(0.0, s);
      basis.push_back(asym);
    }
  }
  for (Index l = 1; l < d; ++l) {
    Mat diag = Mat::Zero(d, d);
    const double c = 1.0 / std::sqrt(static_cast<double>(l * (l + 1)));
    for (Index m = 0; m < l; ++m) diag(m, m) = c;
    diag(l, l) = -c * static_cast<double>(l);
    basis.push_back(diag);
  }
  return basis;
}

} // namespace scrambleswap
