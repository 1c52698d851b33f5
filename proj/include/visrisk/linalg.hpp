#pragma once

#include <cstddef>
#include <vector>

#include "visrisk/matrix.hpp"

namespace visrisk::linalg {

/// Eigen-decomposition of a symmetric matrix. Eigenvalues are sorted in
/// descending order (stable: equal eigenvalues keep axis order); row i of
/// `vectors` is the unit eigenvector for values[i], signed so that its
/// largest-magnitude entry is positive (first such entry on ties).
struct SymmetricEigen {
    std::vector<double> values;
    Matrix vectors;
};

/// Cyclic Jacobi rotations; deterministic for a given input.
SymmetricEigen symmetric_eigen(const Matrix& a);

/// Mean and (n-1)-normalised covariance of the fully observed rows of `rows`.
struct Moments {
    std::size_t count = 0;
    std::vector<double> mean;
    Matrix covariance;
};

Moments complete_case_moments(const MaskedRows& rows);

}  // namespace visrisk::linalg
