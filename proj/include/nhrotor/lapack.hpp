#pragma once

#define LAPACK_COMPLEX_CPP
#include <lapacke.h>

#include <Eigen/Dense>
#include <complex>
#include <string>
#include <vector>

#include "nhrotor/errors.hpp"

namespace nhrotor {

struct HermitianEigen {
    std::vector<double> values;  // ascending
    Eigen::MatrixXcd vectors;    // orthonormal, one per column, matching order
};

// Dense Hermitian eigendecomposition (divide and conquer). Only the lower
// triangle of `a` is referenced.
inline HermitianEigen hermitian_eig(Eigen::MatrixXcd a) {
    const int n = static_cast<int>(a.rows());
    if (n == 0 || a.cols() != n) {
        throw std::invalid_argument("hermitian_eig: matrix must be square and non-empty");
    }
    HermitianEigen out;
    out.values.resize(n);
    const lapack_int info = LAPACKE_zheevd(
        LAPACK_COL_MAJOR, 'V', 'L', n,
        reinterpret_cast<lapack_complex_double*>(a.data()), n, out.values.data());
    if (info < 0) {
        throw std::invalid_argument("hermitian_eig: illegal argument " + std::to_string(-info));
    }
    if (info > 0) {
        throw ConvergenceError(
            "hermitian_eig: eigensolver failed to converge (info = " + std::to_string(info) + ")",
            "matrix dimension " + std::to_string(n));
    }
    out.vectors = std::move(a);  // overwritten with eigenvectors
    return out;
}

struct GeneralEigen {
    Eigen::VectorXcd values;
    Eigen::MatrixXcd vectors;  // right eigenvectors, unit 2-norm, one per column
};

// Dense non-symmetric eigendecomposition with right eigenvectors.
inline GeneralEigen general_eig(Eigen::MatrixXcd a) {
    const int n = static_cast<int>(a.rows());
    if (n == 0 || a.cols() != n) {
        throw std::invalid_argument("general_eig: matrix must be square and non-empty");
    }
    GeneralEigen out;
    out.values.resize(n);
    out.vectors.resize(n, n);
    std::complex<double> vl_dummy;  // left eigenvectors not requested
    const lapack_int info = LAPACKE_zgeev(
        LAPACK_COL_MAJOR, 'N', 'V', n,
        reinterpret_cast<lapack_complex_double*>(a.data()), n,
        reinterpret_cast<lapack_complex_double*>(out.values.data()),
        reinterpret_cast<lapack_complex_double*>(&vl_dummy), 1,
        reinterpret_cast<lapack_complex_double*>(out.vectors.data()), n);
    if (info < 0) {
        throw std::invalid_argument("general_eig: illegal argument " + std::to_string(-info));
    }
    if (info > 0) {
        // QR iteration stalled; eigenvalues info+1..n would be valid, but the
        // caller asked for the full decomposition, so fail loudly.
        throw ConvergenceError(
            "general_eig: QR iteration failed (info = " + std::to_string(info) + "); only " +
            std::to_string(n - static_cast<int>(info)) + " of " + std::to_string(n) +
            " eigenpairs converged",
            "matrix dimension " + std::to_string(n));
    }
    return out;
}

}  // namespace nhrotor
