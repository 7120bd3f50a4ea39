#pragma once

#include <cblas.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "nhrotor/errors.hpp"
#include "nhrotor/lapack.hpp"
#include "nhrotor/numeric.hpp"
#include "nhrotor/state.hpp"

namespace nhrotor {

// Reduced state of rotor 1 after tracing out rotor 2, in the momentum basis
// (row/column a corresponds to momentum index a - half_width). Hermitian with
// unit trace by construction; normalized by the squared norm of the input so
// non-unit-norm states are accepted.
struct ReducedDensity {
    Eigen::MatrixXcd rho;
    int half_width = 0;
    double hbar = 0.0;
};

inline ReducedDensity reduced_density(const TwoRotorState& psi) {
    if (psi.representation() != Representation::momentum) {
        throw std::invalid_argument("reduced_density: state is not in the momentum representation");
    }
    const double s = stable_norm_squared(psi.amps());
    if (!(s > 0.0) || !std::isfinite(s)) {
        throw NumericError("reduced_density: state norm is zero or non-finite");
    }
    const int d = psi.grid().size();

    // The amplitude buffer is row-major in (n1, n2); viewed column-major it is
    // G = Psi^T, and zherk's (1/s) G^H G fills the lower triangle of conj(rho).
    Eigen::MatrixXcd rho(d, d);
    const double alpha = 1.0 / s;
    cblas_zherk(CblasColMajor, CblasLower, CblasConjTrans, d, d, alpha,
                psi.amps().data(), d, 0.0, rho.data(), d);
    for (int b = 0; b < d; ++b) {
        rho(b, b) = cplx(rho(b, b).real(), 0.0);
        for (int a = b + 1; a < d; ++a) {
            const cplx v = rho(a, b);
            rho(a, b) = std::conj(v);
            rho(b, a) = v;
        }
    }
    return {std::move(rho), psi.grid().half_width(), psi.grid().hbar()};
}

// Momentum-space probability profile of one rotor (particle = 1 or 2).
// prob[i] is the probability of momentum index i - half_width; the profile
// sums to 1 by construction.
struct MomentumMarginal {
    int half_width = 0;
    double hbar = 0.0;
    std::vector<double> prob;

    double momentum(int i) const noexcept { return (i - half_width) * hbar; }
    int size() const noexcept { return static_cast<int>(prob.size()); }
};

inline MomentumMarginal momentum_marginal(const TwoRotorState& psi, int particle) {
    if (particle != 1 && particle != 2) {
        throw std::invalid_argument("momentum_marginal: particle must be 1 or 2");
    }
    if (psi.representation() != Representation::momentum) {
        throw std::invalid_argument("momentum_marginal: state is not in the momentum representation");
    }
    const int n = psi.grid().size();
    const cplx* a = psi.amps().data();
    std::vector<double> raw(n, 0.0);
    if (particle == 1) {
        for (int i = 0; i < n; ++i) {
            const cplx* row = a + static_cast<std::size_t>(i) * n;
            double s = 0.0;
            for (int j = 0; j < n; ++j) s += std::norm(row[j]);
            raw[i] = s;
        }
    } else {
        for (int i = 0; i < n; ++i) {
            const cplx* row = a + static_cast<std::size_t>(i) * n;
            for (int j = 0; j < n; ++j) raw[j] += std::norm(row[j]);
        }
    }
    const double total = pairwise_sum(raw);
    if (!(total > 0.0) || !std::isfinite(total)) {
        throw NumericError("momentum_marginal: state norm is zero or non-finite");
    }
    MomentumMarginal marg{psi.grid().half_width(), psi.grid().hbar(), std::move(raw)};
    for (double& p : marg.prob) p /= total;
    return marg;
}

// <p1^2> over the rotor-1 marginal, in physical momentum units (p = n*hbar).
inline double mean_p1_squared(const TwoRotorState& psi) {
    const MomentumMarginal marg = momentum_marginal(psi, 1);
    std::vector<double> terms(marg.prob.size());
    for (int i = 0; i < marg.size(); ++i) {
        const double p = marg.momentum(i);
        terms[i] = p * p * marg.prob[i];
    }
    return pairwise_sum(terms);
}

inline double mean_p1_squared(const ReducedDensity& red) {
    const int d = static_cast<int>(red.rho.rows());
    std::vector<double> terms(d);
    for (int i = 0; i < d; ++i) {
        const double p = (i - red.half_width) * red.hbar;
        terms[i] = p * p * red.rho(i, i).real();
    }
    return pairwise_sum(terms);
}

// Linear entropy S = 1 - Tr[rho^2]; 0 for a pure reduced state, approaching
// 1 - 1/d for the maximally mixed one.
inline double linear_entropy(const ReducedDensity& red) {
    return 1.0 - red.rho.squaredNorm();
}

// Eigenvalues of the reduced density, sorted descending (ties keep ascending
// solver order). source_index maps each entry back to the solver's ascending
// output, so eigenvectors can be recovered from a separate decomposition.
struct RhoSpectrum {
    std::vector<double> values;
    std::vector<int> source_index;
    double max_residual = 0.0;  // max over pairs of ||rho v - w v||
};

inline RhoSpectrum rho_spectrum(const ReducedDensity& red) {
    const int d = static_cast<int>(red.rho.rows());
    HermitianEigen eig = hermitian_eig(red.rho);

    const double floor = -1e-12;
    const double min_val = *std::min_element(eig.values.begin(), eig.values.end());
    if (min_val < floor) {
        throw NumericError("rho_spectrum: eigenvalue " + std::to_string(min_val) +
                           " below the positivity floor " + std::to_string(floor) +
                           "; input is not a density matrix");
    }

    // Residual R = rho V - V diag(w), checked per column.
    Eigen::MatrixXcd r(d, d);
    const cplx one(1.0, 0.0), zero(0.0, 0.0);
    cblas_zgemm(CblasColMajor, CblasNoTrans, CblasNoTrans, d, d, d, &one,
                red.rho.data(), d, eig.vectors.data(), d, &zero, r.data(), d);
    double max_res = 0.0;
    for (int c = 0; c < d; ++c) {
        r.col(c) -= eig.values[static_cast<std::size_t>(c)] * eig.vectors.col(c);
        max_res = std::max(max_res, r.col(c).norm());
    }
    if (max_res > 1e-10) {
        throw ConvergenceError("rho_spectrum: eigenpair residual " + std::to_string(max_res) +
                               " exceeds 1e-10", "matrix dimension " + std::to_string(d));
    }

    RhoSpectrum out;
    out.max_residual = max_res;
    out.source_index.resize(d);
    std::iota(out.source_index.begin(), out.source_index.end(), 0);
    std::stable_sort(out.source_index.begin(), out.source_index.end(),
                     [&](int a, int b) { return eig.values[a] > eig.values[b]; });
    out.values.reserve(d);
    for (int idx : out.source_index) {
        out.values.push_back(std::clamp(eig.values[static_cast<std::size_t>(idx)], 0.0, 1.0));
    }
    return out;
}

}  // namespace nhrotor
