#pragma once

#include <cblas.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <cstring>
#include <functional>
#include <memory>
#include <numeric>
#include <sstream>
#include <span>
#include <vector>

#include "nhrotor/classical.hpp"
#include "nhrotor/lapack.hpp"
#include "nhrotor/numeric.hpp"
#include "nhrotor/propagator.hpp"

namespace nhrotor {

// Dense one-period propagator on the flattened two-rotor basis, stored scaled
// by exp(-log_scale) with log_scale = (lambda1+lambda2)/hbar. The scaling
// keeps every entry O(1) even in strongly amplifying regimes; true
// multipliers are exp(log_scale) times the scaled eigenvalues.
struct FloquetMatrix {
    Eigen::MatrixXcd scaled;
    double log_scale = 0.0;
    SystemParams params;
    MomentumGrid grid{2, 1.0};
};

// Builds the dense matrix column by column by propagating basis vectors
// through the split-step period map. Dimension is (2M)^2; refuse anything
// above `cap` (dense eigensolves beyond that are not worth the memory).
inline FloquetMatrix build_floquet_matrix(const SystemParams& params,
                                          const MomentumGrid& grid,
                                          int cap = 4096) {
    const long long dim = static_cast<long long>(grid.size()) * grid.size();
    if (dim > cap) {
        throw std::invalid_argument(
            "build_floquet_matrix: dimension " + std::to_string(dim) +
            " exceeds cap " + std::to_string(cap));
    }
    const PrecomputedPropagator prop(params, grid);
    const double log_scale = params.kick_log_gain();
    const double gain_scale = std::exp(-log_scale);

    FloquetMatrix fm{Eigen::MatrixXcd(dim, dim), log_scale, prop.params(), grid};
    TwoRotorState basis(grid);
    const int d = static_cast<int>(dim);
    for (int j = 0; j < d; ++j) {
        std::fill(basis.amps().begin(), basis.amps().end(), cplx(0.0, 0.0));
        basis.amps()[j] = 1.0;
        basis.set_representation(Representation::momentum);
        apply_period_in_place(basis, prop, gain_scale);
        std::memcpy(fm.scaled.col(j).data(), basis.amps().data(),
                    sizeof(cplx) * static_cast<std::size_t>(d));
    }
    return fm;
}

// Quasienergy eps = eps_r + i*eps_i of a multiplier mu = exp(-i*eps), given
// as a scaled eigenvalue plus the log of the removed scale factor.
// eps_r lies in [-pi, pi); eps_i > 0 means the mode is amplified.
inline std::pair<double, double> quasienergy(cplx mu_scaled, double log_scale = 0.0) {
    const double eps_i = std::log(std::abs(mu_scaled)) + log_scale;
    const double eps_r = -std::arg(mu_scaled);
    return {eps_r, eps_i};
}

struct EigenPair {
    cplx mu;                  // true (unscaled) multiplier
    double eps_r = 0.0;
    double eps_i = 0.0;
    Eigen::VectorXcd vector;  // unit 2-norm
    double residual = 0.0;    // ||A v - mu_scaled v|| on the scaled operator
    bool degenerate = false;  // dominance gap unresolved by the iteration
};

// Full dense spectrum, sorted by descending eps_i (most amplified first;
// ties keep solver order). Residuals are measured on the scaled matrix and
// must satisfy ||A v - mu v|| <= tol * max(1, |mu|).
inline std::vector<EigenPair> eig_full(const FloquetMatrix& fm, double tol = 1e-8) {
    const int d = static_cast<int>(fm.scaled.rows());
    GeneralEigen ge = general_eig(fm.scaled);

    Eigen::MatrixXcd r(d, d);
    const cplx one(1.0, 0.0), zero(0.0, 0.0);
    cblas_zgemm(CblasColMajor, CblasNoTrans, CblasNoTrans, d, d, d, &one,
                fm.scaled.data(), d, ge.vectors.data(), d, &zero, r.data(), d);

    std::vector<EigenPair> pairs(d);
    for (int c = 0; c < d; ++c) {
        r.col(c) -= ge.values[c] * ge.vectors.col(c);
        const double res = r.col(c).norm();
        if (res > tol * std::max(1.0, std::abs(ge.values[c]))) {
            throw ConvergenceError(
                "eig_full: residual " + std::to_string(res) + " for eigenvalue " +
                std::to_string(c) + " exceeds tolerance",
                "matrix dimension " + std::to_string(d));
        }
        EigenPair& pr = pairs[c];
        const auto [er, ei] = quasienergy(ge.values[c], fm.log_scale);
        pr.eps_r = er;
        pr.eps_i = ei;
        pr.mu = std::polar(std::exp(ei), -er);
        pr.vector = ge.vectors.col(c);
        pr.residual = res;
    }
    std::stable_sort(pairs.begin(), pairs.end(),
                     [](const EigenPair& a, const EigenPair& b) { return a.eps_i > b.eps_i; });
    return pairs;
}

// Squared overlap |<a|b>|^2 of the normalized vectors.
inline double fidelity(std::span<const cplx> a, std::span<const cplx> b) {
    if (a.size() != b.size()) {
        throw std::invalid_argument("fidelity: vector lengths differ");
    }
    const double na = stable_norm(a);
    const double nb = stable_norm(b);
    if (!(na > 0.0) || !(nb > 0.0) || !std::isfinite(na) || !std::isfinite(nb)) {
        throw std::invalid_argument("fidelity: vectors must have positive finite norm");
    }
    cplx dot(0.0, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) dot += std::conj(a[i]) * b[i];
    return std::norm(dot) / (na * na * nb * nb);
}

inline double fidelity(const Eigen::VectorXcd& a, std::span<const cplx> b) {
    return fidelity(std::span<const cplx>(a.data(), static_cast<std::size_t>(a.size())), b);
}

// Black-box action of the (scaled) period map on a flattened state vector.
using PeriodAction = std::function<void(std::span<const cplx>, std::span<cplx>)>;

// Wraps the split-step period map as a PeriodAction; gain_scale as in
// apply_period_in_place. The returned callable owns its scratch state.
inline PeriodAction make_period_action(std::shared_ptr<const PrecomputedPropagator> prop,
                                       double gain_scale) {
    auto scratch = std::make_shared<TwoRotorState>(prop->grid());
    return [prop, gain_scale, scratch](std::span<const cplx> in, std::span<cplx> out) {
        auto amps = scratch->amps();
        if (in.size() != amps.size() || out.size() != amps.size()) {
            throw std::invalid_argument("period action: vector length does not match grid");
        }
        std::copy(in.begin(), in.end(), amps.begin());
        scratch->set_representation(Representation::momentum);
        apply_period_in_place(*scratch, *prop, gain_scale);
        std::copy(amps.begin(), amps.end(), out.begin());
    };
}

struct PowerIterOptions {
    double tol = 1e-8;     // residual tolerance, relative to max(1, |mu_scaled|)
    int max_iters = 1000;
    std::uint64_t seed = 0x243f6a8885a308d3ULL;  // start-vector seed
};

// Power iteration for the most-amplified eigenpair of the scaled period map.
// Needs a genuine modulus gap: spectra with unresolved dominance (e.g. the
// unitary case, where every multiplier has modulus one) either fail with the
// Rayleigh-quotient history attached, or, if the quotient has stabilized
// without meeting the residual tolerance, come back flagged `degenerate`.
inline EigenPair dominant_eigenpair(const PeriodAction& apply, int dim, double log_scale,
                                    PowerIterOptions opts = {}) {
    if (dim < 1) throw std::invalid_argument("dominant_eigenpair: dim must be >= 1");
    if (!(opts.tol > 0.0)) throw std::invalid_argument("dominant_eigenpair: tol must be > 0");

    Eigen::VectorXcd v(dim), w(dim);
    for (int i = 0; i < dim; ++i) {
        const double re = 2.0 * detail::uniform01(opts.seed, 2 * static_cast<std::uint64_t>(i)) - 1.0;
        const double im = 2.0 * detail::uniform01(opts.seed, 2 * static_cast<std::uint64_t>(i) + 1) - 1.0;
        v[i] = cplx(re, im);
    }
    v /= v.norm();

    std::vector<cplx> history;
    history.reserve(opts.max_iters);
    auto span_of = [dim](Eigen::VectorXcd& x) {
        return std::span<cplx>(x.data(), static_cast<std::size_t>(dim));
    };

    for (int it = 0; it < opts.max_iters; ++it) {
        apply(span_of(v), span_of(w));
        const cplx mu = v.dot(w);  // Rayleigh quotient (v is unit)
        const double res = (w - mu * v).norm();
        history.push_back(mu);
        if (res <= opts.tol * std::max(1.0, std::abs(mu))) {
            const auto [er, ei] = quasienergy(mu, log_scale);
            return {std::polar(std::exp(ei), -er), er, ei, v, res, false};
        }
        const double wn = w.norm();
        if (!(wn > 0.0) || !std::isfinite(wn)) {
            throw NumericError("dominant_eigenpair: iterate norm vanished or overflowed");
        }
        v = w / wn;
    }

    // Stalled. A stable Rayleigh quotient with a stuck residual means the
    // modulus gap is too small to resolve; report that rather than guessing.
    const int window = 10;
    bool stable = static_cast<int>(history.size()) > window;
    if (stable) {
        const cplx last = history.back();
        for (int i = 2; i <= window; ++i) {
            const cplx prev = history[history.size() - i];
            if (std::abs(prev - last) > 1e-8 * std::max(1.0, std::abs(last))) {
                stable = false;
                break;
            }
        }
        if (stable) {
            const cplx mu = history.back();
            apply(span_of(v), span_of(w));
            const double res = (w - mu * v).norm();
            const auto [er, ei] = quasienergy(mu, log_scale);
            return {std::polar(std::exp(ei), -er), er, ei, v, res, true};
        }
    }

    std::ostringstream diag;
    diag << "last Rayleigh quotients (re, im, abs):\n";
    const std::size_t tail = std::min<std::size_t>(history.size(), 15);
    for (std::size_t i = history.size() - tail; i < history.size(); ++i) {
        diag << "  iter " << i << ": " << history[i].real() << ", " << history[i].imag()
             << ", " << std::abs(history[i]) << "\n";
    }
    throw ConvergenceError(
        "dominant_eigenpair: no convergence after " + std::to_string(opts.max_iters) +
        " iterations; the dominant-modulus gap is unresolved (unitary or "
        "near-degenerate spectrum)",
        diag.str());
}

}  // namespace nhrotor
