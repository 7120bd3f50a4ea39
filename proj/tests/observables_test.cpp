#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <complex>

#include "nhrotor/observables.hpp"
#include "support.hpp"

using namespace nhrotor;

namespace {

// Partial trace by the definition: rho[a,b] = sum_m psi[a,m] conj(psi[b,m]) / s.
Eigen::MatrixXcd naive_reduced(const TwoRotorState& psi) {
    const int m = psi.grid().half_width();
    const int n = psi.grid().size();
    double s = 0.0;
    for (const cplx& z : psi.amps()) s += std::norm(z);
    Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(n, n);
    for (int a = -m; a < m; ++a) {
        for (int b = -m; b < m; ++b) {
            cplx acc(0.0, 0.0);
            for (int q = -m; q < m; ++q) acc += psi.at(a, q) * std::conj(psi.at(b, q));
            rho(a + m, b + m) = acc / s;
        }
    }
    return rho;
}

TwoRotorState product_state(const MomentumGrid& g, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    const int n = g.size();
    Eigen::VectorXcd u(n), v(n);
    for (int i = 0; i < n; ++i) {
        u[i] = cplx(dist(rng), dist(rng));
        v[i] = cplx(dist(rng), dist(rng));
    }
    u.normalize();
    v.normalize();
    TwoRotorState psi(g);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            psi.amps()[static_cast<std::size_t>(i) * n + j] = u[i] * v[j];
        }
    }
    return psi;
}

}  // namespace

TEST(ReducedDensity, MatchesNaivePartialTrace) {
    const auto g = make_grid(4, 0.06);
    const auto psi = testsupport::random_state(g, 31);
    const auto red = reduced_density(psi);
    const auto naive = naive_reduced(psi);
    EXPECT_LT((red.rho - naive).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(ReducedDensity, ExactlyHermitianUnitTrace) {
    const auto g = make_grid(16, 0.06);
    const auto red = reduced_density(testsupport::random_state(g, 8));
    EXPECT_EQ((red.rho - red.rho.adjoint()).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_NEAR(red.rho.trace().real(), 1.0, 1e-13);
    EXPECT_EQ(red.rho.trace().imag(), 0.0);
}

TEST(ReducedDensity, NormCorrectionHandlesUnnormalizedStates) {
    const auto g = make_grid(8, 0.06);
    auto psi = testsupport::random_state(g, 12);
    const auto red1 = reduced_density(psi);
    for (cplx& z : psi.amps()) z *= 7.0;
    const auto red2 = reduced_density(psi);
    EXPECT_LT((red1.rho - red2.rho).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(ReducedDensity, GlobalPhaseInvariant) {
    const auto g = make_grid(8, 0.06);
    auto psi = testsupport::random_state(g, 13);
    const auto red1 = reduced_density(psi);
    const cplx phase = std::polar(1.0, 1.234);
    for (cplx& z : psi.amps()) z *= phase;
    const auto red2 = reduced_density(psi);
    EXPECT_LT((red1.rho - red2.rho).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(ReducedDensity, ProductStateIsPure) {
    const auto g = make_grid(8, 0.06);
    const auto red = reduced_density(product_state(g, 99));
    EXPECT_NEAR(linear_entropy(red), 0.0, 1e-12);
    const auto spec = rho_spectrum(red);
    EXPECT_NEAR(spec.values[0], 1.0, 1e-12);
}

TEST(ReducedDensity, BellPairEntropyExact) {
    // (|0,0> + |1,1>)/sqrt(2): two Schmidt weights of 1/2, S = 1/2.
    const auto g = make_grid(4, 0.06);
    TwoRotorState psi(g);
    psi.at(0, 0) = 1.0 / std::sqrt(2.0);
    psi.at(1, 1) = 1.0 / std::sqrt(2.0);
    const auto red = reduced_density(psi);
    EXPECT_NEAR(linear_entropy(red), 0.5, 1e-14);
    const auto spec = rho_spectrum(red);
    EXPECT_NEAR(spec.values[0], 0.5, 1e-14);
    EXPECT_NEAR(spec.values[1], 0.5, 1e-14);
    EXPECT_NEAR(spec.values[2], 0.0, 1e-14);
}

TEST(ReducedDensity, MaximallyMixedEntropy) {
    // sum_n |n,n>/sqrt(d) traces to I/d: S = 1 - 1/d exactly.
    const auto g = make_grid(4, 0.06);
    const int d = g.size();
    TwoRotorState psi(g);
    for (int n = -4; n < 4; ++n) psi.at(n, n) = 1.0 / std::sqrt(static_cast<double>(d));
    const auto red = reduced_density(psi);
    EXPECT_NEAR(linear_entropy(red), 1.0 - 1.0 / d, 1e-13);
}

TEST(ReducedDensity, ZeroStateRejected) {
    TwoRotorState psi(make_grid(4, 0.06));
    EXPECT_THROW(reduced_density(psi), NumericError);
}

TEST(Marginal, MatchesNaiveAndSumsToOne) {
    const auto g = make_grid(8, 0.06);
    const auto psi = testsupport::random_state(g, 41);
    const auto m1 = momentum_marginal(psi, 1);
    const auto m2 = momentum_marginal(psi, 2);
    double sum1 = 0.0, sum2 = 0.0;
    for (int i = 0; i < g.size(); ++i) {
        double row = 0.0, col = 0.0;
        for (int j = 0; j < g.size(); ++j) {
            row += std::norm(psi.amps()[static_cast<std::size_t>(i) * g.size() + j]);
            col += std::norm(psi.amps()[static_cast<std::size_t>(j) * g.size() + i]);
        }
        EXPECT_NEAR(m1.prob[i], row, 1e-14);
        EXPECT_NEAR(m2.prob[i], col, 1e-14);
        sum1 += m1.prob[i];
        sum2 += m2.prob[i];
    }
    EXPECT_NEAR(sum1, 1.0, 1e-12);
    EXPECT_NEAR(sum2, 1.0, 1e-12);
}

TEST(Marginal, DistinguishesParticles) {
    const auto g = make_grid(4, 0.06);
    TwoRotorState psi(g);
    psi.at(2, -3) = 1.0;  // rotor 1 at n=2, rotor 2 at n=-3
    const auto m1 = momentum_marginal(psi, 1);
    const auto m2 = momentum_marginal(psi, 2);
    EXPECT_DOUBLE_EQ(m1.prob[g.row_of(2)], 1.0);
    EXPECT_DOUBLE_EQ(m2.prob[g.row_of(-3)], 1.0);
    EXPECT_DOUBLE_EQ(m1.momentum(g.row_of(2)), 2 * 0.06);
}

TEST(Marginal, RejectsBadParticleIndex) {
    const auto psi = ground_product_state(make_grid(4, 0.06));
    EXPECT_THROW(momentum_marginal(psi, 0), std::invalid_argument);
    EXPECT_THROW(momentum_marginal(psi, 3), std::invalid_argument);
}

TEST(MeanP1Squared, MatchesDirectSum) {
    const auto g = make_grid(8, 0.06);
    const auto psi = testsupport::random_state(g, 47);
    double expect = 0.0;
    for (int n1 = -8; n1 < 8; ++n1) {
        for (int n2 = -8; n2 < 8; ++n2) {
            expect += std::norm(psi.at(n1, n2)) * (n1 * 0.06) * (n1 * 0.06);
        }
    }
    EXPECT_NEAR(mean_p1_squared(psi), expect, 1e-13);
    EXPECT_NEAR(mean_p1_squared(reduced_density(psi)), expect, 1e-13);
}

TEST(RhoSpectrum, SortedSumsToOneWithinBounds) {
    const auto g = make_grid(16, 0.06);
    const auto spec = rho_spectrum(reduced_density(testsupport::random_state(g, 3)));
    EXPECT_TRUE(std::is_sorted(spec.values.begin(), spec.values.end(), std::greater<>()));
    double sum = 0.0;
    for (double v : spec.values) {
        EXPECT_GE(v, 0.0);
        EXPECT_LE(v, 1.0);
        sum += v;
    }
    EXPECT_NEAR(sum, 1.0, 1e-10);
    EXPECT_LE(spec.max_residual, 1e-10);
    // source_index is a permutation of 0..d-1.
    auto idx = spec.source_index;
    std::sort(idx.begin(), idx.end());
    for (int i = 0; i < static_cast<int>(idx.size()); ++i) EXPECT_EQ(idx[i], i);
}

TEST(RhoSpectrum, EntropyConsistentWithEigenvalues) {
    const auto g = make_grid(16, 0.06);
    const auto red = reduced_density(testsupport::random_state(g, 77));
    const auto spec = rho_spectrum(red);
    double purity = 0.0;
    for (double v : spec.values) purity += v * v;
    EXPECT_NEAR(linear_entropy(red), 1.0 - purity, 1e-10);
}

TEST(RhoSpectrum, RejectsNonDensityInput) {
    ReducedDensity red;
    red.rho = -Eigen::MatrixXcd::Identity(8, 8);  // eigenvalues -1
    red.half_width = 4;
    red.hbar = 0.06;
    EXPECT_THROW(rho_spectrum(red), NumericError);
}
