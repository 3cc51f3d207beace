#pragma once

// Scalar functionals on two-qubit states: Wootters concurrence, maximum CHSH
// expectation, von Neumann entropy on the support, relative entropy, energy,
// purity, linear entropy, and the Pearson coefficient used by the batch
// statistics.

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "qsea/states.hpp"

namespace qsea {

/// Correlation matrix t_ij = Tr(rho (sigma_i (x) sigma_j)), i,j in {x,y,z}.
inline Eigen::Matrix3d correlation_matrix(const Density4& rho) {
    Eigen::Matrix3d t;
    for (int i = 1; i <= 3; ++i)
        for (int j = 1; j <= 3; ++j)
            t(i - 1, j - 1) = (rho.mat() * kron(pauli(i), pauli(j))).trace().real();
    return t;
}

/// Wootters concurrence E(rho) = max(0, l1 - l2 - l3 - l4) where the l_i are
/// the decreasing square roots of the eigenvalues of rho * rho_tilde,
/// rho_tilde = (sy (x) sy) conj(rho) (sy (x) sy).
inline double concurrence(const Density4& rho) {
    const C4 yy = kron(pauli(2), pauli(2));
    const C4 rho_tilde = yy * rho.mat().conjugate() * yy;
    Eigen::ComplexEigenSolver<C4> solver(rho.mat() * rho_tilde, /*computeEigenvectors=*/false);
    std::array<double, 4> l;
    for (int i = 0; i < 4; ++i) l[i] = std::sqrt(std::max(0.0, solver.eigenvalues()(i).real()));
    std::sort(l.begin(), l.end(), std::greater<>());
    return std::clamp(l[0] - l[1] - l[2] - l[3], 0.0, 1.0);
}

/// Maximum CHSH expectation 2 sqrt(h1 + h2), h1 and h2 the two largest
/// eigenvalues of T^t T.
inline double chsh_max(const Density4& rho) {
    const Eigen::Matrix3d t = correlation_matrix(rho);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(t.transpose() * t);
    const auto h = solver.eigenvalues();  // ascending
    return 2.0 * std::sqrt(std::max(0.0, h(1) + h(2)));
}

/// Von Neumann entropy -Tr(rho B ln rho) in nats; kernel eigenvalues excluded.
template <int N>
double entropy(const Density<N>& rho, double kappa = kKernelThreshold) {
    const HermitianEig<N> eig = eig_hermitian<N>(rho.mat());
    double s = 0.0;
    for (int i = 0; i < N; ++i) {
        const double w = eig.eigenvalues(i);
        if (w > kappa) s -= w * std::log(w);
    }
    return s;
}

/// Relative entropy D(rho || rho0) = Tr rho ln rho - Tr rho ln rho0.
/// Returns +infinity when the support of rho leaks out of the support of
/// rho0 by more than kappa.
template <int N>
double relative_entropy(const Density<N>& rho, const Density<N>& rho0,
                        double kappa = kKernelThreshold) {
    const HermitianEig<N> ref = eig_hermitian<N>(rho0.mat());
    double leak = 1.0;   // Tr(rho (I - B0)) computed as 1 - sum of support weights
    double cross = 0.0;  // Tr(rho B0 ln rho0)
    for (int i = 0; i < N; ++i) {
        const double w0 = ref.eigenvalues(i);
        if (w0 <= kappa) continue;
        const double weight =
            (ref.eigenvectors.col(i).adjoint() * rho.mat() * ref.eigenvectors.col(i))(0).real();
        leak -= weight;
        cross += weight * std::log(w0);
    }
    if (leak > kappa) return std::numeric_limits<double>::infinity();
    return std::max(0.0, -entropy<N>(rho, kappa) - cross);
}

template <int N>
double purity(const Density<N>& rho) {
    return (rho.mat() * rho.mat()).trace().real();
}

template <int N>
double linear_entropy(const Density<N>& rho) {
    return 1.0 - purity<N>(rho);
}

inline double energy(const Density4& rho, const CompositeHamiltonian& h) {
    return (rho.mat() * h.matrix).trace().real();
}

template <int N>
double energy(const Density<N>& rho, const CMat<N>& h) {
    return (rho.mat() * h).trace().real();
}

/// Pearson correlation coefficient of two equally long nonconstant sequences.
inline double pearson(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size() || xs.size() < 2)
        throw Error("pearson: sequences must have equal length >= 2");
    const double n = static_cast<double>(xs.size());
    double mx = 0.0, my = 0.0;
    for (size_t i = 0; i < xs.size(); ++i) { mx += xs[i]; my += ys[i]; }
    mx /= n; my /= n;
    double cov = 0.0, vx = 0.0, vy = 0.0;
    for (size_t i = 0; i < xs.size(); ++i) {
        const double dx = xs[i] - mx, dy = ys[i] - my;
        cov += dx * dy; vx += dx * dx; vy += dy * dy;
    }
    if (vx == 0.0) throw ZeroVarianceError("first");
    if (vy == 0.0) throw ZeroVarianceError("second");
    return std::clamp(cov / std::sqrt(vx * vy), -1.0, 1.0);
}

/// Everything evaluated on one state. relative_entropy may be +infinity.
struct MeasureSet {
    double concurrence = 0.0;
    double chsh_max = 0.0;
    double entropy = 0.0;
    double energy = 0.0;
    double relative_entropy = 0.0;
    double linear_entropy = 0.0;
    double purity = 0.0;
};

inline MeasureSet measure_all(const Density4& rho, const CompositeHamiltonian& h,
                              const Density4& reference, double kappa = kKernelThreshold) {
    MeasureSet m;
    m.concurrence = concurrence(rho);
    m.chsh_max = chsh_max(rho);
    m.entropy = entropy<4>(rho, kappa);
    m.energy = energy(rho, h);
    m.relative_entropy = relative_entropy<4>(rho, reference, kappa);
    m.purity = purity<4>(rho);
    m.linear_entropy = 1.0 - m.purity;
    return m;
}

}  // namespace qsea
