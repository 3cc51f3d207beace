#pragma once

// Dense complex matrix kernel for the 2x2 / 4x4 Hermitian operators used
// throughout: Pauli algebra, Kronecker products, partial traces, spectral
// decomposition and matrix functions restricted to the support of a
// positive-semidefinite operator.

#include <array>
#include <cmath>
#include <complex>
#include <stdexcept>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "qsea/errors.hpp"

namespace qsea {

using cxd = std::complex<double>;

template <int N>
using CMat = Eigen::Matrix<cxd, N, N>;

using C2 = CMat<2>;
using C4 = CMat<4>;

/// Kernel threshold for support projections: well above double-precision
/// eigensolver noise, far below the smallest physical eigenvalue handled
/// (1e-3 at c1 = 0.996).
inline constexpr double kKernelThreshold = 1e-12;

enum class Subsystem { A, B };

inline Subsystem other(Subsystem j) { return j == Subsystem::A ? Subsystem::B : Subsystem::A; }

template <int N>
double max_abs(const CMat<N>& m) {
    return m.cwiseAbs().maxCoeff();
}

template <int N>
double hermiticity_violation(const CMat<N>& m) {
    return max_abs<N>(m - m.adjoint());
}

template <int N>
CMat<N> hermitize(const CMat<N>& m) {
    return 0.5 * (m + m.adjoint().eval());
}

template <int N>
double trace_real(const CMat<N>& m) {
    return m.trace().real();
}

/// Pauli matrices, index 0 = identity, 1..3 = x, y, z.
inline C2 pauli(int index) {
    C2 s = C2::Zero();
    switch (index) {
        case 0: s(0, 0) = 1.0; s(1, 1) = 1.0; break;
        case 1: s(0, 1) = 1.0; s(1, 0) = 1.0; break;
        case 2: s(0, 1) = cxd(0.0, -1.0); s(1, 0) = cxd(0.0, 1.0); break;
        case 3: s(0, 0) = 1.0; s(1, 1) = -1.0; break;
        default: throw std::out_of_range("pauli index must be 0..3");
    }
    return s;
}

/// Kronecker product of two single-qubit operators, subsystem A first.
inline C4 kron(const C2& a, const C2& b) {
    C4 out;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            out.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
    return out;
}

/// Partial trace of a two-qubit operator onto the kept subsystem.
inline C2 partial_trace(const C4& m, Subsystem keep) {
    C2 out = C2::Zero();
    if (keep == Subsystem::A) {
        for (int a = 0; a < 2; ++a)
            for (int a2 = 0; a2 < 2; ++a2)
                for (int b = 0; b < 2; ++b)
                    out(a, a2) += m(2 * a + b, 2 * a2 + b);
    } else {
        for (int b = 0; b < 2; ++b)
            for (int b2 = 0; b2 < 2; ++b2)
                for (int a = 0; a < 2; ++a)
                    out(b, b2) += m(2 * a + b, 2 * a + b2);
    }
    return out;
}

template <int N>
struct HermitianEig {
    Eigen::Matrix<double, N, 1> eigenvalues;  // ascending
    CMat<N> eigenvectors;                     // orthonormal columns
};

/// Spectral decomposition of a Hermitian matrix. Eigenvalues ascending;
/// degenerate-subspace vectors follow Eigen's deterministic reduction, so
/// identical inputs always produce identical output.
template <int N>
HermitianEig<N> eig_hermitian(const CMat<N>& m) {
    const double viol = hermiticity_violation<N>(m);
    if (viol > 1e-10) throw NonHermitianError(viol, "eig_hermitian");
    Eigen::SelfAdjointEigenSolver<CMat<N>> solver(hermitize<N>(m));
    if (solver.info() != Eigen::Success) throw Error("eig_hermitian: solver failed");
    return {solver.eigenvalues(), solver.eigenvectors()};
}

/// f(m) = sum_{lambda > kappa} f(lambda) |v><v|.  Eigenvalues at or below
/// kappa (including small negatives from roundoff) are treated as kernel and
/// map to 0, which realizes B ln(rho) and the supported square root.
template <int N, class Func>
CMat<N> matrix_func_on_support(const CMat<N>& m, Func&& f, double kappa = kKernelThreshold) {
    const HermitianEig<N> eig = eig_hermitian<N>(m);
    CMat<N> out = CMat<N>::Zero();
    for (int i = 0; i < N; ++i) {
        const double w = eig.eigenvalues(i);
        if (w <= kappa) continue;
        const double fw = f(w);
        if (!std::isfinite(fw))
            throw DomainError("matrix_func_on_support: f undefined on eigenvalue " + std::to_string(w));
        out.noalias() += fw * (eig.eigenvectors.col(i) * eig.eigenvectors.col(i).adjoint());
    }
    return out;
}

template <int N>
CMat<N> log_on_support(const CMat<N>& m, double kappa = kKernelThreshold) {
    return matrix_func_on_support<N>(m, [](double w) { return std::log(w); }, kappa);
}

template <int N>
CMat<N> sqrt_psd(const CMat<N>& m, double kappa = kKernelThreshold) {
    return matrix_func_on_support<N>(m, [](double w) { return std::sqrt(w); }, kappa);
}

template <int N>
struct SupportProjector {
    CMat<N> matrix;
    int rank = 0;
    double kappa = kKernelThreshold;
};

/// Projector onto the range of a PSD matrix: B = I - P_ker.
template <int N>
SupportProjector<N> range_projector(const CMat<N>& m, double kappa = kKernelThreshold) {
    const HermitianEig<N> eig = eig_hermitian<N>(m);
    SupportProjector<N> proj;
    proj.matrix = CMat<N>::Zero();
    proj.kappa = kappa;
    for (int i = 0; i < N; ++i) {
        if (eig.eigenvalues(i) <= kappa) continue;
        proj.matrix.noalias() += eig.eigenvectors.col(i) * eig.eigenvectors.col(i).adjoint();
        ++proj.rank;
    }
    return proj;
}

template <int N>
CMat<N> commutator(const CMat<N>& a, const CMat<N>& b) {
    return a * b - b * a;
}

template <int N>
CMat<N> anticommutator(const CMat<N>& a, const CMat<N>& b) {
    return a * b + b * a;
}

}  // namespace qsea
