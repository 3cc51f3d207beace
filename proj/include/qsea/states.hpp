#pragma once

// Physical state constructors: Bell-diagonal states, Bell projectors, the
// x-polarized pure product state, Gibbs states, and the non-interacting
// two-qubit Hamiltonian.

#include <algorithm>
#include <array>
#include <cmath>

#include "qsea/matrix.hpp"

namespace qsea {

/// Validated density matrix. Construct via `validated` (checks the three
/// invariants) or `unchecked` (caller guarantees them, e.g. by construction).
template <int N>
class Density {
public:
    static Density validated(const CMat<N>& m, double tol = 1e-10) {
        const double herm = hermiticity_violation<N>(m);
        if (herm > tol) throw NonHermitianError(herm, "Density::validated");
        const double tr_viol = std::abs(m.trace().real() - 1.0) + std::abs(m.trace().imag());
        if (tr_viol > tol) throw NonUnitTraceError(tr_viol);
        const HermitianEig<N> eig = eig_hermitian<N>(hermitize<N>(m));
        const double min_eig = eig.eigenvalues(0);
        if (min_eig < -tol) throw NotPsdError(-min_eig);
        return Density(hermitize<N>(m));
    }

    static Density unchecked(const CMat<N>& m) { return Density(m); }

    const CMat<N>& mat() const { return m_; }

private:
    explicit Density(const CMat<N>& m) : m_(m) {}
    CMat<N> m_;
};

using Density2 = Density<2>;
using Density4 = Density<4>;

template <int N>
Density<N> validate(const CMat<N>& m, double tol = 1e-10) {
    return Density<N>::validated(m, tol);
}

/// Bell-diagonal coefficients (c1, c2, c3).
struct CConfig {
    double c1 = 0.0;
    double c2 = 0.0;
    double c3 = 0.0;

    /// Eigenvalues of the corresponding state in the Bell basis, ordered
    /// {Phi+, Phi-, Psi+, Psi-}.
    std::array<double, 4> eigenvalues() const {
        return {0.25 * (1 + c1 - c2 + c3), 0.25 * (1 - c1 + c2 + c3),
                0.25 * (1 + c1 + c2 - c3), 0.25 * (1 - c1 - c2 - c3)};
    }

    bool valid(double tol = 1e-15) const {
        for (double w : eigenvalues())
            if (w < -tol) return false;
        return std::abs(c1) <= 1 + tol && std::abs(c2) <= 1 + tol && std::abs(c3) <= 1 + tol;
    }
};

/// Baseline coefficients used to reproduce the reference photonic states.
inline constexpr CConfig kBaselineC{0.996, 0.4, -0.4};

/// Non-interacting two-qubit Hamiltonian (eps_A/2) sz (x) I + (eps_B/2) I (x) sz.
struct CompositeHamiltonian {
    double eps_a = 1.0;
    double eps_b = 1.0;
    C2 local_a;
    C2 local_b;
    C4 matrix;

    explicit CompositeHamiltonian(double eps_a_ = 1.0, double eps_b_ = 1.0)
        : eps_a(eps_a_), eps_b(eps_b_) {
        local_a = 0.5 * eps_a * pauli(3);
        local_b = 0.5 * eps_b * pauli(3);
        matrix = kron(local_a, pauli(0)) + kron(pauli(0), local_b);
    }

    const C2& local(Subsystem j) const { return j == Subsystem::A ? local_a : local_b; }
};

inline Density4 bell_diagonal(const CConfig& c) {
    if (!c.valid()) {
        const auto w = c.eigenvalues();
        throw CConfigError("bell_diagonal: coefficients (" + std::to_string(c.c1) + ", " +
                           std::to_string(c.c2) + ", " + std::to_string(c.c3) +
                           ") give negative eigenvalue " +
                           std::to_string(*std::min_element(w.begin(), w.end())));
    }
    C4 m = 0.25 * (C4::Identity() + c.c1 * kron(pauli(1), pauli(1)) +
                   c.c2 * kron(pauli(2), pauli(2)) + c.c3 * kron(pauli(3), pauli(3)));
    return Density4::unchecked(m);
}

/// Bell projectors ordered {Phi+, Phi-, Psi+, Psi-}.
inline std::array<Density4, 4> bell_projectors() {
    C4 phi_p = C4::Zero(), phi_m = C4::Zero(), psi_p = C4::Zero(), psi_m = C4::Zero();
    phi_p(0, 0) = phi_p(3, 3) = 0.5; phi_p(0, 3) = phi_p(3, 0) = 0.5;
    phi_m(0, 0) = phi_m(3, 3) = 0.5; phi_m(0, 3) = phi_m(3, 0) = -0.5;
    psi_p(1, 1) = psi_p(2, 2) = 0.5; psi_p(1, 2) = psi_p(2, 1) = 0.5;
    psi_m(1, 1) = psi_m(2, 2) = 0.5; psi_m(1, 2) = psi_m(2, 1) = -0.5;
    return {Density4::unchecked(phi_p), Density4::unchecked(phi_m),
            Density4::unchecked(psi_p), Density4::unchecked(psi_m)};
}

/// Pure product state with both polarization vectors along +x; zero energy
/// under the composite Hamiltonian for any eps.
inline Density4 pure_x_state() {
    C2 plus_x;
    plus_x << 0.5, 0.5, 0.5, 0.5;
    return Density4::unchecked(kron(plus_x, plus_x));
}

/// Canonical state exp(-beta h)/Z. Shifted by the ground energy before
/// exponentiating so large beta stays finite.
template <int N>
Density<N> gibbs_state(const CMat<N>& h, double beta) {
    const HermitianEig<N> eig = eig_hermitian<N>(h);
    const double w0 = eig.eigenvalues.minCoeff();
    Eigen::Matrix<double, N, 1> pop;
    for (int i = 0; i < N; ++i) pop(i) = std::exp(-beta * (eig.eigenvalues(i) - w0));
    pop /= pop.sum();
    CMat<N> m = CMat<N>::Zero();
    for (int i = 0; i < N; ++i)
        m.noalias() += pop(i) * (eig.eigenvectors.col(i) * eig.eigenvectors.col(i).adjoint());
    return Density<N>::unchecked(hermitize<N>(m));
}

inline Density4 gibbs_state(const CompositeHamiltonian& h, double beta) {
    return gibbs_state<4>(h.matrix, beta);
}

/// 1/2 * sum |eig(rho - sigma)|.
template <int N>
double trace_distance(const CMat<N>& rho, const CMat<N>& sigma) {
    const HermitianEig<N> eig = eig_hermitian<N>(hermitize<N>(rho - sigma));
    return 0.5 * eig.eigenvalues.cwiseAbs().sum();
}

}  // namespace qsea
