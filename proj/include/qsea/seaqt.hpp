#pragma once

// Steepest-entropy-ascent equation of motion for the two-qubit composite:
// locally perceived operators, the per-subsystem dissipation operator in both
// the isolated (Gram-determinant over {I, H}) and reservoir-reduced forms,
// and the full right-hand side
//
//   d(rho)/dt = -i [H, rho] - sum_J (1/tau_J) D_J (x) rho_Jbar        (hbar = 1)

#include "qsea/measures.hpp"
#include "qsea/states.hpp"

namespace qsea {

enum class SeaqtVariant { Isolated, Reservoir };

struct SeaqtParams {
    double tau_a = 1.0;
    double tau_b = 1.0;
    /// Reservoir inverse temperature; used only by the Reservoir variant.
    /// beta_r = 0 is the infinite-temperature reservoir whose canonical state
    /// is maximally mixed.
    double beta_r = 1.0;
    SeaqtVariant variant = SeaqtVariant::Reservoir;
    double kappa = kKernelThreshold;

    double tau(Subsystem j) const { return j == Subsystem::A ? tau_a : tau_b; }
};

/// Locally perceived operator F_J = Tr_Jbar((I_J (x) rho_Jbar) F).
inline C2 locally_perceived(const C4& f, const Density4& rho, Subsystem j) {
    const C2 rho_bar = partial_trace(rho.mat(), other(j));
    const C4 ampliated = (j == Subsystem::A) ? kron(C2::Identity(), rho_bar)
                                             : kron(rho_bar, C2::Identity());
    return partial_trace(ampliated * f, j);
}

/// (F_J, G_J) = 1/2 Tr_J(rho_J {F_J, G_J}); real for Hermitian arguments.
inline double inner_product(const C2& fj, const C2& gj, const C2& rho_j) {
    return 0.5 * (rho_j * (fj * gj + gj * fj)).trace().real();
}

namespace detail {

/// Dissipation operator D_J for the isolated variant, before tensoring.
/// Built from the determinant with operator row {B ln rho perceived, I, H
/// perceived} over the Gram matrix of {I, H}. Falls back to the one-generator
/// form (I only) when requested and the Gram determinant is singular.
inline C2 dissipator_isolated_local(const Density4& rho, const CompositeHamiltonian& h,
                                    Subsystem j, double kappa, bool allow_reduced) {
    const C4 blog = log_on_support<4>(rho.mat(), kappa);
    const C2 f_s = locally_perceived(blog, rho, j);   // entropy-gradient row entry
    const C2 f_h = locally_perceived(h.matrix, rho, j);
    const C2 rho_j = partial_trace(rho.mat(), j);

    const double p_is = inner_product(C2::Identity(), f_s, rho_j);
    const double p_ii = rho_j.trace().real();
    const double p_ih = inner_product(C2::Identity(), f_h, rho_j);
    const double p_hs = inner_product(f_h, f_s, rho_j);
    const double p_hh = inner_product(f_h, f_h, rho_j);

    const double gram = p_ii * p_hh - p_ih * p_ih;
    C2 dtilde;
    if (gram <= 1e-14) {
        if (!allow_reduced) throw DegenerateGramError(gram);
        // one-generator form: numerator | f_s  I ; (I,f_s) (I,I) |, Gram (I,I)
        dtilde = (f_s * p_ii - p_is * C2::Identity()) / p_ii;
    } else {
        // cofactor expansion of the 3x3 determinant along the operator row
        const C2 num = f_s * (p_ii * p_hh - p_ih * p_ih) -
                       C2::Identity() * (p_is * p_hh - p_ih * p_hs) +
                       f_h * (p_is * p_ih - p_ii * p_hs);
        dtilde = num / gram;
    }
    return 0.5 * (rho_j * dtilde + dtilde * rho_j);
}

}  // namespace detail

/// Isolated-variant dissipative contribution D_J (x) rho_Jbar (4x4).
/// Throws DegenerateGramError when the perceived Hamiltonian is linearly
/// dependent on the identity in the local metric; callers integrate via
/// seaqt_rhs, which switches to the reduced one-generator form.
inline C4 dissipator_isolated(const Density4& rho, const CompositeHamiltonian& h, Subsystem j,
                              double kappa = kKernelThreshold) {
    const C2 d = detail::dissipator_isolated_local(rho, h, j, kappa, /*allow_reduced=*/false);
    const C2 rho_bar = partial_trace(rho.mat(), other(j));
    return (j == Subsystem::A) ? kron(d, rho_bar) : kron(rho_bar, d);
}

/// Reservoir-reduced dissipation operator
///   D_J = rho ln rho - beta_R <f> rho + (beta_R/2) {H_J, rho}
/// with beta_R <f> = beta_R Tr(rho H_J) + Tr(rho B ln rho), written so that
/// beta_R = 0 stays finite. Vanishes exactly on the canonical state.
inline C2 dissipator_reservoir(const Density2& rho_j, const C2& h_j, double beta_r,
                               double kappa = kKernelThreshold) {
    const C2 blog = log_on_support<2>(rho_j.mat(), kappa);
    const double beta_f =
        beta_r * (rho_j.mat() * h_j).trace().real() + (rho_j.mat() * blog).trace().real();
    C2 d = rho_j.mat() * blog - beta_f * rho_j.mat() +
           0.5 * beta_r * anticommutator<2>(h_j, rho_j.mat());
    return hermitize<2>(d);
}

/// Full SEAQT right-hand side. Hermitian and traceless by construction.
inline C4 seaqt_rhs(const Density4& rho, const CompositeHamiltonian& h, const SeaqtParams& p) {
    const cxd i_unit(0.0, 1.0);
    C4 rhs = -i_unit * commutator<4>(h.matrix, rho.mat());

    if (p.variant == SeaqtVariant::Isolated) {
        for (Subsystem j : {Subsystem::A, Subsystem::B}) {
            const C2 d = detail::dissipator_isolated_local(rho, h, j, p.kappa,
                                                           /*allow_reduced=*/true);
            const C2 rho_bar = partial_trace(rho.mat(), other(j));
            const C4 term = (j == Subsystem::A) ? kron(d, rho_bar) : kron(rho_bar, d);
            rhs -= term / p.tau(j);
        }
    } else {
        const C2 rho_a = partial_trace(rho.mat(), Subsystem::A);
        const C2 rho_b = partial_trace(rho.mat(), Subsystem::B);
        const C2 d_a = dissipator_reservoir(Density2::unchecked(rho_a), h.local_a, p.beta_r, p.kappa);
        const C2 d_b = dissipator_reservoir(Density2::unchecked(rho_b), h.local_b, p.beta_r, p.kappa);
        rhs -= kron(d_a, rho_b) / p.tau_a;
        rhs -= kron(rho_a, d_b) / p.tau_b;
    }
    return rhs;
}

}  // namespace qsea
