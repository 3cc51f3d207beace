#pragma once

// Lindblad master equation with projector jump operators. The global mode
// composes the single-qubit projectors over both subsystems,
// L_i = L_i^A (x) L_i^B; a local (one-sided) mode is available for
// sensitivity studies but is not part of the reproduction scenarios.

#include <vector>

#include "qsea/measures.hpp"
#include "qsea/states.hpp"

namespace qsea {

enum class JumpMode { Global, Local };

struct LindbladParams {
    double gamma = 1.0;  // interaction strength
    JumpMode jump_mode = JumpMode::Global;
    double kappa = kKernelThreshold;
};

/// L1 = |1><1|, L2 = |0><0| per qubit; Global -> {L1 (x) L1, L2 (x) L2}.
inline std::vector<C4> jump_operators(JumpMode mode) {
    C2 l1 = C2::Zero(), l2 = C2::Zero();
    l1(1, 1) = 1.0;
    l2(0, 0) = 1.0;
    if (mode == JumpMode::Global) return {kron(l1, l1), kron(l2, l2)};
    const C2 id = C2::Identity();
    return {kron(l1, id), kron(id, l1), kron(l2, id), kron(id, l2)};
}

/// Dissipator sum_m L_m rho L_m^dag - 1/2 {L_m^dag L_m, rho}.
inline C4 lindbladian(const Density4& rho, const std::vector<C4>& ops) {
    C4 out = C4::Zero();
    for (const C4& l : ops) {
        const C4 ldl = l.adjoint() * l;
        out += l * rho.mat() * l.adjoint() - 0.5 * anticommutator<4>(ldl, rho.mat());
    }
    return out;
}

inline C4 lindblad_rhs(const Density4& rho, const CompositeHamiltonian& h,
                       const LindbladParams& p, const std::vector<C4>& ops) {
    const cxd i_unit(0.0, 1.0);
    return -i_unit * commutator<4>(h.matrix, rho.mat()) + p.gamma * lindbladian(rho, ops);
}

inline C4 lindblad_rhs(const Density4& rho, const CompositeHamiltonian& h,
                       const LindbladParams& p) {
    return lindblad_rhs(rho, h, p, jump_operators(p.jump_mode));
}

/// Entropy rate along the Lindblad flow, evaluated with ln on the support:
/// dS/dt = -gamma Tr(L(rho) B ln rho). The symplectic term contributes
/// nothing, so this equals the finite-difference rate of the von Neumann
/// entropy.
inline double lindblad_entropy_rate(const Density4& rho, const LindbladParams& p,
                                    double kappa = kKernelThreshold) {
    const C4 diss = lindbladian(rho, jump_operators(p.jump_mode));
    const C4 blog = log_on_support<4>(rho.mat(), kappa);
    return -p.gamma * (diss * blog).trace().real();
}

}  // namespace qsea
