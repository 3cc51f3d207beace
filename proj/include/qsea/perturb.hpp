#pragma once

// Initial-state generators. The weighted-average method mixes the
// Bell-diagonal state toward the x-polarized pure product state. The general
// bipartite method perturbs the square root of the state with a GUE draw in
// the Pauli-product basis and restores unit trace, energy, and purity by
// solving for three Lagrange multipliers with a damped multi-start Newton
// iteration; of the admissible roots, the one whose concurrence is closest
// to the unperturbed state is kept.

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "qsea/measures.hpp"
#include "qsea/states.hpp"

namespace qsea {

inline Density4 weighted_average(const Density4& rho0, double zeta) {
    if (!(zeta >= 0.0 && zeta <= 1.0))
        throw Error("weighted_average: zeta must lie in [0, 1], got " + std::to_string(zeta));
    return Density4::unchecked(zeta * rho0.mat() + (1.0 - zeta) * pure_x_state().mat());
}

/// Hermitian GUE draw with per-component scale sigma, i.e. the ensemble of
/// (A + A^dag)/sqrt(2) with A entries sigma (u + iv), u, v standard normal.
/// In the Pauli-product basis this is 16 independent real coefficients
/// eta_ij ~ Normal(0, 2 sigma^2); the assembled matrix
/// (1/2) sum eta_ij sigma_i (x) sigma_j is Hermitian because each basis
/// element is.
struct GuePerturbation {
    Eigen::Matrix4d eta = Eigen::Matrix4d::Zero();
    double sigma = 0.0;
    std::uint64_t seed = 0;

    C4 matrix() const {
        C4 m = C4::Zero();
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) m += 0.5 * eta(i, j) * kron(pauli(i), pauli(j));
        return m;
    }

    /// Standard deviation of each eta_ij for a given ensemble scale.
    static double coefficient_sigma(double sigma) { return sigma * std::sqrt(2.0); }
};

inline GuePerturbation sample_gue(double sigma, std::uint64_t seed) {
    GuePerturbation g;
    g.sigma = sigma;
    g.seed = seed;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> dist(0.0, GuePerturbation::coefficient_sigma(sigma));
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) g.eta(i, j) = dist(rng);
    return g;
}

/// gamma_eps = sqrt(rho0) + assembled perturbation.
inline C4 perturb_sqrt(const Density4& rho0, const GuePerturbation& eta,
                       double kappa = kKernelThreshold) {
    return sqrt_psd<4>(rho0.mat(), kappa) + eta.matrix();
}

/// Fixed data of one constraint solve: the perturbed square root, the
/// symmetrized gradient directions {G_i(gamma_eps), gamma_eps} for
/// G = {I, H, -(2 gamma^2 - I)}, and the conserved targets of rho0.
struct ConstraintSystem {
    C4 gamma_eps;
    std::array<C4, 3> gradients;
    double target_energy = 0.0;
    double target_purity = 0.0;
    C4 hamiltonian;

    ConstraintSystem(const C4& geps, const CompositeHamiltonian& h, const Density4& rho0)
        : gamma_eps(geps) {
        const C4 geps2 = geps * geps;
        gradients[0] = 2.0 * geps;
        gradients[1] = h.matrix * geps + geps * h.matrix;
        gradients[2] = 2.0 * geps - 4.0 * (geps2 * geps);
        target_energy = (rho0.mat() * h.matrix).trace().real();
        target_purity = (rho0.mat() * rho0.mat()).trace().real();
        hamiltonian = h.matrix;
    }

    C4 gamma_r(const Eigen::Vector3d& lambda) const {
        return gamma_eps - lambda(0) * gradients[0] - lambda(1) * gradients[1] -
               lambda(2) * gradients[2];
    }
};

/// Residuals of the three conservation constraints at multipliers lambda:
///   Tr(gamma_r^2) - 1,  Tr(gamma_r^2 H) - Tr(rho0 H),  Tr(gamma_r^4) - Tr(rho0^2).
/// The third is the support-projected form of the linear-entropy constraint.
inline Eigen::Vector3d constraint_residuals(const Eigen::Vector3d& lambda,
                                            const ConstraintSystem& sys) {
    const C4 g = sys.gamma_r(lambda);
    const C4 g2 = g * g;
    return {g2.trace().real() - 1.0,
            (g2 * sys.hamiltonian).trace().real() - sys.target_energy,
            (g2 * g2).trace().real() - sys.target_purity};
}

struct RootResult {
    Eigen::Vector3d lambda;
    Eigen::Vector3d residuals;
    double residual_norm = 0.0;  // max-abs
};

namespace detail {

/// Damped Newton from one start; analytic Jacobian. Returns nullopt if the
/// iteration fails to reach the residual tolerance.
inline std::optional<RootResult> newton_root(const ConstraintSystem& sys, Eigen::Vector3d lambda,
                                             double tol, int max_iter) {
    Eigen::Vector3d r = constraint_residuals(lambda, sys);
    for (int iter = 0; iter < max_iter; ++iter) {
        if (r.cwiseAbs().maxCoeff() <= tol)
            return RootResult{lambda, r, r.cwiseAbs().maxCoeff()};
        const C4 g = sys.gamma_r(lambda);
        const C4 g2 = g * g;
        const C4 gh = g * sys.hamiltonian + sys.hamiltonian * g;
        const C4 g3 = g2 * g;
        Eigen::Matrix3d jac;
        for (int i = 0; i < 3; ++i) {
            const C4& m = sys.gradients[i];
            jac(0, i) = -2.0 * (g * m).trace().real();
            jac(1, i) = -(gh * m).trace().real();
            jac(2, i) = -4.0 * (g3 * m).trace().real();
        }
        const Eigen::FullPivLU<Eigen::Matrix3d> lu(jac);
        if (!lu.isInvertible()) return std::nullopt;
        const Eigen::Vector3d step = lu.solve(r);

        double damp = 1.0;
        const double r_norm = r.norm();
        Eigen::Vector3d next = lambda - damp * step;
        Eigen::Vector3d r_next = constraint_residuals(next, sys);
        int halvings = 0;
        while (r_next.norm() > r_norm && halvings < 30) {
            damp *= 0.5;
            next = lambda - damp * step;
            r_next = constraint_residuals(next, sys);
            ++halvings;
        }
        if (r_next.norm() > r_norm) return std::nullopt;  // stalled
        lambda = next;
        r = r_next;
    }
    if (r.cwiseAbs().maxCoeff() <= tol) return RootResult{lambda, r, r.cwiseAbs().maxCoeff()};
    return std::nullopt;
}

}  // namespace detail

struct SolveOptions {
    double residual_tol = 1e-10;
    double dedup_distance = 1e-6;
    int max_iterations = 200;
};

/// Multi-start Newton over the {-sigma, 0, +sigma}^3 grid; converged roots
/// deduplicated and ordered by multiplier norm (smallest first).
inline std::vector<RootResult> solve_constraints(const ConstraintSystem& sys, double sigma,
                                                 const SolveOptions& opts = {}) {
    std::vector<RootResult> roots;
    for (int a = -1; a <= 1; ++a)
        for (int b = -1; b <= 1; ++b)
            for (int c = -1; c <= 1; ++c) {
                const Eigen::Vector3d start(sigma * a, sigma * b, sigma * c);
                const auto res =
                    detail::newton_root(sys, start, opts.residual_tol, opts.max_iterations);
                if (!res) continue;
                bool duplicate = false;
                for (const RootResult& known : roots)
                    if ((known.lambda - res->lambda).norm() < opts.dedup_distance) {
                        duplicate = true;
                        break;
                    }
                if (!duplicate) roots.push_back(*res);
            }
    if (roots.empty()) throw NoRootFoundError();
    std::sort(roots.begin(), roots.end(),
              [](const RootResult& x, const RootResult& y) {
                  return x.lambda.norm() < y.lambda.norm();
              });
    return roots;
}

struct PerturbationRecord {
    GuePerturbation eta;
    std::vector<RootResult> roots;
    int selected_root = -1;
    Density4 rho = Density4::unchecked(C4::Zero());
    Eigen::Vector3d residuals = Eigen::Vector3d::Zero();
    double concurrence_distance = 0.0;
    int retries = 0;
};

/// Keep the root whose state has concurrence closest to the reference;
/// near-ties resolved by smaller relative entropy to the reference.
inline PerturbationRecord select_root(const std::vector<RootResult>& roots,
                                      const ConstraintSystem& sys, const Density4& rho0,
                                      double kappa = kKernelThreshold) {
    if (roots.empty()) throw AllRootsInvalidError();
    const double e0 = concurrence(rho0);
    PerturbationRecord best;
    best.roots = roots;
    double best_dist = 0.0, best_div = 0.0;
    for (size_t i = 0; i < roots.size(); ++i) {
        const C4 g = sys.gamma_r(roots[i].lambda);
        Density4 rho = Density4::unchecked(C4::Zero());
        try {
            rho = Density4::validated(hermitize<4>(g * g));
        } catch (const Error&) {
            continue;
        }
        const double dist = std::abs(concurrence(rho) - e0);
        const double div = relative_entropy<4>(rho, rho0, kappa);
        const bool better = best.selected_root < 0 || dist < best_dist - 1e-12 ||
                            (dist < best_dist + 1e-12 && div < best_div);
        if (better) {
            best.selected_root = static_cast<int>(i);
            best.rho = rho;
            best.residuals = roots[i].residuals;
            best.concurrence_distance = dist;
            best_dist = dist;
            best_div = div;
        }
    }
    if (best.selected_root < 0) throw AllRootsInvalidError();
    return best;
}

struct BatchDiagnostics {
    int failed_records = 0;   // records abandoned after the retry budget
    int total_retries = 0;
};

struct BatchResult {
    std::vector<PerturbationRecord> records;
    BatchDiagnostics diagnostics;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

}  // namespace detail

/// Seed of record `index`, retry `retry`. Retry 0 is base_seed + index so
/// records are reproducible independently of batch size and order.
inline std::uint64_t record_seed(std::uint64_t base_seed, std::uint64_t index, int retry) {
    const std::uint64_t primary = base_seed + index;
    return retry == 0 ? primary : detail::splitmix64(primary ^ (0xA24BAED4963EE407ULL * retry));
}

/// One perturbation record: draw, solve, select. Retries with fresh draws up
/// to `max_retries` times when no admissible root exists.
inline PerturbationRecord perturb_record(const Density4& rho0, const CompositeHamiltonian& h,
                                         double sigma, std::uint64_t base_seed,
                                         std::uint64_t index, int max_retries = 8) {
    for (int retry = 0;; ++retry) {
        try {
            const GuePerturbation eta = sample_gue(sigma, record_seed(base_seed, index, retry));
            const ConstraintSystem sys(perturb_sqrt(rho0, eta), h, rho0);
            PerturbationRecord rec = select_root(solve_constraints(sys, sigma), sys, rho0);
            rec.eta = eta;
            rec.retries = retry;
            return rec;
        } catch (const Error&) {
            if (retry >= max_retries) throw;
        }
    }
}

inline BatchResult generate_batch(int n, double sigma, std::uint64_t base_seed,
                                  const Density4& rho0, const CompositeHamiltonian& h,
                                  int max_retries = 8) {
    if (n < 1) throw Error("generate_batch: n must be >= 1");
    BatchResult out;
    out.records.reserve(n);
    for (int i = 0; i < n; ++i) {
        try {
            PerturbationRecord rec = perturb_record(rho0, h, sigma, base_seed, i, max_retries);
            out.diagnostics.total_retries += rec.retries;
            out.records.push_back(std::move(rec));
        } catch (const Error&) {
            out.diagnostics.failed_records += 1;
            out.diagnostics.total_retries += max_retries;
        }
    }
    return out;
}

}  // namespace qsea
