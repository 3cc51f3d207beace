#pragma once

// Fixed-step classical Runge-Kutta integration of the matrix equation of
// motion, shared by both dynamics so cross-framework comparisons are
// integration-scheme-identical. After every step the state is re-Hermitized,
// eigenvalues below the kernel threshold are clamped to zero, and the trace
// is renormalized (projection back onto the state manifold).

#include <cmath>
#include <functional>
#include <utility>
#include <vector>

#include "qsea/lindblad.hpp"
#include "qsea/seaqt.hpp"

namespace qsea {

/// Entropy-generation bookkeeping along a trajectory.
///   EntropyChange:        S(t) - S(0)                      (isolated SEAQT, Lindblad)
///   EntropyMinusExchange: [S(t)-S(0)] - beta_R [E(t)-E(0)] (reservoir SEAQT)
enum class SgenMode { EntropyChange, EntropyMinusExchange };

struct IntegrationOptions {
    double dt = 1e-3;
    double t_end = 50.0;
    int sample_stride = 100;          // record every N-th step
    double kappa = kKernelThreshold;
    double stationary_tol = 1e-9;     // max-abs of the rhs
    double psd_reject_tol = 1e-6;     // StepRejected beyond this violation
    bool store_states = true;
};

/// How a trajectory came to rest. FullRhs means max-abs of the whole
/// right-hand side fell below tolerance. DissipativeOnly means the
/// dissipative part vanished while a decoupled coherence keeps rotating
/// under the symplectic term; every recorded measure is constant on that
/// closed orbit, so the trajectory is reported at that point.
enum class StationaryKind { None, FullRhs, DissipativeOnly };

struct EvolutionTrace {
    std::vector<double> times;
    std::vector<C4> states;               // empty unless store_states
    std::vector<MeasureSet> measures;
    std::vector<double> entropy_rate;      // -Tr(rhs B ln rho)
    std::vector<double> entropy_generation;
    bool stationary_reached = false;
    StationaryKind stationary_kind = StationaryKind::None;
    double stationary_time = 0.0;

    const MeasureSet& initial() const { return measures.front(); }
    const MeasureSet& final_sample() const { return measures.back(); }
    double final_time() const { return times.back(); }
};

namespace detail {

inline C4 project_to_states(const C4& m, double t, double kappa, double psd_tol) {
    const HermitianEig<4> eig = eig_hermitian<4>(hermitize<4>(m));
    if (eig.eigenvalues(0) < -psd_tol) throw StepRejectedError(t, eig.eigenvalues(0));
    Eigen::Vector4d w = eig.eigenvalues;
    double sum = 0.0;
    for (int i = 0; i < 4; ++i) {
        if (w(i) < kappa) w(i) = 0.0;
        sum += w(i);
    }
    C4 out = C4::Zero();
    for (int i = 0; i < 4; ++i) {
        if (w(i) == 0.0) continue;
        out.noalias() += (w(i) / sum) * (eig.eigenvectors.col(i) * eig.eigenvectors.col(i).adjoint());
    }
    return out;
}

}  // namespace detail

/// Integrate d(rho)/dt = rhs(rho) from rho0. The rhs callable must return a
/// Hermitian traceless 4x4. Sampling records all measures, the instantaneous
/// entropy rate, and cumulative entropy generation; integration stops early
/// once max-abs(rhs) drops below the stationarity tolerance.
template <class RhsFn>
EvolutionTrace integrate_flow(const Density4& rho0, RhsFn&& rhs, const CompositeHamiltonian& h,
                              const Density4& reference, const IntegrationOptions& opts,
                              SgenMode sgen_mode, double beta_r = 0.0) {
    EvolutionTrace trace;
    C4 state = rho0.mat();
    const long long n_steps = static_cast<long long>(std::ceil(opts.t_end / opts.dt - 1e-12));

    double s0 = 0.0, e0 = 0.0;
    const auto sample = [&](double t, const C4& rho_m, const C4& k1) {
        const Density4 rho = Density4::unchecked(rho_m);
        const MeasureSet m = measure_all(rho, h, reference, opts.kappa);
        if (trace.measures.empty()) { s0 = m.entropy; e0 = m.energy; }
        const C4 blog = log_on_support<4>(rho_m, opts.kappa);
        trace.times.push_back(t);
        if (opts.store_states) trace.states.push_back(rho_m);
        trace.measures.push_back(m);
        trace.entropy_rate.push_back(-(k1 * blog).trace().real());
        double sgen = m.entropy - s0;
        if (sgen_mode == SgenMode::EntropyMinusExchange) sgen -= beta_r * (m.energy - e0);
        trace.entropy_generation.push_back(sgen);
    };

    const cxd i_unit(0.0, 1.0);
    const auto stationary_kind_at = [&](const C4& rho_m, const C4& rhs_value) {
        if (max_abs<4>(rhs_value) < opts.stationary_tol) return StationaryKind::FullRhs;
        const C4 dissipative = rhs_value + i_unit * commutator<4>(h.matrix, rho_m);
        if (max_abs<4>(dissipative) < opts.stationary_tol) return StationaryKind::DissipativeOnly;
        return StationaryKind::None;
    };

    C4 k1 = rhs(Density4::unchecked(state));
    sample(0.0, state, k1);

    for (long long step = 1; step <= n_steps; ++step) {
        if (const StationaryKind kind = stationary_kind_at(state, k1);
            kind != StationaryKind::None) {
            trace.stationary_reached = true;
            trace.stationary_kind = kind;
            trace.stationary_time = (step - 1) * opts.dt;
            break;
        }
        const double dt = opts.dt;
        const C4 k2 = rhs(Density4::unchecked(state + 0.5 * dt * k1));
        const C4 k3 = rhs(Density4::unchecked(state + 0.5 * dt * k2));
        const C4 k4 = rhs(Density4::unchecked(state + dt * k3));
        const C4 proposed = state + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        const double t = step * dt;
        state = detail::project_to_states(proposed, t, opts.kappa, opts.psd_reject_tol);
        k1 = rhs(Density4::unchecked(state));

        const bool last = (step == n_steps);
        if (step % opts.sample_stride == 0 || last) sample(t, state, k1);
    }

    if (trace.stationary_reached &&
        std::abs(trace.times.back() - trace.stationary_time) > 0.25 * opts.dt)
        sample(trace.stationary_time, state, k1);

    return trace;
}

inline EvolutionTrace integrate(const Density4& rho0, const CompositeHamiltonian& h,
                                const SeaqtParams& params, const Density4& reference,
                                const IntegrationOptions& opts) {
    const SgenMode mode = params.variant == SeaqtVariant::Reservoir
                              ? SgenMode::EntropyMinusExchange
                              : SgenMode::EntropyChange;
    return integrate_flow(
        rho0, [&](const Density4& rho) { return seaqt_rhs(rho, h, params); }, h, reference, opts,
        mode, params.beta_r);
}

inline EvolutionTrace integrate_lindblad(const Density4& rho0, const CompositeHamiltonian& h,
                                         const LindbladParams& params, const Density4& reference,
                                         const IntegrationOptions& opts) {
    const std::vector<C4> ops = jump_operators(params.jump_mode);
    return integrate_flow(
        rho0, [&](const Density4& rho) { return lindblad_rhs(rho, h, params, ops); }, h,
        reference, opts, SgenMode::EntropyChange);
}

/// Recompute the cumulative entropy-generation sequence of a recorded trace.
inline std::vector<double> entropy_generation(const EvolutionTrace& trace,
                                              const SeaqtParams& params) {
    std::vector<double> out;
    out.reserve(trace.measures.size());
    const double s0 = trace.measures.front().entropy;
    const double e0 = trace.measures.front().energy;
    for (const MeasureSet& m : trace.measures) {
        double sgen = m.entropy - s0;
        if (params.variant == SeaqtVariant::Reservoir) sgen -= params.beta_r * (m.energy - e0);
        out.push_back(sgen);
    }
    return out;
}

}  // namespace qsea
