#include <catch2/catch_amalgamated.hpp>

#include "qsea/integrate.hpp"
#include "qsea/lindblad.hpp"
#include "test_support.hpp"

using namespace qsea;

namespace {

Density4 zeta_state(double zeta) {
    const auto rho0 = bell_diagonal(kBaselineC);
    return Density4::unchecked(zeta * rho0.mat() + (1.0 - zeta) * pure_x_state().mat());
}

}  // namespace

TEST_CASE("jump_operators") {
    const auto global = jump_operators(JumpMode::Global);
    REQUIRE(global.size() == 2);
    C4 l1 = C4::Zero(), l2 = C4::Zero();
    l1(3, 3) = 1.0;
    l2(0, 0) = 1.0;
    CHECK(max_abs<4>(global[0] - l1) == 0.0);
    CHECK(max_abs<4>(global[1] - l2) == 0.0);

    const auto local = jump_operators(JumpMode::Local);
    CHECK(local.size() == 4);

    for (const auto& ops : {global, local})
        for (const C4& l : ops) {
            CHECK(max_abs<4>(l * l - l) < 1e-15);  // projector
            CHECK(hermiticity_violation<4>(l) == 0.0);
        }
}

TEST_CASE("lindbladian on Bell-diagonal states") {
    const auto ops = jump_operators(JumpMode::Global);

    const auto rho = bell_diagonal(kBaselineC);
    const C4 l = lindbladian(rho, ops);
    // exactly two nonzero entries at the outer corners, -(c1 - c2)/4
    const double corner = -(0.996 - 0.4) / 4.0;
    CHECK(l(0, 3).real() == Catch::Approx(corner).margin(1e-14));
    CHECK(l(3, 0).real() == Catch::Approx(corner).margin(1e-14));
    C4 rest = l;
    rest(0, 3) = rest(3, 0) = 0.0;
    CHECK(max_abs<4>(rest) < 1e-15);

    CHECK(max_abs<4>(lindbladian(bell_diagonal({0.4, 0.4, -0.4}), ops)) < 1e-15);
    CHECK(max_abs<4>(lindbladian(Density4::unchecked(0.25 * C4::Identity()), ops)) < 1e-15);

    // diagonal states are fixed points of projector dephasing
    C4 diag = C4::Zero();
    diag(0, 0) = 0.4; diag(1, 1) = 0.3; diag(2, 2) = 0.2; diag(3, 3) = 0.1;
    CHECK(max_abs<4>(lindbladian(Density4::unchecked(diag), ops)) < 1e-15);
}

TEST_CASE("lindblad_rhs") {
    const CompositeHamiltonian h0{0.0, 0.0};
    LindbladParams p;
    CHECK(max_abs<4>(lindblad_rhs(bell_diagonal({0.4, 0.4, -0.4}), h0, p)) < 1e-15);

    // gamma = 0: purely symplectic, entropy constant
    const CompositeHamiltonian h;
    LindbladParams free_p;
    free_p.gamma = 0.0;
    IntegrationOptions opts;
    opts.t_end = 1.0;
    opts.sample_stride = 100;
    const auto rho0 = bell_diagonal(kBaselineC);
    const auto tr = integrate_lindblad(zeta_state(0.68), h, free_p, rho0, opts);
    for (const auto& m : tr.measures)
        CHECK(m.entropy == Catch::Approx(tr.initial().entropy).margin(1e-9));

    // Hermitian, traceless
    std::mt19937_64 rng(61);
    for (int rep = 0; rep < 10; ++rep) {
        const auto rho = qsea::testing::random_density<4>(rng);
        const C4 f = lindblad_rhs(rho, h, p);
        CHECK(hermiticity_violation<4>(f) < 1e-12);
        CHECK(std::abs(f.trace()) < 1e-13);
    }
}

TEST_CASE("integrate_lindblad: linearity and constants of motion") {
    const CompositeHamiltonian h;
    LindbladParams p;
    IntegrationOptions opts;
    opts.t_end = 1.5;
    opts.sample_stride = 30;
    opts.stationary_tol = 0.0;
    const auto rho0 = bell_diagonal(kBaselineC);

    // convex mixture evolves to the mixture of evolutions
    std::mt19937_64 rng(67);
    const auto r1 = qsea::testing::random_density<4>(rng);
    const auto r2 = qsea::testing::random_density<4>(rng);
    const auto mix = Density4::unchecked(0.5 * r1.mat() + 0.5 * r2.mat());
    const auto t1 = integrate_lindblad(r1, h, p, rho0, opts);
    const auto t2 = integrate_lindblad(r2, h, p, rho0, opts);
    const auto tm = integrate_lindblad(mix, h, p, rho0, opts);
    CHECK(max_abs<4>(tm.states.back() - 0.5 * t1.states.back() - 0.5 * t2.states.back()) < 1e-8);

    // with global jumps and eps = 0: populations are constants of motion and
    // the (2,3) coherence is untouched
    const CompositeHamiltonian h0{0.0, 0.0};
    const auto tr = integrate_lindblad(zeta_state(0.68), h0, p, rho0, opts);
    const C4& first = tr.states.front();
    const C4& last = tr.states.back();
    for (int i = 0; i < 4; ++i)
        CHECK(std::abs(last(i, i).real() - first(i, i).real()) < 1e-8);
    CHECK(std::abs(std::abs(last(1, 2)) - std::abs(first(1, 2))) < 1e-8);
    // equal splittings keep the magnitude too
    const auto tr_h = integrate_lindblad(zeta_state(0.68), h, p, rho0, opts);
    CHECK(std::abs(std::abs(tr_h.states.back()(1, 2)) - std::abs(first(1, 2))) < 1e-8);

    // trace preserved
    for (const C4& st : tr.states) CHECK(std::abs(st.trace().real() - 1.0) < 1e-9);
}

TEST_CASE("integrate_lindblad: stationary states") {
    const CompositeHamiltonian h0{0.0, 0.0};
    LindbladParams p;
    IntegrationOptions opts;
    opts.t_end = 2.0;
    opts.sample_stride = 100;
    const auto rho0 = bell_diagonal(kBaselineC);

    // c1 = c2 Bell-diagonal at eps = 0: nothing moves
    const auto frozen = bell_diagonal({0.4, 0.4, -0.4});
    const auto tr = integrate_lindblad(frozen, h0, p, frozen, opts);
    CHECK(tr.stationary_reached);
    CHECK(tr.stationary_time == 0.0);

    // the zeta = 0.68 state loses non-locality while concurrence stays flat
    IntegrationOptions long_opts;
    long_opts.t_end = 60.0;
    long_opts.sample_stride = 10;
    const auto run = integrate_lindblad(zeta_state(0.68), h0, p, rho0, long_opts);
    CHECK(run.stationary_reached);
    double cross = -1.0;
    for (size_t i = 1; i < run.times.size(); ++i)
        if (run.measures[i - 1].chsh_max >= 2.0 && run.measures[i].chsh_max < 2.0)
            cross = run.times[i];
    CHECK(cross > 0.0);
    for (const auto& m : run.measures)
        CHECK(m.concurrence == Catch::Approx(run.initial().concurrence).margin(1e-6));

    // the stationary state is not the canonical product state
    const CompositeHamiltonian h;
    IntegrationOptions stat_opts;
    stat_opts.t_end = 80.0;
    stat_opts.sample_stride = 1000;
    const auto run_h = integrate_lindblad(bell_diagonal(kBaselineC), h, p, rho0, stat_opts);
    CHECK(run_h.stationary_reached);
    const auto gg = gibbs_state(h, 1.0);
    CHECK(trace_distance<4>(run_h.states.back(), gg.mat()) > 1e-3);
    CHECK(max_abs<4>(lindbladian(Density4::unchecked(run_h.states.back()),
                                 jump_operators(JumpMode::Global))) < 1e-8);
}

TEST_CASE("lindblad_entropy_rate") {
    LindbladParams p;
    CHECK(std::abs(lindblad_entropy_rate(bell_diagonal({0.4, 0.4, -0.4}), p)) < 1e-13);
    CHECK(std::abs(lindblad_entropy_rate(Density4::unchecked(0.25 * C4::Identity()), p)) <
          1e-13);

    // finite-difference oracle along the zeta = 0.68 trajectory at eps = 0
    const CompositeHamiltonian h0{0.0, 0.0};
    IntegrationOptions opts;
    opts.t_end = 1.0;
    opts.sample_stride = 100;  // samples every 0.1
    opts.stationary_tol = 0.0;
    const auto rho0 = bell_diagonal(kBaselineC);
    const auto tr = integrate_lindblad(zeta_state(0.68), h0, p, rho0, opts);
    const auto ops = jump_operators(p.jump_mode);
    // centered difference of S from one raw RK4 micro-step either way
    const auto entropy_after = [&](const C4& rho, double dt) {
        const auto f = [&](const C4& m) {
            return lindblad_rhs(Density4::unchecked(m), h0, p, ops);
        };
        const C4 k1 = f(rho), k2 = f(rho + 0.5 * dt * k1), k3 = f(rho + 0.5 * dt * k2),
                 k4 = f(rho + dt * k3);
        return entropy<4>(Density4::unchecked(rho + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)));
    };
    // small eigenvalues make S''' large at early times; Richardson
    // extrapolation of the centered difference keeps the oracle at O(delta^4)
    const double delta = 2e-4;
    const auto fd_at = [&](const C4& rho, double d) {
        return (entropy_after(rho, d) - entropy_after(rho, -d)) / (2 * d);
    };
    for (size_t i = 0; i < tr.times.size(); ++i) {
        const double fd =
            (4.0 * fd_at(tr.states[i], 0.5 * delta) - fd_at(tr.states[i], delta)) / 3.0;
        const double formula =
            lindblad_entropy_rate(Density4::unchecked(tr.states[i]), p);
        CHECK(std::abs(formula - fd) < 1e-5);
        CHECK(formula == Catch::Approx(tr.entropy_rate[i]).margin(1e-10));
    }
}
