#include <catch2/catch_amalgamated.hpp>

#include "qsea/integrate.hpp"
#include "qsea/seaqt.hpp"
#include "test_support.hpp"

using namespace qsea;
using qsea::testing::random_cconfig;

namespace {

Density4 zeta_state(double zeta, const CConfig& c = kBaselineC) {
    const auto rho0 = bell_diagonal(c);
    return Density4::unchecked(zeta * rho0.mat() + (1.0 - zeta) * pure_x_state().mat());
}

C4 full_dissipator(const Density4& rho, const CompositeHamiltonian& h, const SeaqtParams& p) {
    return -(seaqt_rhs(rho, h, p) +
             cxd(0, 1) * commutator<4>(h.matrix, rho.mat()));
}

}  // namespace

TEST_CASE("locally_perceived") {
    const CompositeHamiltonian h;
    std::mt19937_64 rng(43);
    const auto rho = qsea::testing::random_density<4>(rng);
    CHECK(max_abs<2>(locally_perceived(C4::Identity(), rho, Subsystem::A) - C2::Identity()) <
          1e-13);
    CHECK(max_abs<2>(locally_perceived(C4::Identity(), rho, Subsystem::B) - C2::Identity()) <
          1e-13);

    // perceived Hamiltonian for a maximally mixed partner marginal
    const auto bd = bell_diagonal(kBaselineC);
    CHECK(max_abs<2>(locally_perceived(h.matrix, bd, Subsystem::A) - 0.5 * pauli(3)) < 1e-13);

    // product operator against a product state: x * Tr(rho_b y)
    const auto ra = qsea::testing::random_density<2>(rng);
    const auto rb = qsea::testing::random_density<2>(rng);
    const C2 x = qsea::testing::random_hermitian<2>(rng);
    const C2 y = qsea::testing::random_hermitian<2>(rng);
    const auto prod = Density4::unchecked(kron(ra.mat(), rb.mat()));
    const C2 expected = x * (rb.mat() * y).trace();
    CHECK(max_abs<2>(locally_perceived(kron(x, y), prod, Subsystem::A) - expected) < 1e-13);

    // B ln rho perceived on a Bell-diagonal state is proportional to I
    const C4 blog = log_on_support<4>(bd.mat());
    const C2 perceived = locally_perceived(blog, bd, Subsystem::A);
    CHECK(max_abs<2>(perceived - perceived(0, 0) * C2::Identity()) < 1e-12);
    CHECK(std::abs(perceived(0, 0).imag()) < 1e-13);
}

TEST_CASE("inner_product") {
    const C2 half = 0.5 * C2::Identity();
    std::mt19937_64 rng(47);
    const auto rho_j = qsea::testing::random_density<2>(rng);
    CHECK(inner_product(C2::Identity(), C2::Identity(), rho_j.mat()) ==
          Catch::Approx(1.0).margin(1e-13));
    CHECK(inner_product(pauli(3), pauli(3), half) == Catch::Approx(1.0).margin(1e-13));
    CHECK(inner_product(pauli(1), pauli(3), half) == Catch::Approx(0.0).margin(1e-13));

    // symmetric bilinear, positive on Hermitian arguments
    const C2 f = qsea::testing::random_hermitian<2>(rng);
    const C2 g = qsea::testing::random_hermitian<2>(rng);
    CHECK(inner_product(f, g, rho_j.mat()) ==
          Catch::Approx(inner_product(g, f, rho_j.mat())).margin(1e-12));
    CHECK(inner_product(f, f, rho_j.mat()) >= -1e-13);
}

TEST_CASE("dissipator_isolated vanishes on Bell-diagonal states") {
    const CompositeHamiltonian h;
    std::mt19937_64 rng(53);
    for (int rep = 0; rep < 100; ++rep) {
        const auto rho = bell_diagonal(random_cconfig(rng));
        CHECK(max_abs<4>(dissipator_isolated(rho, h, Subsystem::A)) <= 1e-10);
        CHECK(max_abs<4>(dissipator_isolated(rho, h, Subsystem::B)) <= 1e-10);
    }
}

TEST_CASE("dissipator_isolated structure") {
    const CompositeHamiltonian h;

    const auto thermal = gibbs_state(h, 0.7);
    CHECK(max_abs<4>(dissipator_isolated(thermal, h, Subsystem::A)) < 1e-10);
    CHECK(max_abs<4>(dissipator_isolated(thermal, h, Subsystem::B)) < 1e-10);

    const auto perturbed = zeta_state(0.68);
    const C4 da = dissipator_isolated(perturbed, h, Subsystem::A);
    const C4 db = dissipator_isolated(perturbed, h, Subsystem::B);
    CHECK(max_abs<4>(da) > 1e-3);  // genuinely dissipative
    CHECK(hermiticity_violation<4>(da) < 1e-12);
    CHECK(std::abs(da.trace()) < 1e-12);
    CHECK(std::abs(db.trace()) < 1e-12);
    // energy orthogonality of the full dissipative term
    CHECK(std::abs((h.matrix * (da + db)).trace()) < 1e-11);

    // degenerate Hamiltonian: Gram determinant vanishes
    const CompositeHamiltonian h0{0.0, 0.0};
    CHECK_THROWS_AS(dissipator_isolated(perturbed, h0, Subsystem::A), DegenerateGramError);
    // ... but seaqt_rhs falls back to the one-generator form
    SeaqtParams p;
    p.variant = SeaqtVariant::Isolated;
    CHECK_NOTHROW(seaqt_rhs(perturbed, h0, p));
}

TEST_CASE("dissipator_reservoir") {
    const CompositeHamiltonian h;

    for (double beta : {0.3, 1.0, 2.5}) {
        const auto g = gibbs_state<2>(h.local_a, beta);
        CHECK(max_abs<2>(dissipator_reservoir(g, h.local_a, beta)) < 1e-12);
    }

    // maximally mixed marginal against a finite-temperature reservoir:
    // nonzero, traceless, equal to (beta/2) H_J
    const auto half = Density2::unchecked(0.5 * C2::Identity());
    const C2 d = dissipator_reservoir(half, h.local_a, 1.0);
    CHECK(max_abs<2>(d - 0.5 * h.local_a) < 1e-13);
    CHECK(std::abs(d.trace()) < 1e-14);
    // infinite-temperature reservoir: maximally mixed is canonical, D = 0
    CHECK(max_abs<2>(dissipator_reservoir(half, h.local_a, 0.0)) < 1e-14);

    // near-pure excited state relaxes: excited population decreases,
    // entropy production positive
    C2 excited = C2::Zero();
    excited(0, 0) = 1.0 - 1e-3;
    excited(1, 1) = 1e-3;
    const C2 dx = dissipator_reservoir(Density2::unchecked(excited), h.local_a, 1.0);
    CHECK(dx(0, 0).real() > 0.0);  // d rho_00/dt = -D_00/tau < 0
    const C2 blog = log_on_support<2>(excited);
    CHECK((dx * blog).trace().real() > 0.0);  // dS/dt = Tr(D ln rho) >= 0 here
}

TEST_CASE("seaqt_rhs") {
    const CompositeHamiltonian h;
    const CompositeHamiltonian h0{0.0, 0.0};
    const auto bd = bell_diagonal(kBaselineC);

    SeaqtParams iso;
    iso.variant = SeaqtVariant::Isolated;
    CHECK(max_abs<4>(seaqt_rhs(bd, h0, iso)) < 1e-12);  // no motion at all

    // default Hamiltonian: purely symplectic on a Bell-diagonal state
    const C4 rhs = seaqt_rhs(bd, h, iso);
    const C4 symplectic = -cxd(0, 1) * commutator<4>(h.matrix, bd.mat());
    CHECK(max_abs<4>(rhs - symplectic) < 1e-10);
    CHECK(max_abs<4>(symplectic) > 1e-2);  // commutator itself does not vanish

    SeaqtParams res;
    res.variant = SeaqtVariant::Reservoir;
    res.beta_r = 1.0;
    const auto gg = gibbs_state(h, 1.0);
    CHECK(max_abs<4>(seaqt_rhs(gg, h, res)) < 1e-12);

    // Hermitian and traceless on generic states
    std::mt19937_64 rng(59);
    for (int rep = 0; rep < 10; ++rep) {
        const auto rho = qsea::testing::random_density<4>(rng);
        for (const SeaqtParams& p : {iso, res}) {
            const C4 f = seaqt_rhs(rho, h, p);
            CHECK(hermiticity_violation<4>(f) < 1e-11);
            CHECK(std::abs(f.trace()) < 1e-12);
        }
    }
}

TEST_CASE("integrate: constants of motion and convergence") {
    const CompositeHamiltonian h;
    SeaqtParams res;
    res.variant = SeaqtVariant::Reservoir;
    res.beta_r = 1.0;

    IntegrationOptions opts;
    opts.t_end = 2.0;
    opts.sample_stride = 50;

    // canonical product state stays put
    const auto gg = gibbs_state(h, 1.0);
    const auto tr = integrate(gg, h, res, gg, opts);
    CHECK(tr.stationary_reached);
    CHECK(tr.stationary_kind == StationaryKind::FullRhs);
    CHECK(tr.stationary_time == 0.0);

    // isolated variant from the dephasing regime: trace, energy, second law
    const CompositeHamiltonian h0{0.0, 0.0};
    SeaqtParams iso;
    iso.variant = SeaqtVariant::Isolated;
    IntegrationOptions long_opts;
    long_opts.t_end = 30.0;
    long_opts.sample_stride = 20;
    const auto rho0 = bell_diagonal(kBaselineC);
    const auto trace = integrate(zeta_state(0.68), h0, iso, rho0, long_opts);
    for (size_t i = 0; i < trace.times.size(); ++i) {
        const Density4 st = Density4::unchecked(trace.states[i]);
        CHECK(std::abs(trace.states[i].trace().real() - 1.0) < 1e-9);
        CHECK(trace.entropy_rate[i] >= -1e-10);
        CHECK(std::abs(trace.measures[i].energy) < 1e-8);
    }
    for (size_t i = 1; i < trace.times.size(); ++i)
        CHECK(trace.measures[i].entropy >= trace.measures[i - 1].entropy - 1e-8);
    CHECK(trace.stationary_reached);

    // entropy_generation: isolated bookkeeping equals the entropy change
    const auto sgen = entropy_generation(trace, iso);
    for (size_t i = 0; i < sgen.size(); ++i) {
        CHECK(sgen[i] == Catch::Approx(trace.measures[i].entropy - trace.measures[0].entropy)
                             .margin(1e-12));
        CHECK(sgen[i] == Catch::Approx(trace.entropy_generation[i]).margin(1e-12));
    }
}

TEST_CASE("integrate: reservoir run at finite temperature") {
    // eps = 1, beta_R = 1, tau = 1 from the zeta = 0.68 state: entropy
    // generation strictly increasing to a plateau, non-locality lost in
    // finite time, marginals heading to the canonical state. Short horizon
    // here; the acceptance suite runs it to stationarity.
    const CompositeHamiltonian h;
    SeaqtParams res;
    res.variant = SeaqtVariant::Reservoir;
    res.beta_r = 1.0;
    IntegrationOptions opts;
    opts.dt = 2e-5;  // the PSD boundary riding on this trajectory needs a small step
    opts.t_end = 4.0;
    opts.sample_stride = 2500;

    const auto rho0 = bell_diagonal(kBaselineC);
    const auto tr = integrate(zeta_state(0.68), h, res, rho0, opts);

    double cross = -1.0;
    for (size_t i = 1; i < tr.times.size(); ++i)
        if (tr.measures[i - 1].chsh_max >= 2.0 && tr.measures[i].chsh_max < 2.0)
            cross = tr.times[i];
    CHECK(cross > 0.0);

    CHECK(tr.entropy_generation.back() > 0.2);
    for (size_t i = 1; i < tr.entropy_generation.size(); ++i)
        CHECK(tr.entropy_generation[i] >= tr.entropy_generation[i - 1] - 1e-8);

    const auto target = gibbs_state<2>(h.local_a, 1.0);
    const double d0 = trace_distance<2>(partial_trace(tr.states.front(), Subsystem::A),
                                        target.mat());
    const double d1 = trace_distance<2>(partial_trace(tr.states.back(), Subsystem::A),
                                        target.mat());
    CHECK(d1 < 0.05 * d0);
}

TEST_CASE("integrate: step rejection on a too-large step") {
    const CompositeHamiltonian h;
    SeaqtParams res;
    res.variant = SeaqtVariant::Reservoir;
    res.beta_r = 1.0;
    IntegrationOptions opts;
    opts.dt = 1e-3;  // boundary riding violates PSD beyond 1e-6 at this step size
    opts.t_end = 2.0;
    const auto rho0 = bell_diagonal(kBaselineC);
    CHECK_THROWS_AS(integrate(zeta_state(0.68), h, res, rho0, opts), StepRejectedError);
}

TEST_CASE("kernel preservation on the metastable family") {
    // rank-deficient Bell-diagonal states are fixed points of the dissipative
    // part; the symplectic term cannot change the spectrum, so kernel
    // eigenvalues stay pinned at zero.
    const CompositeHamiltonian h;
    IntegrationOptions opts;
    opts.t_end = 2.0;
    opts.sample_stride = 100;
    const auto rho = bell_diagonal({1.0, 0.4, -0.4});

    SeaqtParams iso;
    iso.variant = SeaqtVariant::Isolated;
    for (const auto& tr : {integrate(rho, h, iso, rho, opts)}) {
        for (const C4& st : tr.states) {
            const auto eig = eig_hermitian<4>(st);
            CHECK(eig.eigenvalues(0) <= 10 * kKernelThreshold);
            CHECK(eig.eigenvalues(1) <= 10 * kKernelThreshold);
        }
    }
}

TEST_CASE("rk4 order on a smooth trajectory") {
    const CompositeHamiltonian h0{0.0, 0.0};
    SeaqtParams res;
    res.variant = SeaqtVariant::Reservoir;
    const auto rho0 = bell_diagonal(kBaselineC);
    const auto start = zeta_state(0.68);

    const auto endpoint = [&](double dt) {
        IntegrationOptions opts;
        opts.dt = dt;
        opts.t_end = 1.0;
        opts.sample_stride = 1 << 30;
        opts.stationary_tol = 0.0;  // never exit early
        return integrate(start, h0, res, rho0, opts).states.back();
    };
    // dt large enough that truncation error dominates the spectral
    // projection noise accumulated over the steps
    const C4 ref = endpoint(6.25e-4);
    const double err1 = max_abs<4>(endpoint(2e-2) - ref);
    const double err2 = max_abs<4>(endpoint(1e-2) - ref);
    const double ratio = err1 / err2;
    CHECK(ratio > 12.0);
    CHECK(ratio < 20.0);
}
