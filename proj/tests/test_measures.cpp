#include <catch2/catch_amalgamated.hpp>

#include "qsea/measures.hpp"
#include "test_support.hpp"

using namespace qsea;
using qsea::testing::random_cconfig;
using qsea::testing::random_unitary2;

namespace {

/// Independent oracle for Bell-diagonal states: E = max(0, 2 lambda_max - 1).
double bell_concurrence_oracle(const CConfig& c) {
    const auto w = c.eigenvalues();
    return std::max(0.0, 2.0 * *std::max_element(w.begin(), w.end()) - 1.0);
}

/// Independent oracle for Bell-diagonal states: 2 sqrt(top two of c_i^2).
double bell_chsh_oracle(const CConfig& c) {
    std::array<double, 3> sq{c.c1 * c.c1, c.c2 * c.c2, c.c3 * c.c3};
    std::sort(sq.begin(), sq.end());
    return 2.0 * std::sqrt(sq[1] + sq[2]);
}

}  // namespace

TEST_CASE("concurrence") {
    const auto proj = bell_projectors();
    CHECK(concurrence(proj[0]) == Catch::Approx(1.0).margin(1e-10));
    CHECK(concurrence(Density4::unchecked(0.25 * C4::Identity())) == 0.0);
    CHECK(concurrence(bell_diagonal(kBaselineC)) == Catch::Approx(0.398).margin(1e-10));

    std::mt19937_64 rng(29);
    for (int rep = 0; rep < 200; ++rep) {
        const CConfig c = random_cconfig(rng);
        CHECK(std::abs(concurrence(bell_diagonal(c)) - bell_concurrence_oracle(c)) < 1e-10);
    }

    // invariance under local unitaries
    for (int rep = 0; rep < 40; ++rep) {
        const auto rho = qsea::testing::random_density<4>(rng);
        const C4 u = kron(random_unitary2(rng), random_unitary2(rng));
        const auto rotated = Density4::unchecked(u * rho.mat() * u.adjoint());
        CHECK(std::abs(concurrence(rotated) - concurrence(rho)) < 1e-8);
    }
}

TEST_CASE("chsh_max") {
    const auto proj = bell_projectors();
    CHECK(chsh_max(proj[0]) == Catch::Approx(2.0 * std::sqrt(2.0)).margin(1e-12));
    CHECK(chsh_max(Density4::unchecked(0.25 * C4::Identity())) < 1e-12);
    CHECK(chsh_max(bell_diagonal(kBaselineC)) ==
          Catch::Approx(2.0 * std::sqrt(0.996 * 0.996 + 0.16)).margin(1e-12));

    // T is diagonal with entries c_i for Bell-diagonal states
    const Eigen::Matrix3d t = correlation_matrix(bell_diagonal(kBaselineC));
    CHECK(t(0, 0) == Catch::Approx(0.996).margin(1e-13));
    CHECK(t(1, 1) == Catch::Approx(0.4).margin(1e-13));
    CHECK(t(2, 2) == Catch::Approx(-0.4).margin(1e-13));
    CHECK(std::abs(t(0, 1)) + std::abs(t(1, 2)) + std::abs(t(0, 2)) < 1e-13);

    std::mt19937_64 rng(31);
    for (int rep = 0; rep < 200; ++rep) {
        const CConfig c = random_cconfig(rng);
        CHECK(std::abs(chsh_max(bell_diagonal(c)) - bell_chsh_oracle(c)) < 1e-10);
    }

    // product states never violate the classical bound
    for (int rep = 0; rep < 50; ++rep) {
        const auto a = qsea::testing::random_density<2>(rng);
        const auto b = qsea::testing::random_density<2>(rng);
        CHECK(chsh_max(Density4::unchecked(kron(a.mat(), b.mat()))) <= 2.0 + 1e-10);
    }
}

TEST_CASE("entropy") {
    CHECK(entropy<4>(pure_x_state()) == Catch::Approx(0.0).margin(1e-12));
    CHECK(entropy<4>(Density4::unchecked(0.25 * C4::Identity())) ==
          Catch::Approx(std::log(4.0)).margin(1e-14));
    // metastable configuration: -0.7 ln 0.7 - 0.3 ln 0.3 = 0.6108...
    CHECK(entropy<4>(bell_diagonal({1.0, 0.4, -0.4})) ==
          Catch::Approx(0.6108).margin(5e-4));
    CHECK(entropy<4>(bell_diagonal({1.0, 0.4, -0.4})) ==
          Catch::Approx(-0.7 * std::log(0.7) - 0.3 * std::log(0.3)).margin(1e-14));
}

TEST_CASE("relative_entropy") {
    const auto rho = bell_diagonal(kBaselineC);
    CHECK(relative_entropy<4>(rho, rho) == Catch::Approx(0.0).margin(1e-12));

    const auto mixed = Density4::unchecked(0.25 * C4::Identity());
    CHECK(relative_entropy<4>(pure_x_state(), mixed) ==
          Catch::Approx(std::log(4.0)).margin(1e-12));

    const auto proj = bell_projectors();
    CHECK(std::isinf(relative_entropy<4>(proj[0], proj[2])));

    // nonnegative on random pairs
    std::mt19937_64 rng(37);
    for (int rep = 0; rep < 50; ++rep) {
        const auto a = qsea::testing::random_density<4>(rng);
        const auto b = qsea::testing::random_density<4>(rng);
        const double d = relative_entropy<4>(a, b);
        CHECK(d >= 0.0);
        CHECK(std::isfinite(d));
    }
}

TEST_CASE("energy purity linear_entropy") {
    const auto mixed = Density4::unchecked(0.25 * C4::Identity());
    CHECK(purity<4>(mixed) == Catch::Approx(0.25).margin(1e-15));
    CHECK(linear_entropy<4>(mixed) == Catch::Approx(0.75).margin(1e-15));
    CHECK(purity<4>(bell_projectors()[0]) == Catch::Approx(1.0).margin(1e-15));

    std::mt19937_64 rng(41);
    const CompositeHamiltonian h;
    for (int rep = 0; rep < 50; ++rep)
        CHECK(std::abs(energy(bell_diagonal(random_cconfig(rng)), h)) < 1e-13);
}

TEST_CASE("pearson") {
    std::vector<double> xs{1.0, 2.0, 3.5, -1.0, 0.25};
    std::vector<double> ys;
    for (double x : xs) ys.push_back(-2.0 * x + 3.0);
    CHECK(pearson(xs, ys) == Catch::Approx(-1.0).margin(1e-14));

    std::vector<double> flat(xs.size(), 3.0);
    CHECK_THROWS_AS(pearson(xs, flat), ZeroVarianceError);
    CHECK_THROWS_AS(pearson(flat, ys), ZeroVarianceError);
    CHECK_THROWS_AS(pearson(std::vector<double>{1.0}, std::vector<double>{2.0}), Error);
}
