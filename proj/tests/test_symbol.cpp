#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "thyp/errors.hpp"
#include "thyp/models.hpp"
#include "thyp/symbol.hpp"

#include <algorithm>
#include <cmath>
#include <random>

using namespace thyp;

namespace {

Mat random_orthogonal(int m, std::mt19937_64& rng) {
    std::normal_distribution<double> normal;
    Mat G(m, m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) G(i, j) = normal(rng);
    Eigen::HouseholderQR<Mat> qr(G);
    return qr.householderQ();
}

// Symmetric part residual of P·A.
double symmetry_residual(const Mat& P, const Mat& A) {
    const Mat PA = P * A;
    return (PA - PA.transpose()).norm();
}

SystemDef constant_system(const Mat& A) { return models::make_constant_coefficient(A); }

}  // namespace

TEST_CASE("assemble_symbol is linear in xi") {
    Mat A = Mat::Zero(2, 2);
    A(0, 0) = 1.0;
    A(1, 1) = -1.0;
    const SystemDef sys = constant_system(A);
    const Vec x = Vec::Zero(1);
    const Vec z = Vec::Zero(2);
    CHECK((assemble_symbol(sys, 0.0, x, z, Vec::Ones(1)) - A).norm() == 0.0);
    CHECK(assemble_symbol(sys, 0.0, x, z, Vec::Zero(1)).norm() == 0.0);
    CHECK((assemble_symbol(sys, 0.0, x, z, Vec::Constant(1, -2.5)) + 2.5 * A).norm() < 1e-15);
}

TEST_CASE("assemble_symbol refuses states outside the region unless closure is requested") {
    const SystemDef sys = models::make_drift(1.0, 1.0);
    const Vec x = Vec::Zero(1);
    const Vec xi = Vec::Ones(1);
    CHECK_THROWS_AS(assemble_symbol(sys, 0.0, x, Vec::Constant(1, -0.5), xi),
                    EvaluationOutsideDomain);
    CHECK_THROWS_AS(assemble_symbol(sys, 0.0, x, Vec::Zero(1), xi), EvaluationOutsideDomain);
    CHECK(assemble_symbol(sys, 0.0, x, Vec::Zero(1), xi, true)(0, 0) == 1.0);
}

TEST_CASE("diagonal matrix gives coordinate structure") {
    Mat A(2, 2);
    A << 3, 0, 0, 1;
    const EigenStructure es = eigendecompose(A);
    REQUIRE(es.clusters() == 2);
    CHECK(es.lambdas[0] == doctest::Approx(1.0));
    CHECK(es.lambdas[1] == doctest::Approx(3.0));
    CHECK(es.gap == doctest::Approx(2.0));
    CHECK((es.P - Mat::Identity(2, 2)).norm() < 1e-14);
    CHECK((es.S.cwiseAbs() - Mat::Identity(2, 2).rowwise().reverse()).norm() < 1e-14);
    const auto Ps = build_projections(es);
    REQUIRE(Ps.size() == 2);
    Mat P1 = Mat::Zero(2, 2), P2 = Mat::Zero(2, 2);
    P1(1, 1) = 1.0;
    P2(0, 0) = 1.0;
    CHECK((Ps[0] - P1).norm() < 1e-14);
    CHECK((Ps[1] - P2).norm() < 1e-14);
}

TEST_CASE("Jordan block is defective and rotation has complex spectrum") {
    Mat J(2, 2);
    J << 0, 1, 0, 0;
    CHECK_THROWS_AS(eigendecompose(J), Defective);
    Mat R(2, 2);
    R << 0, 1, -1, 0;
    CHECK_THROWS_AS(eigendecompose(R), ComplexSpectrum);
    try {
        eigendecompose(R);
    } catch (const ComplexSpectrum& e) {
        CHECK(e.imag_ratio > 0.1);
    }
}

TEST_CASE("symmetrizer of [[0,1],[2,0]] matches the hand-computed left eigenvectors") {
    Mat A(2, 2);
    A << 0, 1, 2, 0;
    const EigenStructure es = eigendecompose(A);
    // left eigenvectors ∝ (√2, 1) and (√2, -1); sum of their normalized outer products
    const double r2 = std::sqrt(2.0);
    Vec w1(2), w2(2);
    w1 << r2, 1.0;
    w2 << r2, -1.0;
    const Mat P_hand = w1 * w1.transpose() / w1.squaredNorm() + w2 * w2.transpose() / w2.squaredNorm();
    CHECK((es.P - P_hand).norm() < 1e-12);
    CHECK(symmetry_residual(build_symmetrizer(es), A) < 1e-12);
    CHECK(es.lambdas[0] == doctest::Approx(-r2).epsilon(1e-14));
    CHECK(es.lambdas[1] == doctest::Approx(r2).epsilon(1e-14));
}

TEST_CASE("projections of a random symmetric matrix are outer products of its eigenvectors") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        const Mat Q = random_orthogonal(3, rng);
        Vec lam(3);
        lam << -1.5, 0.25, 2.0;
        const Mat A = Q * lam.asDiagonal() * Q.transpose();
        const EigenStructure es = eigendecompose(A);
        const auto Ps = build_projections(es);
        REQUIRE(Ps.size() == 3);
        for (int i = 0; i < 3; ++i) {
            const Mat oracle = Q.col(i) * Q.col(i).transpose();
            CHECK((Ps[static_cast<std::size_t>(i)] - oracle).norm() < 1e-10);
            const Mat contour = contour_projection(A, lam[i], 0.5);
            CHECK((contour - oracle).norm() < 1e-10);
        }
        CHECK((es.P - Mat::Identity(3, 3)).norm() < 1e-10);
        CHECK(symmetry_residual(es.P, A) < 1e-12 * A.norm());
    }
}

TEST_CASE("non-normal diagonalizable matrices: residual, projector algebra, contour agreement") {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> normal;
    for (int trial = 0; trial < 50; ++trial) {
        const int m = 4;
        Mat V(m, m);
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) V(i, j) = normal(rng);
        V += 3.0 * Mat::Identity(m, m);
        Vec lam(m);
        lam << -1.0, 0.5, 0.5, 2.0;  // one double eigenvalue
        const Mat A = V * lam.asDiagonal() * V.inverse();
        const EigenStructure es = eigendecompose(A);
        REQUIRE(es.clusters() == 3);
        CHECK(es.multiplicity[1] == 2);
        CHECK((es.S * A - es.D * es.S).norm() <= 1e-9 * A.norm());
        CHECK(symmetry_residual(es.P, A) <= 1e-9 * A.norm() * es.P.norm());
        const auto Ps = build_projections(es);
        Mat sum = Mat::Zero(m, m);
        for (std::size_t i = 0; i < Ps.size(); ++i) {
            sum += Ps[i];
            CHECK((Ps[i] * A - A * Ps[i]).norm() <= 1e-9 * A.norm() * Ps[i].norm());
            for (std::size_t j = 0; j < Ps.size(); ++j) {
                const Mat expected = i == j ? Ps[i] : Mat::Zero(m, m);
                CHECK((Ps[i] * Ps[j] - expected).norm() < 1e-8 * (1.0 + Ps[i].norm()));
            }
            const Mat contour = contour_projection(A, es.lambdas[i], 0.25);
            CHECK((contour - Ps[i]).norm() < 1e-8 * (1.0 + Ps[i].norm()));
        }
        CHECK((sum - Mat::Identity(m, m)).norm() < 1e-9);
        // P = SᵀS is a sum of orthogonal projectors: trace m, eigenvalues straddle 1
        CHECK(es.P.trace() == doctest::Approx(m).epsilon(1e-12));
        Eigen::SelfAdjointEigenSolver<Mat> pe(es.P);
        CHECK(pe.eigenvalues().minCoeff() <= 1.0 + 1e-12);
        CHECK(pe.eigenvalues().maxCoeff() >= 1.0 - 1e-12);
    }
}

TEST_CASE("symmetrizer does not depend on the eigenvector basis or the sign of xi") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> normal;
    Mat V(3, 3);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) V(i, j) = normal(rng);
    V += 2.0 * Mat::Identity(3, 3);
    Vec lam(3);
    lam << 1.0, 1.0, -2.0;
    const Mat A = V * lam.asDiagonal() * V.inverse();
    const EigenStructure a = eigendecompose(A);
    const EigenStructure b = eigendecompose(-A);
    const EigenStructure c = eigendecompose(3.7 * A);
    CHECK((a.P - b.P).norm() < 1e-10);
    CHECK((a.P - c.P).norm() < 1e-10);
    const EigenStructure again = eigendecompose(A);
    CHECK((a.P - again.P).norm() == 0.0);
    CHECK((a.S - again.S).norm() == 0.0);
}

TEST_CASE("eigenvalues are homogeneous of degree one in xi") {
    const SystemDef sys = models::make_relativistic_euler(
        models::EquationOfState::barotropic(0.5, 1.3), models::FluidOptions{});
    const Vec z = models::euler_state({0.3, -0.2, 0.4}, 1.2, 0.9);
    const Vec x = Vec::Zero(3);
    Vec xi(3);
    xi << 0.4, -1.1, 0.7;
    const EigenStructure base = symbol_structure(sys, 0.0, x, z, xi);
    for (double c : {0.01, 0.5, 3.0, 100.0}) {
        const EigenStructure sc = symbol_structure(sys, 0.0, x, z, c * xi);
        REQUIRE(sc.clusters() == base.clusters());
        for (int k = 0; k < base.clusters(); ++k) {
            const auto kk = static_cast<std::size_t>(k);
            CHECK(std::abs(sc.lambdas[kk] - c * base.lambdas[kk]) <= 1e-9 * c * base.norm);
        }
        CHECK((sc.P - base.P).norm() < 1e-8);
    }
}

TEST_CASE("zero frequency uses the identity convention") {
    const SystemDef sys = models::make_burgers();
    const EigenStructure es = symbol_structure(sys, 0.0, Vec::Zero(1), Vec::Constant(1, 2.0),
                                               Vec::Zero(1));
    CHECK((es.P - Mat::Identity(1, 1)).norm() == 0.0);
    CHECK((es.S - Mat::Identity(1, 1)).norm() == 0.0);
    CHECK(es.D.norm() == 0.0);
}

TEST_CASE("scan of two-speed advection passes with unit symmetrizer bounds") {
    const SystemDef sys = models::make_advection({1.0, -1.0});
    SamplePlan plan;
    plan.points = {Vec::Zero(1)};
    plan.states = {Vec::Zero(2), Vec::Ones(2)};
    plan.directions = unit_directions(1, 2);
    const HyperbolicityReport rep = scan_hyperbolicity(sys, plan);
    CHECK(rep.pass);
    CHECK(rep.samples == 4);
    CHECK(rep.min_gap == doctest::Approx(2.0));
    CHECK(rep.lambda0 == doctest::Approx(1.0));
    CHECK(rep.lambda1 == doctest::Approx(1.0));
}

TEST_CASE("equal advection speeds form one cluster of multiplicity two") {
    const SystemDef sys = models::make_advection({0.7, 0.7});
    const EigenStructure es = symbol_structure(sys, 0.0, Vec::Zero(1), Vec::Zero(2), Vec::Ones(1));
    REQUIRE(es.clusters() == 1);
    CHECK(es.multiplicity[0] == 2);
    CHECK((es.P - Mat::Identity(2, 2)).norm() < 1e-14);
    SamplePlan plan;
    plan.points = {Vec::Zero(1)};
    plan.states = {Vec::Zero(2)};
    plan.directions = unit_directions(1, 2);
    CHECK(scan_hyperbolicity(sys, plan).pass);
}

TEST_CASE("scan collects witnesses for a non-hyperbolic system") {
    Mat A(2, 2);
    A << 0, 1, -1, 0;
    const SystemDef sys = constant_system(A);
    SamplePlan plan;
    plan.times = {0.0, 1.0};
    plan.points = {Vec::Zero(1)};
    plan.states = {Vec::Zero(2)};
    plan.directions = unit_directions(1, 2);
    plan.max_witnesses = 3;
    const HyperbolicityReport rep = scan_hyperbolicity(sys, plan);
    CHECK_FALSE(rep.pass);
    CHECK(rep.failures == 4);
    REQUIRE(rep.witnesses.size() == 3);
    CHECK(rep.witnesses[0].kind == FailureKind::ComplexSpectrum);
}

TEST_CASE("empty sample sets are rejected") {
    const SystemDef sys = models::make_burgers();
    SamplePlan plan;
    plan.points = {Vec::Zero(1)};
    plan.directions = unit_directions(1, 2);
    CHECK_THROWS_AS(scan_hyperbolicity(sys, plan), EmptyPlan);
}

TEST_CASE("unit directions are unit length and deterministic") {
    for (int N = 1; N <= 3; ++N) {
        const auto a = unit_directions(N, 50);
        const auto b = unit_directions(N, 50);
        REQUIRE(a.size() == b.size());
        for (std::size_t i = 0; i < a.size(); ++i) {
            CHECK(a[i].norm() == doctest::Approx(1.0).epsilon(1e-14));
            CHECK((a[i] - b[i]).norm() == 0.0);
        }
    }
}

TEST_CASE("spectral radius bound sums the directional radii") {
    const SystemDef sys = models::make_advection({2.0, -3.0});
    CHECK(spectral_radius_bound(sys, 0.0, Vec::Zero(1), Vec::Zero(2)) == doctest::Approx(3.0));
}
