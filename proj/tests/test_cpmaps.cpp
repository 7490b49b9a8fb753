#include <doctest.h>

#include "fixtures.hpp"

using namespace kconn;

namespace {

Index eigen_rank(const CMatrix& choi) {
    const Eigen::SelfAdjointEigenSolver<CMatrix> es(choi);
    const double top = es.eigenvalues().maxCoeff();
    return (es.eigenvalues().array() > 1e-10 * top).count();
}

}  // namespace

TEST_SUITE("cpmaps") {

TEST_CASE("identity channel has a rank-one Choi matrix") {
    const auto id = cpmaps::identity_map(3);
    CHECK(id.choi_rank() == 1);
    CVector vec = CVector::Zero(9);
    for (Index i = 0; i < 3; ++i) vec(i * 3 + i) = 1.0;
    CHECK((id.choi() - vec * vec.adjoint()).norm() < 1e-14);
    Rng rng(1);
    const CMatrix a = rng.complex_matrix(3, 3);
    CHECK((id(a) - a).norm() < 1e-14);
}

TEST_CASE("Choi entry ordering") {
    Rng rng(2);
    const auto psi = cpmaps::random_unital_cp(2, 3, 2, 7);
    for (Index i = 0; i < 2; ++i) {
        for (Index j = 0; j < 2; ++j) {
            CMatrix e = CMatrix::Zero(2, 2);
            e(i, j) = 1.0;
            CHECK((psi.choi().block(i * 3, j * 3, 3, 3) - psi(e)).norm() < 1e-13);
        }
    }
}

TEST_CASE("redundant Kraus operators collapse") {
    const CMatrix half = CMatrix::Identity(2, 2) / std::sqrt(2.0);
    const auto psi = cpmaps::choi_from_kraus({half, half});
    CHECK(psi.choi_rank() == 1);
    CHECK(psi.is_unital());
}

TEST_CASE("Choi and Kraus round trip") {
    Rng rng(3);
    const cpmaps::KrausList kraus{rng.complex_matrix(2, 3), rng.complex_matrix(2, 3), rng.complex_matrix(2, 3)};
    const auto psi = cpmaps::choi_from_kraus(kraus);
    CHECK(psi.choi_rank() == 3);
    CHECK(psi.choi_rank() == eigen_rank(psi.choi()));
    CHECK((cpmaps::choi_from_kraus(psi.kraus()).choi() - psi.choi()).norm() < 1e-10);
    const CMatrix a = rng.complex_matrix(3, 3);
    CMatrix direct = CMatrix::Zero(2, 2);
    for (const auto& k : kraus) direct += k * a * k.adjoint();
    CHECK((psi(a) - direct).norm() < 1e-10);
}

TEST_CASE("invalid Choi and Kraus input") {
    CHECK_THROWS_AS(cpmaps::choi_from_kraus({}), std::invalid_argument);
    CHECK_THROWS_AS(cpmaps::choi_from_kraus({CMatrix::Identity(2, 2), CMatrix::Identity(3, 3)}),
                    std::invalid_argument);
    CMatrix indefinite = CMatrix::Identity(4, 4);
    indefinite(3, 3) = -1.0;
    CHECK_THROWS_AS(cpmaps::kraus_from_choi(indefinite, 2, 2), std::invalid_argument);
    CMatrix skew = CMatrix::Identity(4, 4);
    skew(0, 1) = 1.0;
    CHECK_THROWS_AS(cpmaps::kraus_from_choi(skew, 2, 2), std::invalid_argument);
    CHECK_THROWS(cpmaps::CPMap(2, 2, CMatrix::Identity(3, 3)));
}

TEST_CASE("Stinespring dilation examples") {
    const auto trivial = cpmaps::stinespring_dilate(cpmaps::identity_map(3));
    CHECK(trivial.rank == 1);
    CHECK((trivial.v - CMatrix::Identity(3, 3)).norm() < 1e-12);
    CHECK(cpmaps::verify_dilation(cpmaps::identity_map(3), trivial) < 1e-14);

    const auto depol = cpmaps::depolarizing_map(2);
    CHECK(depol.is_unital());
    CHECK(cpmaps::stinespring_dilate(depol).rank == 4);
    Rng rng(4);
    const CMatrix a = rng.complex_matrix(2, 2);
    CHECK((depol(a) - a.trace() / 2.0 * CMatrix::Identity(2, 2)).norm() < 1e-13);

    const cpmaps::KrausList scaled{2.0 * CMatrix::Identity(2, 2)};
    CHECK_THROWS_AS(cpmaps::stinespring_dilate(cpmaps::choi_from_kraus(scaled)), std::invalid_argument);
}

TEST_CASE("random unital maps dilate minimally") {
    Rng rng(5);
    for (int i = 0; i < 20; ++i) {
        const Index count = 1 + i % 4;
        const auto psi = cpmaps::random_unital_cp(3, 2, count, rng.engine()());
        CHECK(psi.unitality_residual() < 1e-12);
        const auto s = cpmaps::stinespring_dilate(psi);
        CHECK((s.v.adjoint() * s.v - CMatrix::Identity(2, 2)).norm() < 1e-12);
        CHECK(cpmaps::verify_dilation(psi, s) < 1e-10);
        CHECK(s.rank == count);
        CHECK(s.rank == eigen_rank(psi.choi()));
        const CMatrix a = rng.complex_matrix(3, 3);
        CHECK((s.v.adjoint() * s.lambda(a) * s.v - psi(a)).norm() < 1e-10);
    }
}

TEST_CASE("corrupted dilation is detected") {
    const auto psi = cpmaps::random_unital_cp(3, 2, 2, 11);
    auto s = cpmaps::stinespring_dilate(psi);
    s.v(0, 0) += 1e-3;
    CHECK(cpmaps::verify_dilation(psi, s) > 1e-6);
}

TEST_CASE("cp kernel") {
    Rng rng(6);
    const auto psi = cpmaps::random_unital_cp(3, 2, 3, 12);
    const Kernel k = cpmaps::cp_kernel(psi);
    const BasePoint u = UnitaryElement{rng.unitary(3)};
    CHECK((k(u, u) - CMatrix::Identity(2, 2)).norm() < 1e-12);
    std::vector<BasePoint> pts;
    for (int i = 0; i < 8; ++i) pts.push_back(UnitaryElement{rng.unitary(3)});
    CHECK(kernels::positivity_certificate(kernels::gram_matrix(k, pts), 1e-9).is_psd);
    const Kernel kid = cpmaps::cp_kernel(cpmaps::identity_map(3));
    CHECK((kid(pts[0], pts[1]) - as_unitary(pts[0]).adjoint() * as_unitary(pts[1])).norm() < 1e-12);
    const cpmaps::KrausList scaled{2.0 * CMatrix::Identity(2, 2)};
    CHECK_THROWS(cpmaps::cp_kernel(cpmaps::choi_from_kraus(scaled)));
}

TEST_CASE("pull-back of the compressed lambda kernel is the cp kernel") {
    Rng rng(7);
    for (int i = 0; i < 4; ++i) {
        const auto psi = cpmaps::random_unital_cp(3, 2, 1 + i, rng.engine()());
        const auto s = cpmaps::stinespring_dilate(psi);
        const Kernel kpsi = cpmaps::cp_kernel(psi);
        const Kernel pulled = kernels::pull_back_kernel(cpmaps::dilation_morphism(s), cpmaps::compressed_lambda_kernel(s));
        const Kernel full = kernels::pull_back_kernel(cpmaps::dilation_embedding(s), cpmaps::lambda_kernel(s));
        const BasePoint a = UnitaryElement{rng.unitary(3)};
        const BasePoint b = UnitaryElement{rng.unitary(3)};
        CHECK((pulled(a, b) - kpsi(a, b)).norm() < 1e-10);
        CHECK((full(a, b) - kpsi(a, b)).norm() < 1e-10);
        const CMatrix delta = cpmaps::dilation_morphism(s).delta(a);
        CHECK(numerics::unitarity_residual(delta) < 1e-10);
    }
}

TEST_CASE("cp covariant derivative") {
    Rng rng(8);
    const auto depol = cpmaps::depolarizing_map(2);
    const Section constant = constant_section(rng.complex_vector(2));
    CMatrix traceless = rng.anti_hermitian(2);
    traceless -= traceless.trace() / 2.0 * CMatrix::Identity(2, 2);
    CHECK(cpmaps::cp_covariant_derivative(depol, constant, rng.unitary(2), traceless).norm() < 1e-12);

    const auto psi = cpmaps::random_unital_cp(3, 2, 3, 13);
    const CVector f0 = rng.complex_vector(2);
    const CMatrix a = rng.anti_hermitian(3);
    CHECK((cpmaps::cp_covariant_derivative(psi, constant_section(f0), rng.unitary(3), a) - psi(a) * f0).norm() < 1e-12);
    CHECK_THROWS(cpmaps::cp_covariant_derivative(psi, constant_section(f0), rng.unitary(3), rng.hermitian(3)));

    const Kernel k = cpmaps::cp_kernel(psi);
    const Section sigma = fixtures::cp_section(rng.complex_matrix(2, 3), rng.complex_vector(3),
                                               rng.complex_matrix(2, 3), rng.complex_vector(3));
    for (int i = 0; i < 20; ++i) {
        const CMatrix u = rng.unitary(3);
        const CMatrix x = rng.anti_hermitian(3);
        const CVector formula = cpmaps::cp_covariant_derivative(psi, sigma, u, x);
        CHECK((formula - connections::covariant_derivative_direct(k, sigma, UnitaryElement{u}, Generator{x})).norm() <
              1e-6);
    }
}

TEST_CASE("dilation morphism intertwines the connections") {
    Rng rng(9);
    const auto psi = cpmaps::random_unital_cp(3, 2, 2, 14);
    const auto s = cpmaps::stinespring_dilate(psi);
    const auto theta = cpmaps::dilation_morphism(s);
    const Kernel k0 = cpmaps::compressed_lambda_kernel(s);
    const Kernel kpsi = cpmaps::cp_kernel(psi);
    const Section sigma = fixtures::cp_section(rng.complex_matrix(2, 3), rng.complex_vector(3),
                                               rng.complex_matrix(2, 3), rng.complex_vector(3));
    Section lifted;
    lifted.fiber_dim = 2;
    lifted.value = [theta, sigma](const BasePoint& x) { return CVector(theta.delta(x) * sigma(x)); };
    std::vector<Probe> probes;
    for (int i = 0; i < 5; ++i) probes.push_back({UnitaryElement{rng.unitary(3)}, Generator{rng.anti_hermitian(3)}});
    CHECK(connections::intertwining_residual(theta, connections::direct_evaluator(kpsi),
                                             connections::direct_evaluator(k0), sigma, lifted, probes) < 1e-6);
    const auto form = connections::gauge_pullback_connection(theta, connections::connection_form_field(k0));
    for (const auto& pr : probes) {
        CHECK((form(pr.point, pr.direction) - psi(std::get<Generator>(pr.direction).a)).norm() < 1e-8);
    }
}

TEST_CASE("compression onto a subspace") {
    Rng rng(10);
    const HermitianProjector p = HermitianProjector::from_basis(rng.unitary(4).leftCols(2));
    const auto c = cpmaps::compression_map(p);
    CHECK(c.unitality_residual() < 1e-12);
    CHECK(c.choi_rank() == 1);
    std::vector<CMatrix> probes;
    for (int i = 0; i < 10; ++i) probes.push_back(rng.complex_matrix(4, 4));
    CHECK(cpmaps::compression_expectation_residual(p, probes) < 1e-12);
}

}  // TEST_SUITE
