#pragma once

// Sections, fields and kernels shared by the unit and acceptance tests.

#include "kconn/connections.hpp"
#include "kconn/cpmaps.hpp"
#include "kconn/grassmann.hpp"
#include "kconn/kernel_spec.hpp"
#include "kconn/kernels.hpp"
#include "kconn/random.hpp"

#include <string>
#include <vector>

namespace fixtures {

using namespace kconn;

inline cplx z0(const BasePoint& s) { return as_vector(s)(0); }

/// 1 + z/2 - z^2/4 + 0.3i conj(z) on a planar domain.
inline Section planar_section() {
    Section sigma;
    sigma.fiber_dim = 1;
    sigma.value = [](const BasePoint& s) {
        const cplx z = z0(s);
        return CVector::Constant(1, 1.0 + 0.5 * z - 0.25 * z * z + cplx(0, 0.3) * std::conj(z)).eval();
    };
    sigma.differential = [](const BasePoint& s, const TangentVector& x) {
        const cplx z = z0(s);
        const cplx w = std::get<CVector>(x)(0);
        return CVector::Constant(1, (0.5 - 0.5 * z) * w + cplx(0, 0.3) * std::conj(w)).eval();
    };
    return sigma;
}

inline ScalarField planar_field() {
    return [](const BasePoint& s) {
        const cplx z = z0(s);
        return 1.0 + z * z + 0.5 * std::conj(z);
    };
}

/// z_0 + z_0 z_2 / 2 + 0.2 conj(z_2) on C^3, differential by the stencil only.
inline Section fock_section() {
    Section sigma;
    sigma.fiber_dim = 1;
    sigma.value = [](const BasePoint& s) {
        const CVector& z = as_vector(s);
        return CVector::Constant(1, z(0) + 0.5 * z(0) * z(2) + 0.2 * std::conj(z(2))).eval();
    };
    return sigma;
}

inline ScalarField fock_field() {
    return [](const BasePoint& s) {
        const CVector& z = as_vector(s);
        return 1.0 + z(0) * std::conj(z(2)) + 0.5 * z.sum();
    };
}

inline ScalarField trace_field(const CMatrix& w) {
    return [w](const BasePoint& s) {
        if (const auto* g = std::get_if<GrassPoint>(&s)) return cplx(1.0) + (w * g->projector).trace();
        return cplx(1.0) + (w * as_unitary(s)).trace();
    };
}

/// F(q) = q v0 + q M q v1, fiber-valued on every Grassmann point.
inline grassmann::AmbientSection ambient_section(const CVector& v0, const CMatrix& m, const CVector& v1) {
    return [v0, m, v1](const HermitianProjector& q) {
        const CMatrix& p = q.matrix();
        return CVector(p * v0 + p * m * p * v1);
    };
}

/// phi(u) = B* u* (v0 + W u P u* v1), equivariant under block unitaries.
inline grassmann::EquivariantSection equivariant_section(const HermitianProjector& p, const CVector& v0,
                                                         const CMatrix& w, const CVector& v1) {
    const CMatrix b = p.range_basis();
    const CMatrix pm = p.matrix();
    return [b, pm, v0, w, v1](const CMatrix& u) {
        return CVector(b.adjoint() * u.adjoint() * (v0 + w * u * pm * u.adjoint() * v1));
    };
}

/// sigma(u) = L u c + L2 u* c2 on U(n), with analytic differential along u exp(t a).
inline Section cp_section(const CMatrix& l, const CVector& c, const CMatrix& l2, const CVector& c2) {
    Section sigma;
    sigma.fiber_dim = l.rows();
    sigma.value = [=](const BasePoint& s) {
        const CMatrix& u = as_unitary(s);
        return CVector(l * u * c + l2 * u.adjoint() * c2);
    };
    sigma.differential = [=](const BasePoint& s, const TangentVector& x) {
        const CMatrix& u = as_unitary(s);
        const CMatrix& a = std::get<Generator>(x).a;
        return CVector(l * u * a * c - l2 * a * u.adjoint() * c2);
    };
    return sigma;
}

/// A built-in kernel with a test section and scalar field on its domain.
struct Case {
    Kernel kernel;
    Section sigma;
    ScalarField f;
};

/// Every built-in kernel family: disk nu = 1, 2, 3, half-plane nu = 1, 2,
/// Fock on C^3, universal on Gr(2, C^4), homogeneous on U(3) with rank-1 P,
/// and the kernel of a random unital CP map M_3 -> M_2.
inline std::vector<Case> builtin_cases(std::uint64_t seed) {
    Rng rng(seed);
    std::vector<Case> out;
    for (double nu : {1.0, 2.0, 3.0}) out.push_back({kernels::make_bergman_disk(nu), planar_section(), planar_field()});
    for (double nu : {1.0, 2.0}) out.push_back({kernels::make_bergman_halfplane(nu), planar_section(), planar_field()});
    out.push_back({kernels::make_fock_standard(3), fock_section(), fock_field()});
    const CVector v0 = rng.complex_vector(4);
    const CMatrix m = rng.complex_matrix(4, 4);
    const CVector v1 = rng.complex_vector(4);
    out.push_back({grassmann::universal_kernel(4, 2), grassmann::tautological_section(ambient_section(v0, m, v1), 2),
                   trace_field(rng.complex_matrix(4, 4))});
    const HermitianProjector p1 = HermitianProjector::coordinate(3, 1);
    const CVector h0 = rng.complex_vector(3);
    const CMatrix hw = rng.complex_matrix(3, 3);
    const CVector h1 = rng.complex_vector(3);
    out.push_back({grassmann::homogeneous_kernel(p1),
                   grassmann::homogeneous_section(equivariant_section(p1, h0, hw, h1), 1),
                   trace_field(rng.complex_matrix(3, 3))});
    const auto psi = cpmaps::random_unital_cp(3, 2, 3, rng.engine()());
    const CMatrix l = rng.complex_matrix(2, 3);
    const CVector c = rng.complex_vector(3);
    const CMatrix l2 = rng.complex_matrix(2, 3);
    const CVector c2 = rng.complex_vector(3);
    out.push_back({cpmaps::cp_kernel(psi), cp_section(l, c, l2, c2), trace_field(rng.complex_matrix(3, 3))});
    return out;
}

inline std::vector<Probe> probes(const Kernel& k, Rng& rng, int count, double im_lo = 0.1, double im_hi = 2.0) {
    std::vector<Probe> out;
    for (int i = 0; i < count; ++i) {
        BasePoint s = random_point(k.domain(), rng, im_lo, im_hi);
        TangentVector x = random_direction(k.domain(), s, rng);
        out.push_back({std::move(s), std::move(x)});
    }
    return out;
}

inline BasePoint scalar_point(cplx z) { return CVector::Constant(1, z).eval(); }
inline TangentVector scalar_direction(cplx w) { return CVector::Constant(1, w).eval(); }

}  // namespace fixtures
