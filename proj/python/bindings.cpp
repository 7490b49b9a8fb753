#include "kconn/connections.hpp"
#include "kconn/cpmaps.hpp"
#include "kconn/kernel_spec.hpp"
#include "kconn/numerics.hpp"
#include "kconn/rkhs.hpp"
#include "kconn/verify.hpp"

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace kconn;

namespace {

Kernel planar_kernel(const std::string& spec) {
    Kernel k = build_kernel(parse_kernel_spec(spec));
    if (k.domain().kind == DomainKind::UnitaryGroup || k.domain().kind == DomainKind::Grassmannian) {
        throw std::invalid_argument("kernel '" + spec + "' lives on a matrix domain; only C^d domains are exposed");
    }
    return k;
}

std::vector<BasePoint> to_points(const std::vector<CVector>& pts) { return {pts.begin(), pts.end()}; }

/// Python callable z -> fiber vector, differentiated by the stencil.
Section python_section(const Kernel& k, const std::function<CVector(const CVector&)>& f) {
    Section sigma;
    sigma.fiber_dim = k.fiber_dim();
    sigma.value = [f](const BasePoint& s) { return f(as_vector(s)); };
    return sigma;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Connections induced by operator-valued reproducing kernels";

    py::register_exception<SingularError>(m, "SingularError", PyExc_ArithmeticError);
    py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);

    m.def(
        "hermitian_eigh",
        [](const CMatrix& a) {
            const auto eig = numerics::hermitian_eigh(a);
            return py::make_tuple(eig.values, eig.vectors);
        },
        py::arg("m"), "Eigenvalues (ascending) and eigenvectors of a Hermitian matrix by cyclic Jacobi.");
    m.def("pinv_threshold", &numerics::pinv_threshold, py::arg("m"), py::arg("rel_tau") = numerics::kPinvThreshold,
          "Threshold pseudo-inverse of a Hermitian PSD matrix.");

    m.def(
        "kernel_eval",
        [](const std::string& spec, const CVector& s, const CVector& t) { return planar_kernel(spec)(s, t); },
        py::arg("spec"), py::arg("s"), py::arg("t"), "kappa(s, t) for a kernel spec such as 'bergman-disk:nu=2'.");
    m.def(
        "gram_matrix",
        [](const std::string& spec, const std::vector<CVector>& pts) {
            return kernels::gram_matrix(planar_kernel(spec), to_points(pts));
        },
        py::arg("spec"), py::arg("points"));
    m.def(
        "universality_residual",
        [](const std::string& spec, const std::vector<CVector>& pts) {
            return rkhs::universality_residual(rkhs::build_rkhs(planar_kernel(spec), to_points(pts)));
        },
        py::arg("spec"), py::arg("points"));
    m.def(
        "connection_form",
        [](const std::string& spec, const CVector& s, const CVector& x) {
            return connections::connection_form(planar_kernel(spec), s)(x);
        },
        py::arg("spec"), py::arg("point"), py::arg("direction"), "alpha_s(X) = kappa(s,s)^-1 d2 kappa(s,s)(X).");
    m.def(
        "covariant_derivative",
        [](const std::string& spec, const std::function<CVector(const CVector&)>& section, const CVector& s,
           const CVector& x) {
            const Kernel k = planar_kernel(spec);
            const Section sigma = python_section(k, section);
            py::dict out;
            out["closed"] = connections::closed_form_evaluator(k)(sigma, s, x);
            out["direct"] = connections::direct_evaluator(k)(sigma, s, x);
            out["sampled"] = connections::sampled_evaluator(k)(sigma, s, x);
            return out;
        },
        py::arg("spec"), py::arg("section"), py::arg("point"), py::arg("direction"),
        "Covariant derivative of a Python section by the closed-form, direct and sampled backends.");
    m.def(
        "parallel_transport",
        [](const std::string& spec, const CVector& start, const CVector& end, const CVector& v0, int steps) {
            return connections::parallel_transport(planar_kernel(spec), line_curve(start, end), v0, steps);
        },
        py::arg("spec"), py::arg("start"), py::arg("end"), py::arg("v0"), py::arg("steps") = 64,
        "Parallel transport of v0 along the straight line from start to end (RK4).");

    m.def(
        "random_unital_cp_choi",
        [](Index n, Index m_out, Index count, std::uint64_t seed) {
            return cpmaps::random_unital_cp(n, m_out, count, seed).choi();
        },
        py::arg("input_dim"), py::arg("output_dim"), py::arg("kraus_count"), py::arg("seed"));
    m.def(
        "stinespring_dilate",
        [](const CMatrix& choi, Index input_dim) {
            if (input_dim < 1 || choi.rows() % input_dim != 0) throw std::invalid_argument("bad input dimension");
            const cpmaps::CPMap psi(input_dim, choi.rows() / input_dim, choi);
            const auto s = cpmaps::stinespring_dilate(psi);
            py::dict out;
            out["v"] = s.v;
            out["rank"] = s.rank;
            out["dilation_residual"] = cpmaps::verify_dilation(psi, s);
            out["isometry_residual"] = (s.v.adjoint() * s.v - CMatrix::Identity(s.v.cols(), s.v.cols())).norm();
            return out;
        },
        py::arg("choi"), py::arg("input_dim"), "Minimal Stinespring dilation of a unital CP map given by its Choi matrix.");

    m.def(
        "verify",
        [](const std::string& module, std::uint64_t seed) {
            verify::Options opt;
            opt.module = module;
            opt.seed = seed;
            return verify::run(opt).to_json();
        },
        py::arg("module") = "all", py::arg("seed") = 42, "Runs the verification suite; returns the JSON report.");
    m.def(
        "grassmann_agreement",
        [](Index n, Index k, int probes, std::uint64_t seed) {
            return verify::grassmann_agreement(n, k, probes, seed).to_json();
        },
        py::arg("n") = 4, py::arg("k") = 2, py::arg("probes") = 20, py::arg("seed") = 42);
}
