#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <functional>
#include <stdexcept>
#include <string>
#include <type_traits>

namespace kconn {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Raised when an operator that must be invertible is not (within threshold).
class SingularError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised when an iterative routine exhausts its iteration budget.
class ConvergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised when a point lies outside the domain of a kernel or curve.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

namespace numerics {

inline constexpr double kDefaultTolerance = 1e-9;
inline constexpr double kDefaultStep = 1e-3;
inline constexpr double kPinvThreshold = 1e-10;
inline constexpr int kJacobiMaxSweeps = 100;

/// Eigenpairs of a Hermitian matrix, values ascending, eigenvectors in columns.
struct EigenDecomposition {
    RVector values;
    CMatrix vectors;

    CMatrix reconstruct() const;
};

/// Cyclic complex Jacobi. The input is symmetrized as (M + M*)/2 first.
/// Throws std::invalid_argument for non-square or markedly non-Hermitian input,
/// ConvergenceError after kJacobiMaxSweeps sweeps.
EigenDecomposition hermitian_eigh(const CMatrix& m, double symmetrization_tol = 1e-8);

/// Threshold pseudo-inverse of a Hermitian PSD matrix. Eigenvalues below
/// rel_tau * lambda_max are treated as zero; an eigenvalue below
/// -rel_tau * lambda_max raises std::invalid_argument (input not PSD).
CMatrix pinv_threshold(const CMatrix& m, double rel_tau = kPinvThreshold);

/// Inverse of a Hermitian positive definite matrix; SingularError when the
/// smallest eigenvalue is below rel_tau * lambda_max.
CMatrix hermitian_inverse(const CMatrix& m, double rel_tau = kPinvThreshold);

/// Inverse of a general square matrix via full-pivot LU; SingularError when
/// the matrix is numerically singular.
CMatrix general_inverse(const CMatrix& m, double rel_tau = kPinvThreshold);

/// exp(t a) for anti-Hermitian a, through the eigendecomposition of i a.
CMatrix expm_anti_hermitian(const CMatrix& a, double t = 1.0);

double hermitian_residual(const CMatrix& m);
double anti_hermitian_residual(const CMatrix& m);
double unitarity_residual(const CMatrix& u);

/// |a - b| <= tol * max(1, scale)
inline bool approx_equal(double a, double b, double tol = kDefaultTolerance, double scale = 1.0) {
    return std::abs(a - b) <= tol * std::max(1.0, std::abs(scale));
}

template <typename T>
bool all_finite(const T& value) {
    if constexpr (std::is_arithmetic_v<T>) {
        return std::isfinite(value);
    } else if constexpr (std::is_same_v<T, cplx>) {
        return std::isfinite(value.real()) && std::isfinite(value.imag());
    } else {
        return value.allFinite();
    }
}

/// Five-point central stencil for f'(0):
///   [8 (f(h) - f(-h)) - (f(2h) - f(-2h))] / (12 h)
/// Paired differences make constant functions differentiate to exactly zero.
/// Works for any f whose values form a vector space (scalars, Eigen objects).
template <typename F>
auto directional_derivative(F&& f, double h = kDefaultStep) {
    using Value = std::decay_t<decltype(f(0.0))>;
    if (!(h > 0.0)) {
        throw std::invalid_argument("directional_derivative: step must be positive");
    }
    const Value fm2 = f(-2.0 * h);
    const Value fm1 = f(-h);
    const Value fp1 = f(h);
    const Value fp2 = f(2.0 * h);
    if (!all_finite(fm2) || !all_finite(fm1) || !all_finite(fp1) || !all_finite(fp2)) {
        throw std::domain_error("directional_derivative: non-finite function value on stencil");
    }
    if constexpr (std::is_arithmetic_v<Value> || std::is_same_v<Value, cplx>) {
        return Value((8.0 * (fp1 - fm1) - (fp2 - fm2)) / (12.0 * h));
    } else {
        using Plain = typename Value::PlainObject;
        return Plain((8.0 * (fp1 - fm1) - (fp2 - fm2)) / (12.0 * h));
    }
}

}  // namespace numerics
}  // namespace kconn
