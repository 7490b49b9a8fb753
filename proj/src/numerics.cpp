#include "kconn/numerics.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

namespace kconn::numerics {

CMatrix EigenDecomposition::reconstruct() const {
    return vectors * values.cast<cplx>().asDiagonal() * vectors.adjoint();
}

namespace {

double off_diagonal_norm(const CMatrix& a) {
    double sum = 0.0;
    for (Index j = 0; j < a.cols(); ++j) {
        for (Index i = 0; i < a.rows(); ++i) {
            if (i != j) sum += std::norm(a(i, j));
        }
    }
    return std::sqrt(sum);
}

// Annihilate a(p,q) with the unitary U = D * R, where D rephases column q so
// that the pivot becomes real and R is the classical real Jacobi rotation.
void rotate(CMatrix& a, CMatrix& v, Index p, Index q) {
    const cplx apq = a(p, q);
    const double b = std::abs(apq);
    const cplx phase = apq / b;
    const double app = a(p, p).real();
    const double aqq = a(q, q).real();

    const double theta = (aqq - app) / (2.0 * b);
    double t = 1.0 / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
    if (theta < 0.0) t = -t;
    const double c = 1.0 / std::sqrt(t * t + 1.0);
    const double s = t * c;

    const cplx g_pp = c;
    const cplx g_pq = s;
    const cplx g_qp = -s * std::conj(phase);
    const cplx g_qq = c * std::conj(phase);

    // A <- A U (columns p, q)
    for (Index i = 0; i < a.rows(); ++i) {
        const cplx aip = a(i, p);
        const cplx aiq = a(i, q);
        a(i, p) = aip * g_pp + aiq * g_qp;
        a(i, q) = aip * g_pq + aiq * g_qq;
    }
    // A <- U* A (rows p, q)
    for (Index j = 0; j < a.cols(); ++j) {
        const cplx apj = a(p, j);
        const cplx aqj = a(q, j);
        a(p, j) = std::conj(g_pp) * apj + std::conj(g_qp) * aqj;
        a(q, j) = std::conj(g_pq) * apj + std::conj(g_qq) * aqj;
    }
    a(p, q) = 0.0;
    a(q, p) = 0.0;
    a(p, p) = app - t * b;
    a(q, q) = aqq + t * b;

    for (Index i = 0; i < v.rows(); ++i) {
        const cplx vip = v(i, p);
        const cplx viq = v(i, q);
        v(i, p) = vip * g_pp + viq * g_qp;
        v(i, q) = vip * g_pq + viq * g_qq;
    }
}

}  // namespace

EigenDecomposition hermitian_eigh(const CMatrix& m, double symmetrization_tol) {
    if (m.rows() != m.cols()) {
        throw std::invalid_argument("hermitian_eigh: matrix is not square");
    }
    if (m.rows() == 0) {
        throw std::invalid_argument("hermitian_eigh: empty matrix");
    }
    if (!m.allFinite()) {
        throw std::invalid_argument("hermitian_eigh: non-finite entries");
    }
    const double scale = m.norm();
    if (hermitian_residual(m) > symmetrization_tol * std::max(1.0, scale)) {
        throw std::invalid_argument("hermitian_eigh: matrix is not Hermitian within tolerance");
    }

    const Index n = m.rows();
    CMatrix a = 0.5 * (m + m.adjoint());
    CMatrix v = CMatrix::Identity(n, n);
    for (Index i = 0; i < n; ++i) a(i, i) = a(i, i).real();

    const double target = 1e-14 * scale;
    bool converged = false;
    for (int sweep = 0; sweep < kJacobiMaxSweeps; ++sweep) {
        if (off_diagonal_norm(a) <= target) {
            converged = true;
            break;
        }
        for (Index p = 0; p < n - 1; ++p) {
            for (Index q = p + 1; q < n; ++q) {
                const double b = std::abs(a(p, q));
                if (b == 0.0) continue;
                // Negligible against both diagonal entries: drop it.
                const double dp = std::abs(a(p, p).real());
                const double dq = std::abs(a(q, q).real());
                if (sweep > 3 && dp + 1e3 * b == dp && dq + 1e3 * b == dq) {
                    a(p, q) = 0.0;
                    a(q, p) = 0.0;
                    continue;
                }
                rotate(a, v, p, q);
            }
        }
    }
    if (!converged && off_diagonal_norm(a) > target) {
        throw ConvergenceError("hermitian_eigh: Jacobi iteration did not converge");
    }

    std::vector<Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Index i, Index j) { return a(i, i).real() < a(j, j).real(); });

    EigenDecomposition out;
    out.values.resize(n);
    out.vectors.resize(n, n);
    for (Index k = 0; k < n; ++k) {
        const Index src = order[static_cast<std::size_t>(k)];
        out.values(k) = a(src, src).real();
        out.vectors.col(k) = v.col(src);
    }
    return out;
}

CMatrix pinv_threshold(const CMatrix& m, double rel_tau) {
    const EigenDecomposition eig = hermitian_eigh(m);
    const double lambda_max = std::max(eig.values.maxCoeff(), 0.0);
    const Index n = m.rows();
    if (lambda_max == 0.0) {
        if (eig.values.minCoeff() < 0.0) {
            throw std::invalid_argument("pinv_threshold: matrix is negative definite, not PSD");
        }
        return CMatrix::Zero(n, n);
    }
    const double cutoff = rel_tau * lambda_max;
    if (eig.values.minCoeff() < -cutoff) {
        throw std::invalid_argument("pinv_threshold: negative eigenvalue beyond threshold, input is not PSD");
    }
    RVector inv = RVector::Zero(n);
    for (Index i = 0; i < n; ++i) {
        if (eig.values(i) > cutoff) inv(i) = 1.0 / eig.values(i);
    }
    return eig.vectors * inv.cast<cplx>().asDiagonal() * eig.vectors.adjoint();
}

CMatrix hermitian_inverse(const CMatrix& m, double rel_tau) {
    const EigenDecomposition eig = hermitian_eigh(m);
    const double lambda_max = eig.values.cwiseAbs().maxCoeff();
    const double lambda_min = eig.values.minCoeff();
    if (lambda_max == 0.0 || lambda_min <= rel_tau * lambda_max) {
        throw SingularError("hermitian_inverse: matrix is singular or not positive definite (lambda_min = " +
                            std::to_string(lambda_min) + ")");
    }
    const RVector inv = eig.values.cwiseInverse();
    return eig.vectors * inv.cast<cplx>().asDiagonal() * eig.vectors.adjoint();
}

CMatrix general_inverse(const CMatrix& m, double rel_tau) {
    if (m.rows() != m.cols()) {
        throw SingularError("general_inverse: matrix is not square");
    }
    Eigen::FullPivLU<CMatrix> lu(m);
    lu.setThreshold(rel_tau);
    if (!lu.isInvertible()) {
        throw SingularError("general_inverse: matrix is numerically singular");
    }
    return lu.inverse();
}

CMatrix expm_anti_hermitian(const CMatrix& a, double t) {
    if (anti_hermitian_residual(a) > 1e-10 * std::max(1.0, a.norm())) {
        throw std::invalid_argument("expm_anti_hermitian: generator is not anti-Hermitian");
    }
    // a = -i H with H = i a Hermitian, so exp(t a) = V exp(-i t Lambda) V*.
    const EigenDecomposition eig = hermitian_eigh(cplx(0.0, 1.0) * a);
    CVector phases(eig.values.size());
    for (Index i = 0; i < phases.size(); ++i) {
        phases(i) = std::exp(cplx(0.0, -t * eig.values(i)));
    }
    return eig.vectors * phases.asDiagonal() * eig.vectors.adjoint();
}

double hermitian_residual(const CMatrix& m) {
    if (m.rows() != m.cols()) return std::numeric_limits<double>::infinity();
    return (m - m.adjoint()).norm();
}

double anti_hermitian_residual(const CMatrix& m) {
    if (m.rows() != m.cols()) return std::numeric_limits<double>::infinity();
    return (m + m.adjoint()).norm();
}

double unitarity_residual(const CMatrix& u) {
    if (u.rows() != u.cols()) return std::numeric_limits<double>::infinity();
    return (u.adjoint() * u - CMatrix::Identity(u.rows(), u.cols())).norm();
}

}  // namespace kconn::numerics
