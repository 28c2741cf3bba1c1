#pragma once

#include <cstddef>
#include <optional>
#include <utility>

#include <Eigen/Dense>

namespace pshrink {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Largest dimension accepted by SymMatrix. Everything here is dense.
inline constexpr Eigen::Index kMaxDim = 512;

/**
 * Dense symmetric matrix.
 *
 * Input is symmetrized as (M + M')/2 on construction, so the stored entries
 * are exactly symmetric. Rejects non-square, empty, oversized or non-finite
 * input.
 */
class SymMatrix {
public:
    explicit SymMatrix(const Matrix& m);

    static SymMatrix identity(Eigen::Index p);
    static SymMatrix diagonal(const Vector& d);

    Eigen::Index dim() const { return m_.rows(); }
    const Matrix& matrix() const { return m_; }
    double operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }

private:
    Matrix m_;
};

/// Eigenvalues in nonincreasing order; eigenvectors as orthonormal columns.
struct SpectralDecomposition {
    Vector eigenvalues;
    Matrix eigenvectors;

    /// V diag(f(lambda)) V'.
    template <typename Fn>
    Matrix apply(Fn&& f) const {
        Vector d = eigenvalues.unaryExpr(std::forward<Fn>(f));
        return eigenvectors * d.asDiagonal() * eigenvectors.transpose();
    }
};

struct PseudoinverseResult {
    SymMatrix pinv;        // S+
    SymMatrix projector;   // S S+
    SymMatrix complement;  // I - S S+
    Eigen::Index rank = 0;
    double cutoff = 0.0;   // absolute eigenvalue threshold
    double min_retained = 0.0;  // smallest eigenvalue kept
    double max_dropped = 0.0;   // largest eigenvalue zeroed (0 if none)
};

/// Default relative rank tolerance for a p x p matrix: 1e-12 * p.
double default_rel_tol(Eigen::Index p);

SpectralDecomposition sym_eigen(const SymMatrix& m);

/**
 * Moore-Penrose inverse of a symmetric PSD matrix.
 *
 * Eigenvalues at or below rel_tol * lambda_max are treated as zero. Throws
 * ErrorKind::NotPsd when the smallest eigenvalue is below -1e-8 * lambda_max.
 */
PseudoinverseResult pseudo_inverse(const SymMatrix& m, double rel_tol);
PseudoinverseResult pseudo_inverse(const SymMatrix& m);

/// Same, but keeps exactly the `rank` leading eigenvalues. Used where rank
/// must stay fixed under small perturbations (finite differences).
PseudoinverseResult pseudo_inverse_fixed_rank(const SymMatrix& m, Eigen::Index rank);

PseudoinverseResult pseudo_inverse_from(const SpectralDecomposition& eig, Eigen::Index rank,
                                        double cutoff);

double quad_form(const Vector& x, const SymMatrix& m);

/// (P_S, P_S_perp) = (S S+, I - S S+).
std::pair<SymMatrix, SymMatrix> projectors(const SymMatrix& m, double rel_tol);

/// Inverse of a symmetric positive definite matrix via its spectrum. Throws
/// ErrorKind::NotPd if any eigenvalue is <= 0.
SymMatrix spd_inverse(const SymMatrix& m);

/// Symmetric PD square root A with A*A = M.
SymMatrix spd_sqrt(const SymMatrix& m);

/// Throws ErrorKind::NotPd unless the smallest eigenvalue is strictly
/// positive. Returns the smallest eigenvalue.
double require_pd(const SymMatrix& m, const char* what);

}  // namespace pshrink
