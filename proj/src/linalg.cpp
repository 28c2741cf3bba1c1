#include "pshrink/linalg.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "pshrink/error.h"

namespace pshrink {

const char* to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::InvalidArgument: return "invalid_argument";
        case ErrorKind::DimensionMismatch: return "dimension_mismatch";
        case ErrorKind::NotPsd: return "not_psd";
        case ErrorKind::NotPd: return "not_pd";
        case ErrorKind::NoConvergence: return "no_convergence";
        case ErrorKind::DimensionCutoff: return "dimension_cutoff";
        case ErrorKind::DegenerateF: return "degenerate_f";
        case ErrorKind::RankDegenerate: return "rank_degenerate";
        case ErrorKind::Parse: return "parse";
        case ErrorKind::Validation: return "validation";
        case ErrorKind::Io: return "io";
    }
    return "unknown";
}

SymMatrix::SymMatrix(const Matrix& m) {
    if (m.rows() != m.cols()) {
        throw Error(ErrorKind::DimensionMismatch,
                    "SymMatrix: matrix is " + std::to_string(m.rows()) + "x" +
                        std::to_string(m.cols()) + ", expected square");
    }
    if (m.rows() < 1) {
        throw Error(ErrorKind::InvalidArgument, "SymMatrix: dimension must be >= 1");
    }
    if (m.rows() > kMaxDim) {
        throw Error(ErrorKind::InvalidArgument,
                    "SymMatrix: dimension " + std::to_string(m.rows()) + " exceeds cap " +
                        std::to_string(kMaxDim));
    }
    if (!m.allFinite()) {
        throw Error(ErrorKind::InvalidArgument, "SymMatrix: non-finite entry");
    }
    m_ = 0.5 * (m + m.transpose());
}

SymMatrix SymMatrix::identity(Eigen::Index p) {
    return SymMatrix(Matrix::Identity(p, p));
}

SymMatrix SymMatrix::diagonal(const Vector& d) {
    return SymMatrix(Matrix(d.asDiagonal()));
}

double default_rel_tol(Eigen::Index p) {
    return 1e-12 * static_cast<double>(p);
}

SpectralDecomposition sym_eigen(const SymMatrix& m) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(m.matrix());
    if (solver.info() != Eigen::Success) {
        throw Error(ErrorKind::NoConvergence,
                    "sym_eigen: eigensolver did not converge for a " + std::to_string(m.dim()) +
                        "x" + std::to_string(m.dim()) + " matrix");
    }
    // Eigen returns ascending order.
    SpectralDecomposition out;
    out.eigenvalues = solver.eigenvalues().reverse();
    out.eigenvectors = solver.eigenvectors().rowwise().reverse();
    return out;
}

PseudoinverseResult pseudo_inverse_from(const SpectralDecomposition& eig, Eigen::Index rank,
                                        double cutoff) {
    const Eigen::Index p = eig.eigenvalues.size();
    const auto v = eig.eigenvectors.leftCols(rank);
    const Vector inv = eig.eigenvalues.head(rank).cwiseInverse();

    Matrix pinv = v * inv.asDiagonal() * v.transpose();
    Matrix proj = v * v.transpose();
    Matrix comp = Matrix::Identity(p, p) - proj;

    PseudoinverseResult out{SymMatrix(pinv), SymMatrix(proj), SymMatrix(comp)};
    out.rank = rank;
    out.cutoff = cutoff;
    out.min_retained = rank > 0 ? eig.eigenvalues(rank - 1) : 0.0;
    out.max_dropped = rank < p ? std::max(0.0, eig.eigenvalues(rank)) : 0.0;
    return out;
}

namespace {

void check_psd(const SpectralDecomposition& eig) {
    const double lmax = eig.eigenvalues(0);
    const double lmin = eig.eigenvalues(eig.eigenvalues.size() - 1);
    if (lmin < -1e-8 * std::max(lmax, 0.0) || (lmax <= 0.0 && lmin < 0.0)) {
        throw Error(ErrorKind::NotPsd, "pseudo_inverse: matrix is not PSD (min eigenvalue " +
                                           std::to_string(lmin) + ", max " +
                                           std::to_string(lmax) + ")");
    }
}

}  // namespace

PseudoinverseResult pseudo_inverse(const SymMatrix& m, double rel_tol) {
    if (!(rel_tol > 0.0 && rel_tol < 1.0)) {
        throw Error(ErrorKind::InvalidArgument, "pseudo_inverse: rel_tol must lie in (0, 1)");
    }
    const SpectralDecomposition eig = sym_eigen(m);
    check_psd(eig);

    const double cutoff = rel_tol * std::max(eig.eigenvalues(0), 0.0);
    Eigen::Index rank = 0;
    while (rank < eig.eigenvalues.size() && eig.eigenvalues(rank) > cutoff) {
        ++rank;
    }
    return pseudo_inverse_from(eig, rank, cutoff);
}

PseudoinverseResult pseudo_inverse(const SymMatrix& m) {
    return pseudo_inverse(m, default_rel_tol(m.dim()));
}

PseudoinverseResult pseudo_inverse_fixed_rank(const SymMatrix& m, Eigen::Index rank) {
    if (rank < 0 || rank > m.dim()) {
        throw Error(ErrorKind::InvalidArgument, "pseudo_inverse_fixed_rank: rank out of range");
    }
    const SpectralDecomposition eig = sym_eigen(m);
    check_psd(eig);
    if (rank > 0 && !(eig.eigenvalues(rank - 1) > 0.0)) {
        throw Error(ErrorKind::RankDegenerate,
                    "pseudo_inverse_fixed_rank: requested rank " + std::to_string(rank) +
                        " but eigenvalue " + std::to_string(rank) + " is not positive");
    }
    const double cutoff = rank < m.dim() ? std::max(0.0, eig.eigenvalues(rank)) : 0.0;
    return pseudo_inverse_from(eig, rank, cutoff);
}

double quad_form(const Vector& x, const SymMatrix& m) {
    if (x.size() != m.dim()) {
        throw Error(ErrorKind::DimensionMismatch,
                    "quad_form: vector has length " + std::to_string(x.size()) +
                        ", matrix has dimension " + std::to_string(m.dim()));
    }
    return x.dot(m.matrix() * x);
}

std::pair<SymMatrix, SymMatrix> projectors(const SymMatrix& m, double rel_tol) {
    PseudoinverseResult r = pseudo_inverse(m, rel_tol);
    return {std::move(r.projector), std::move(r.complement)};
}

double require_pd(const SymMatrix& m, const char* what) {
    const SpectralDecomposition eig = sym_eigen(m);
    const double lmin = eig.eigenvalues(eig.eigenvalues.size() - 1);
    if (!(lmin > 0.0)) {
        throw Error(ErrorKind::NotPd, std::string(what) +
                                          ": matrix is not positive definite (min eigenvalue " +
                                          std::to_string(lmin) + ")");
    }
    return lmin;
}

SymMatrix spd_inverse(const SymMatrix& m) {
    const SpectralDecomposition eig = sym_eigen(m);
    if (!(eig.eigenvalues.minCoeff() > 0.0)) {
        throw Error(ErrorKind::NotPd, "spd_inverse: matrix is not positive definite");
    }
    return SymMatrix(eig.apply([](double l) { return 1.0 / l; }));
}

SymMatrix spd_sqrt(const SymMatrix& m) {
    const SpectralDecomposition eig = sym_eigen(m);
    if (!(eig.eigenvalues.minCoeff() > 0.0)) {
        throw Error(ErrorKind::NotPd, "spd_sqrt: matrix is not positive definite");
    }
    return SymMatrix(eig.apply([](double l) { return std::sqrt(l); }));
}

}  // namespace pshrink
