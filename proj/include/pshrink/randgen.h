#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <variant>

#include "pshrink/linalg.h"

namespace pshrink {

/**
 * Reproducible normal-variate stream keyed by (master_seed, stream_id).
 *
 * The engine is a 64-bit Mersenne twister seeded from a SplitMix64 hash of
 * the key pair; standard normals come from the Box-Muller transform, so the
 * k-th variate is a fixed function of (master_seed, stream_id, k) on every
 * platform. Streams are cheap enough to build one per replicate.
 */
class RngStream {
public:
    RngStream(std::uint64_t master_seed, std::uint64_t stream_id);

    std::uint64_t master_seed() const { return master_seed_; }
    std::uint64_t stream_id() const { return stream_id_; }

    /// Uniform on the open interval (0, 1).
    double uniform();
    double normal();
    Vector normals(Eigen::Index count);
    Matrix normals(Eigen::Index rows, Eigen::Index cols);

private:
    std::uint64_t master_seed_;
    std::uint64_t stream_id_;
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

std::uint64_t splitmix64(std::uint64_t x);

struct Spiked {};
struct Autoregressive {
    double rho;
};
struct BlockDiagonal {
    double rho;
};
struct IdentityCov {};
struct CustomCov {
    SymMatrix matrix;
};

using CovarianceModel = std::variant<Spiked, Autoregressive, BlockDiagonal, IdentityCov, CustomCov>;

/// Short label used in CSV output, e.g. "spiked", "ar(0.5)".
std::string covariance_label(const CovarianceModel& model);

/// Checks the rho bound of a model; materialization checks the rest.
void validate_covariance_model(const CovarianceModel& model);

SymMatrix build_covariance(const CovarianceModel& model, Eigen::Index p);

/**
 * Sampler for N_p(theta, Sigma) that caches the symmetric square root A of
 * Sigma. draw() returns theta + A z with z taken from the stream.
 */
class NormalSampler {
public:
    explicit NormalSampler(const SymMatrix& sigma);

    Eigen::Index dim() const { return sqrt_sigma_.dim(); }
    const SymMatrix& sqrt_sigma() const { return sqrt_sigma_; }

    Vector draw(const Vector& theta, RngStream& rng) const;
    /// theta + A z for caller-supplied z.
    Vector transform(const Vector& theta, const Vector& z) const;

private:
    SymMatrix sqrt_sigma_;
};

Vector sample_normal(const Vector& theta, const SymMatrix& sigma, RngStream& rng);

struct WishartDraw {
    Matrix y;     // n x p, rows i.i.d. N_p(0, Sigma)
    SymMatrix s;  // Y'Y
    Eigen::Index n = 0;
    Eigen::Index p = 0;
};

/// Y = Z A with Z an n x p standard normal matrix filled row by row.
WishartDraw wishart_from_normals(const Matrix& z, const SymMatrix& sqrt_sigma);
WishartDraw sample_wishart(Eigen::Index n, const SymMatrix& sigma, RngStream& rng);
WishartDraw sample_wishart(Eigen::Index n, const NormalSampler& sampler, RngStream& rng);

}  // namespace pshrink
