#include "pshrink/randgen.h"

#include <cmath>
#include <cstdio>
#include <numbers>

#include "pshrink/error.h"

namespace pshrink {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

namespace {

std::mt19937_64 make_engine(std::uint64_t master_seed, std::uint64_t stream_id) {
    const std::uint64_t a = splitmix64(master_seed);
    const std::uint64_t b = splitmix64(a ^ splitmix64(stream_id + 0x632BE59BD9B4E019ULL));
    std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                      static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
    return std::mt19937_64(seq);
}

}  // namespace

RngStream::RngStream(std::uint64_t master_seed, std::uint64_t stream_id)
    : master_seed_(master_seed), stream_id_(stream_id),
      engine_(make_engine(master_seed, stream_id)) {}

double RngStream::uniform() {
    // 53 random bits, shifted off zero.
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

double RngStream::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
}

Vector RngStream::normals(Eigen::Index count) {
    Vector out(count);
    for (Eigen::Index i = 0; i < count; ++i) out(i) = normal();
    return out;
}

Matrix RngStream::normals(Eigen::Index rows, Eigen::Index cols) {
    Matrix out(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index j = 0; j < cols; ++j) out(i, j) = normal();
    }
    return out;
}

std::string covariance_label(const CovarianceModel& model) {
    char buf[64];
    struct Visitor {
        char* buf;
        std::string operator()(const Spiked&) const { return "spiked"; }
        std::string operator()(const Autoregressive& m) const {
            std::snprintf(buf, 64, "ar(%g)", m.rho);
            return buf;
        }
        std::string operator()(const BlockDiagonal& m) const {
            std::snprintf(buf, 64, "block(%g)", m.rho);
            return buf;
        }
        std::string operator()(const IdentityCov&) const { return "identity"; }
        std::string operator()(const CustomCov&) const { return "custom"; }
    };
    return std::visit(Visitor{buf}, model);
}

void validate_covariance_model(const CovarianceModel& model) {
    auto check_rho = [](double rho) {
        if (!(std::abs(rho) < 1.0)) {
            throw Error(ErrorKind::Validation, "rho must satisfy |rho| < 1, got " +
                                                   std::to_string(rho));
        }
    };
    if (const auto* ar = std::get_if<Autoregressive>(&model)) check_rho(ar->rho);
    if (const auto* bd = std::get_if<BlockDiagonal>(&model)) check_rho(bd->rho);
}

SymMatrix build_covariance(const CovarianceModel& model, Eigen::Index p) {
    if (p < 1) {
        throw Error(ErrorKind::InvalidArgument, "build_covariance: p must be >= 1");
    }
    validate_covariance_model(model);
    auto require_even = [p](const char* name) {
        if (p % 2 != 0) {
            throw Error(ErrorKind::InvalidArgument, std::string("build_covariance: ") + name +
                                                        " covariance requires even p, got " +
                                                        std::to_string(p));
        }
    };

    Matrix m = Matrix::Zero(p, p);
    if (std::holds_alternative<Spiked>(model)) {
        require_even("spiked");
        for (Eigen::Index i = 0; i < p; ++i) m(i, i) = i < p / 2 ? 1.0 : 10.0;
    } else if (const auto* ar = std::get_if<Autoregressive>(&model)) {
        for (Eigen::Index i = 0; i < p; ++i) {
            for (Eigen::Index j = 0; j < p; ++j) {
                m(i, j) = std::pow(ar->rho, static_cast<double>(std::abs(i - j)));
            }
        }
    } else if (const auto* bd = std::get_if<BlockDiagonal>(&model)) {
        require_even("block diagonal");
        for (Eigen::Index b = 0; b < p; b += 2) {
            m(b, b) = m(b + 1, b + 1) = 1.0;
            m(b, b + 1) = m(b + 1, b) = bd->rho;
        }
    } else if (std::holds_alternative<IdentityCov>(model)) {
        m.setIdentity();
    } else {
        const auto& custom = std::get<CustomCov>(model);
        if (custom.matrix.dim() != p) {
            throw Error(ErrorKind::DimensionMismatch,
                        "build_covariance: custom matrix has dimension " +
                            std::to_string(custom.matrix.dim()) + ", expected " +
                            std::to_string(p));
        }
        require_pd(custom.matrix, "build_covariance");
        return custom.matrix;
    }
    return SymMatrix(m);
}

NormalSampler::NormalSampler(const SymMatrix& sigma) : sqrt_sigma_(spd_sqrt(sigma)) {}

Vector NormalSampler::transform(const Vector& theta, const Vector& z) const {
    if (theta.size() != dim() || z.size() != dim()) {
        throw Error(ErrorKind::DimensionMismatch, "NormalSampler: dimension mismatch");
    }
    return theta + sqrt_sigma_.matrix() * z;
}

Vector NormalSampler::draw(const Vector& theta, RngStream& rng) const {
    return transform(theta, rng.normals(dim()));
}

Vector sample_normal(const Vector& theta, const SymMatrix& sigma, RngStream& rng) {
    if (theta.size() != sigma.dim()) {
        throw Error(ErrorKind::DimensionMismatch, "sample_normal: theta and sigma disagree");
    }
    return NormalSampler(sigma).draw(theta, rng);
}

WishartDraw wishart_from_normals(const Matrix& z, const SymMatrix& sqrt_sigma) {
    if (z.cols() != sqrt_sigma.dim()) {
        throw Error(ErrorKind::DimensionMismatch, "wishart_from_normals: dimension mismatch");
    }
    Matrix y = z * sqrt_sigma.matrix();
    SymMatrix s(y.transpose() * y);
    return WishartDraw{std::move(y), std::move(s), z.rows(), z.cols()};
}

WishartDraw sample_wishart(Eigen::Index n, const NormalSampler& sampler, RngStream& rng) {
    if (n < 1) {
        throw Error(ErrorKind::InvalidArgument, "sample_wishart: n must be >= 1");
    }
    return wishart_from_normals(rng.normals(n, sampler.dim()), sampler.sqrt_sigma());
}

WishartDraw sample_wishart(Eigen::Index n, const SymMatrix& sigma, RngStream& rng) {
    return sample_wishart(n, NormalSampler(sigma), rng);
}

}  // namespace pshrink
