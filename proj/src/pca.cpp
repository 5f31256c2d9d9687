#include "confclust/pca.hpp"

#include "confclust/error.hpp"
#include "confclust/random.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <optional>

namespace confclust {

namespace {

// Dense covariance is formed explicitly up to this many features; beyond it
// the operator is applied implicitly through the data matrix.
constexpr Index kExplicitCovarianceLimit = 4096;

class CovarianceOperator {
public:
    CovarianceOperator(const DataMatrix& m, const Eigen::VectorXd& mean) : m_(m), mean_(mean) {
        const double scale = 1.0 / static_cast<double>(std::max<Index>(m.n_points(), 1));
        if (m.n_features() <= kExplicitCovarianceLimit) {
            const Index d = m.n_features();
            Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d, d);
            if (m.is_sparse()) {
                DataMatrix::Sparse gram = m.sparse() * DataMatrix::Sparse(m.sparse().transpose());
                cov = Eigen::MatrixXd(gram);
                cov -= static_cast<double>(m.n_points()) * mean_ * mean_.transpose();
            } else {
                Eigen::MatrixXd centered = m.dense().colwise() - mean_;
                cov.selfadjointView<Eigen::Lower>().rankUpdate(centered);
                cov = cov.selfadjointView<Eigen::Lower>();
            }
            explicit_ = cov * scale;
        }
        scale_ = scale;
    }

    Eigen::MatrixXd apply(const Eigen::MatrixXd& q) const {
        if (explicit_) return *explicit_ * q;
        // C q = (X - mu 1^T)(X - mu 1^T)^T q / n, without forming X - mu 1^T.
        Eigen::MatrixXd w;
        if (m_.is_sparse()) {
            w = m_.sparse().transpose() * q;
        } else {
            w = m_.dense().transpose() * q;
        }
        w.rowwise() -= (mean_.transpose() * q);
        Eigen::MatrixXd out;
        if (m_.is_sparse()) {
            out = m_.sparse() * w;
        } else {
            out = m_.dense() * w;
        }
        out -= mean_ * w.colwise().sum();
        return out * scale_;
    }

private:
    const DataMatrix& m_;
    const Eigen::VectorXd& mean_;
    std::optional<Eigen::MatrixXd> explicit_;
    double scale_ = 1.0;
};

Eigen::MatrixXd orthonormalize(const Eigen::MatrixXd& a) {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
    return qr.householderQ() * Eigen::MatrixXd::Identity(a.rows(), a.cols());
}

void fix_signs(Eigen::MatrixXd& vectors) {
    for (Index c = 0; c < vectors.cols(); ++c) {
        Index best = 0;
        double best_abs = -1.0;
        for (Index r = 0; r < vectors.rows(); ++r) {
            const double a = std::abs(vectors(r, c));
            if (a > best_abs) {
                best_abs = a;
                best = r;
            }
        }
        if (vectors(best, c) < 0.0) vectors.col(c) *= -1.0;
    }
}

void put_u64(std::ofstream& out, std::uint64_t v) {
    if constexpr (std::endian::native == std::endian::big) v = __builtin_bswap64(v);
    out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

std::uint64_t get_u64(std::ifstream& in) {
    std::uint64_t v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof(v));
    if constexpr (std::endian::native == std::endian::big) v = __builtin_bswap64(v);
    return v;
}

constexpr char kCacheMagic[8] = {'C', 'C', 'P', 'S', 'C', 'O', 'R', '1'};

} // namespace

PcaModel fit_pca(const DataMatrix& m, const PcaOptions& options) {
    const Index d = m.n_features();
    const Index n = m.n_points();
    if (options.k_prime < 1 || options.k_prime > std::min(d, n - 1)) {
        throw Error(ErrorKind::InvalidParameter,
                    "k' = " + std::to_string(options.k_prime) + " outside [1, " +
                        std::to_string(std::min(d, n - 1)) + "]");
    }
    if (!(options.tol > 0.0)) throw Error(ErrorKind::InvalidParameter, "tol must be positive");
    if (options.max_iter < 1) throw Error(ErrorKind::InvalidParameter, "max_iter must be >= 1");

    PcaModel model;
    model.k_prime = options.k_prime;
    model.mean = options.center ? m.column_mean() : Eigen::VectorXd::Zero(d);

    const CovarianceOperator cov(m, model.mean);
    const Index block = std::min(d, options.k_prime + std::max<Index>(options.oversample, 0));

    Rng rng(options.seed);
    Eigen::MatrixXd start(d, block);
    for (Index c = 0; c < block; ++c) {
        for (Index r = 0; r < d; ++r) start(r, c) = rng.normal();
    }
    Eigen::MatrixXd q = orthonormalize(start);

    Eigen::MatrixXd ritz_vectors;
    Eigen::VectorXd ritz_values;
    for (int iter = 1; iter <= options.max_iter; ++iter) {
        const Eigen::MatrixXd cq = cov.apply(q);
        Eigen::MatrixXd h = q.transpose() * cq;
        h = 0.5 * (h + h.transpose()).eval();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(h);
        // Eigen sorts ascending; reverse to non-increasing.
        const Eigen::VectorXd theta = eig.eigenvalues().reverse();
        const Eigen::MatrixXd s = eig.eigenvectors().rowwise().reverse();
        ritz_vectors = q * s;
        const Eigen::MatrixXd c_ritz = cq * s;
        ritz_values = theta;

        const double top = std::max(theta[0], 0.0);
        double worst = 0.0;
        bool ok = true;
        for (Index j = 0; j < options.k_prime; ++j) {
            const double r = (c_ritz.col(j) - theta[j] * ritz_vectors.col(j)).norm();
            worst = std::max(worst, r);
            if (r > options.tol * top) ok = false;
        }
        model.iterations = iter;
        model.max_residual = worst;
        if (ok) {
            model.converged = true;
            break;
        }
        q = orthonormalize(c_ritz);
    }
    if (!model.converged) {
        model.warnings.push_back("ConvergenceWarning: subspace iteration reached max_iter=" +
                                 std::to_string(options.max_iter) + " with residual " +
                                 std::to_string(model.max_residual));
    }

    model.components = ritz_vectors.leftCols(options.k_prime);
    // The Ritz basis is orthonormal up to rounding; re-orthonormalize while
    // keeping column order and direction.
    {
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(model.components);
        Eigen::MatrixXd qthin = qr.householderQ() * Eigen::MatrixXd::Identity(d, options.k_prime);
        const Eigen::MatrixXd r = qr.matrixQR().topLeftCorner(options.k_prime, options.k_prime);
        for (Index c = 0; c < options.k_prime; ++c) {
            if (r(c, c) < 0.0) qthin.col(c) *= -1.0;
        }
        model.components = qthin;
    }
    fix_signs(model.components);
    model.eigenvalues = ritz_values.head(options.k_prime).cwiseMax(0.0);
    return model;
}

ProjectedMatrix project(const PcaModel& model, const DataMatrix& m) {
    if (m.n_features() != model.mean.size()) {
        throw Error(ErrorKind::DimensionMismatch,
                    "model has dimension " + std::to_string(model.mean.size()) + ", data has " +
                        std::to_string(m.n_features()));
    }
    ProjectedMatrix p;
    if (m.is_sparse()) {
        p.coords = model.components.transpose() * m.sparse();
    } else {
        p.coords = model.components.transpose() * m.dense();
    }
    p.coords.colwise() -= model.components.transpose() * model.mean;
    return p;
}

namespace {

// Projected distances at or below this fraction of the original count as 0.
constexpr double kZeroProjection = 1e-12;

double ratio_or_infinite(double original_sq, double projected_sq) {
    if (projected_sq <= kZeroProjection * kZeroProjection * original_sq) return kInfiniteRatio;
    return std::sqrt(original_sq) / std::sqrt(projected_sq);
}

} // namespace

double compression_ratio(const DataMatrix& m, const ProjectedMatrix& p, Index i, Index j) {
    const Index n = m.n_points();
    if (p.n_points() != n) throw Error(ErrorKind::DimensionMismatch, "projection and data differ in n");
    if (i < 0 || j < 0 || i >= n || j >= n) {
        throw Error(ErrorKind::InvalidParameter, "pair index out of range");
    }
    if (i == j) throw Error(ErrorKind::InvalidParameter, "compression ratio needs i != j");
    return ratio_or_infinite(m.squared_distance(i, j), (p.coords.col(i) - p.coords.col(j)).squaredNorm());
}

PairScores::PairScores(Index n, Index k_prime, std::vector<double> values)
    : n_(n), k_prime_(k_prime), values_(std::move(values)) {
    if (n < 0) throw Error(ErrorKind::InvalidParameter, "negative n");
    const auto expected = static_cast<std::size_t>(n) * static_cast<std::size_t>(std::max<Index>(n - 1, 0)) / 2;
    if (values_.size() != expected) {
        throw Error(ErrorKind::DimensionMismatch, "expected " + std::to_string(expected) +
                                                      " pair scores, got " + std::to_string(values_.size()));
    }
    row_offset_.resize(static_cast<std::size_t>(n) + 1, 0);
    for (Index i = 0; i < n; ++i) {
        row_offset_[static_cast<std::size_t>(i) + 1] =
            row_offset_[static_cast<std::size_t>(i)] + static_cast<std::size_t>(n - i - 1);
    }
}

std::size_t PairScores::pair_index(Index i, Index j) const {
    if (i > j) std::swap(i, j);
    return row_offset_[static_cast<std::size_t>(i)] + static_cast<std::size_t>(j - i - 1);
}

std::pair<Index, Index> PairScores::pair_at(std::size_t idx) const {
    auto it = std::upper_bound(row_offset_.begin(), row_offset_.end(), idx);
    const auto i = static_cast<Index>(it - row_offset_.begin()) - 1;
    const auto j = i + 1 + static_cast<Index>(idx - row_offset_[static_cast<std::size_t>(i)]);
    return {i, j};
}

bool PairScores::operator==(const PairScores& other) const {
    if (n_ != other.n_ || k_prime_ != other.k_prime_ || values_.size() != other.values_.size()) {
        return false;
    }
    return std::memcmp(values_.data(), other.values_.data(), values_.size() * sizeof(double)) == 0;
}

void PairScores::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
    out.write(kCacheMagic, sizeof(kCacheMagic));
    put_u64(out, static_cast<std::uint64_t>(n_));
    put_u64(out, static_cast<std::uint64_t>(k_prime_));
    for (double v : values_) put_u64(out, std::bit_cast<std::uint64_t>(v));
    if (!out) throw Error(ErrorKind::IoError, "short write to " + path.string());
}

PairScores PairScores::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());
    char magic[8] = {};
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kCacheMagic, sizeof(magic)) != 0) {
        throw Error(ErrorKind::FormatError, path.string() + " is not a pair-score cache");
    }
    const auto n = static_cast<Index>(get_u64(in));
    const auto k_prime = static_cast<Index>(get_u64(in));
    const auto count = static_cast<std::size_t>(n) * static_cast<std::size_t>(std::max<Index>(n - 1, 0)) / 2;
    std::vector<double> values(count);
    for (auto& v : values) v = std::bit_cast<double>(get_u64(in));
    if (!in) throw Error(ErrorKind::FormatError, path.string() + " is truncated");
    return PairScores(n, k_prime, std::move(values));
}

PairScores all_pair_scores(const DataMatrix& m, const ProjectedMatrix& p) {
    const Index n = m.n_points();
    if (p.n_points() != n) throw Error(ErrorKind::DimensionMismatch, "projection and data differ in n");
    const auto count = static_cast<std::size_t>(n) * static_cast<std::size_t>(std::max<Index>(n - 1, 0)) / 2;
    std::vector<double> values(count);

    const Eigen::MatrixXd& coords = p.coords;
    std::vector<std::size_t> offset(static_cast<std::size_t>(n) + 1, 0);
    for (Index i = 0; i < n; ++i) {
        offset[static_cast<std::size_t>(i) + 1] = offset[static_cast<std::size_t>(i)] + static_cast<std::size_t>(n - i - 1);
    }

    // Every slot is written by exactly one iteration, so the result does not
    // depend on the schedule.
#pragma omp parallel for schedule(dynamic, 16)
    for (Index i = 0; i < n; ++i) {
        std::size_t slot = offset[static_cast<std::size_t>(i)];
        for (Index j = i + 1; j < n; ++j, ++slot) {
            values[slot] = ratio_or_infinite(m.squared_distance(i, j),
                                             (coords.col(i) - coords.col(j)).squaredNorm());
        }
    }
    return PairScores(n, coords.rows(), std::move(values));
}

} // namespace confclust
