#ifndef CONFCLUST_PCA_HPP
#define CONFCLUST_PCA_HPP

#include "confclust/ingest.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <limits>
#include <string>
#include <vector>

namespace confclust {

struct PcaOptions {
    Index k_prime = 20;
    double tol = 1e-8;          ///< per-vector residual bound relative to the top eigenvalue
    int max_iter = 2000;
    std::uint64_t seed = 0;
    bool center = true;
    Index oversample = 10;      ///< extra block columns for the subspace iteration
};

/**
 * Truncated PCA fit.
 *
 * `components` holds k' orthonormal d-vectors as columns, ordered by
 * non-increasing eigenvalue. Each column is sign-fixed so that its entry
 * of largest magnitude is positive.
 */
struct PcaModel {
    Index k_prime = 0;
    Eigen::VectorXd mean;
    Eigen::MatrixXd components;
    Eigen::VectorXd eigenvalues;
    int iterations = 0;
    double max_residual = 0.0;
    bool converged = false;
    std::vector<std::string> warnings; ///< e.g. ConvergenceWarning
};

/// k' x n projected coordinates.
struct ProjectedMatrix {
    Eigen::MatrixXd coords;
    Index n_points() const { return coords.cols(); }
};

/// Top-k' eigenpairs of the sample covariance by seeded randomized subspace
/// iteration with Rayleigh-Ritz extraction.
PcaModel fit_pca(const DataMatrix& m, const PcaOptions& options);

ProjectedMatrix project(const PcaModel& model, const DataMatrix& m);

inline constexpr double kInfiniteRatio = std::numeric_limits<double>::infinity();

/// ||x_i - x_j|| / ||p_i - p_j||, or +inf when the projected distance is 0.
double compression_ratio(const DataMatrix& m, const ProjectedMatrix& p, Index i, Index j);

/// Compression ratios for every unordered pair, stored once per pair in
/// lexicographic (i, j) order, i < j.
class PairScores {
public:
    PairScores() = default;
    PairScores(Index n, Index k_prime, std::vector<double> values);

    Index n() const noexcept { return n_; }
    Index k_prime() const noexcept { return k_prime_; }
    std::size_t size() const noexcept { return values_.size(); }

    /// Symmetric accessor; i != j.
    double operator()(Index i, Index j) const { return values_[pair_index(i, j)]; }
    double at_index(std::size_t idx) const { return values_[idx]; }
    const std::vector<double>& values() const noexcept { return values_; }

    std::size_t pair_index(Index i, Index j) const;
    std::pair<Index, Index> pair_at(std::size_t idx) const;

    /// Binary cache: 8 magic bytes, u64 n, u64 k', then the scores as
    /// little-endian IEEE-754 doubles.
    void save(const std::filesystem::path& path) const;
    static PairScores load(const std::filesystem::path& path);

    bool operator==(const PairScores& other) const;

private:
    Index n_ = 0;
    Index k_prime_ = 0;
    std::vector<double> values_;
    std::vector<std::size_t> row_offset_;
};

PairScores all_pair_scores(const DataMatrix& m, const ProjectedMatrix& p);

/// Strict total order used everywhere pairs are ranked: larger ratio first,
/// +inf before finite, ties by pair index (i.e. lexicographic (i, j)).
inline bool ranks_before(double a, std::size_t ia, double b, std::size_t ib) {
    if (a != b) return a > b;
    return ia < ib;
}

} // namespace confclust

#endif
