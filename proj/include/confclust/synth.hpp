#ifndef CONFCLUST_SYNTH_HPP
#define CONFCLUST_SYNTH_HPP

#include "confclust/corrgraph.hpp"
#include "confclust/ingest.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace confclust {

enum class NoiseKind { Gaussian, Uniform };

/**
 * Random vector model: point i of cluster j is c_j + X_i with coordinate-wise
 * independent zero-mean noise X_i.
 *
 * Centers are either given explicitly (d x k) or built as mutually
 * orthogonal random directions scaled so every pair of centers sits at
 * `center_distance`. When `center_distance` is unset it is derived from
 * `intra_inter_ratio`: for Gaussian noise of scale s, intra distances
 * concentrate at sqrt(2 d s^2) and inter distances at
 * sqrt(2 d s^2 + D^2), so D = sqrt(2 d s^2 (1/r^2 - 1)).
 */
struct VectorModelSpec {
    Index d = 400;
    std::vector<Index> sizes{620, 560, 160, 580, 500, 450};
    NoiseKind noise = NoiseKind::Gaussian;
    std::vector<double> noise_scale{1.0}; ///< sigma (Gaussian) or half-width (uniform); one per cluster or one shared
    std::optional<Eigen::MatrixXd> centers;
    std::optional<double> center_distance;
    double intra_inter_ratio = 0.95;
    std::uint64_t seed = 1;

    Index k() const { return static_cast<Index>(sizes.size()); }
    Index n() const;
    double scale_of(Index cluster) const;

    /// Six clusters in 400 dimensions with sizes mirroring a 10x PBMC subsample.
    static VectorModelSpec pbmc_like(std::uint64_t seed = 1);
};

struct LabeledData {
    DataMatrix data;
    std::vector<int> labels; ///< 1-based, generation order
    GroundTruth truth;
};

LabeledData gen_vectors(const VectorModelSpec& spec);

/// Center matrix (d x k) that gen_vectors would use for this spec.
Eigen::MatrixXd model_centers(const VectorModelSpec& spec);

struct SbmSpec {
    std::vector<Index> sizes;
    double p_in = 0.9;
    double p_out = 0.02;
    std::uint64_t seed = 1;
};

struct LabeledGraph {
    CorrelationGraph graph;
    std::vector<int> labels; ///< block index, 1-based
};

LabeledGraph gen_sbm(const SbmSpec& spec);

struct PlantedGraph {
    CorrelationGraph graph;
    std::vector<Index> planted; ///< sorted
};

/// G(n, p_bg) background with a clique planted on a random vertex subset.
PlantedGraph gen_planted_dense(Index n, Index clique_size, double p_bg, std::uint64_t seed);

} // namespace confclust

#endif
