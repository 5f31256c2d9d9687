#ifndef CONFCLUST_CORRGRAPH_HPP
#define CONFCLUST_CORRGRAPH_HPP

#include "confclust/pca.hpp"

#include <filesystem>
#include <span>
#include <utility>
#include <vector>

namespace confclust {

using Edge = std::pair<Index, Index>;

/// Undirected simple graph with sorted adjacency lists.
class CorrelationGraph {
public:
    CorrelationGraph() = default;
    /// Self-loops are rejected; duplicate edges (in either orientation) are
    /// collapsed.
    CorrelationGraph(Index n, std::vector<Edge> edges, double gamma_percent = 0.0);

    Index n() const noexcept { return n_; }
    std::size_t num_edges() const noexcept { return edges_.size(); }
    double gamma_percent() const noexcept { return gamma_percent_; }

    /// Edges as (i, j), i < j, lexicographically sorted.
    const std::vector<Edge>& edges() const noexcept { return edges_; }
    std::span<const Index> neighbors(Index u) const {
        return {adjacency_.data() + offsets_[static_cast<std::size_t>(u)],
                adjacency_.data() + offsets_[static_cast<std::size_t>(u) + 1]};
    }
    Index degree(Index u) const { return static_cast<Index>(neighbors(u).size()); }
    bool has_edge(Index u, Index v) const;

private:
    Index n_ = 0;
    double gamma_percent_ = 0.0;
    std::vector<Edge> edges_;
    std::vector<std::size_t> offsets_{0};
    std::vector<Index> adjacency_;
};

/// floor(percent / 100 * total) with a guard against representation error
/// (e.g. 3% of 100 must give 3, not 2).
std::size_t percent_count(double percent, std::size_t total);

/// Pair indices of the `count` top-ranked pairs, in rank order.
std::vector<std::size_t> top_ranked_pairs(const PairScores& scores, std::size_t count);

/// Keeps the floor(gamma/100 * C(n,2)) pairs with the largest compression
/// ratio (ties by lexicographic pair order).
CorrelationGraph build_correlation_graph(const PairScores& scores, double gamma_percent);

struct GraphQuality {
    double alpha = 0.0; ///< fraction of intra-cluster pairs present as edges
    double beta = 0.0;  ///< fraction of edges that join different clusters
    std::size_t intra_edges = 0;
    std::size_t inter_edges = 0;
    std::size_t intra_pairs = 0;
};

/// `labels[v]` is the 1-based cluster of vertex v; 0 means unlabeled.
GraphQuality graph_quality(const CorrelationGraph& g, std::span<const int> labels);

struct CurvePoint {
    double percent = 0.0;
    std::size_t pairs = 0;
    double intra_fraction = 0.0;
};

/// Fraction of intra-cluster pairs among the top-p% ranked pairs, for each
/// p in `grid`. Uses the same ordering as build_correlation_graph.
std::vector<CurvePoint> compression_curve(const PairScores& scores, std::span<const int> labels,
                                          std::span<const double> grid);

/// "i j" per line, 0-based, i < j.
void write_edge_list(const std::filesystem::path& path, const CorrelationGraph& g);

} // namespace confclust

#endif
