#ifndef CONFCLUST_CONFIDENT_HPP
#define CONFCLUST_CONFIDENT_HPP

#include "confclust/corrgraph.hpp"
#include "confclust/error.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace confclust {

/// Graph with a vertex mask; removed vertices and their edges are ignored.
class ResidualGraph {
public:
    explicit ResidualGraph(const CorrelationGraph& g) : graph_(&g), active_(static_cast<std::size_t>(g.n()), 1) {}

    const CorrelationGraph& graph() const noexcept { return *graph_; }
    Index n() const noexcept { return graph_->n(); }
    bool active(Index v) const { return active_[static_cast<std::size_t>(v)] != 0; }
    Index active_count() const;
    std::size_t active_edges() const;

    void remove(std::span<const Index> vertices);

    /// y = A' x restricted to active vertices (inactive rows are zero).
    void multiply(const Eigen::MatrixXd& x, Eigen::MatrixXd& y) const;

private:
    const CorrelationGraph* graph_;
    std::vector<char> active_;
};

struct EigenOptions {
    double tol = 1e-9;
    int max_iter = 5000;
    std::uint64_t seed = 0;
    Index block_size = 8;
};

struct EigenResult {
    double value = 0.0;
    Eigen::VectorXd vector;
    int iterations = 0;
    double residual = 0.0;
    bool converged = false;
};

class EigenConvergenceError : public Error {
public:
    EigenConvergenceError(const std::string& what, EigenResult best)
        : Error(ErrorKind::ConvergenceError, what), best_(std::move(best)) {}
    const EigenResult& best() const noexcept { return best_; }

private:
    EigenResult best_;
};

/**
 * Dominant eigenpair of the residual adjacency matrix.
 *
 * Seeded block power iteration with Rayleigh-Ritz extraction; the block
 * keeps near-tied leading eigenvalues from stalling convergence. Stops when
 * ||Av - lambda v|| <= tol * max(lambda, 1). The vector has unit norm and a
 * non-negative entry sum (exact zero sum: first nonzero entry positive).
 *
 * Throws NoEdges on an edgeless residual and EigenConvergenceError (with
 * the best iterate) after max_iter.
 */
EigenResult top_eigenvector(const ResidualGraph& g, const EigenOptions& options);

struct PrefixSelection {
    std::vector<Index> vertices; ///< top-c vertices in rank order
    Index c = 0;
    std::size_t edges = 0;       ///< edges induced among the prefix
};

/// Ranks active vertices by eigenvector entry (descending, ties by index;
/// clearly negative entries dropped) and returns the longest prefix of
/// length t >= 3 holding at least C(t,2)/2 edges. Empty if none qualifies.
PrefixSelection select_dense_prefix(const Eigen::VectorXd& v, const ResidualGraph& g);

struct ConfidentSet {
    std::vector<Index> members;  ///< sorted
    std::vector<Index> prefix;   ///< U_c in rank order
    Index order_found = 0;
    Index prefix_size_c = 0;
    double mean_degree_filter = 0.0; ///< c / 2
};

/// Members of the prefix whose induced degree is strictly greater than c/2.
/// Returns an empty member list when nothing survives.
ConfidentSet filter_low_degree(const PrefixSelection& prefix, const ResidualGraph& g);

struct EigenRound {
    double value = 0.0;
    int iterations = 0;
    double residual = 0.0;
    Index prefix_size = 0;
};

enum class ExtractionStop { PrefixBelowThreshold, NoEdges, EmptyPrefix, EmptyFilter };
std::string_view to_string(ExtractionStop s);

struct ExtractionResult {
    std::vector<ConfidentSet> sets;
    std::vector<Index> remaining; ///< sorted
    std::vector<EigenRound> eigen_history;
    ExtractionStop stop = ExtractionStop::NoEdges;
    Index stop_threshold = 0;
};

struct ExtractionOptions {
    Index stop_threshold = 20;
    EigenOptions eigen;
};

/// Default termination size: max(20, round(2/3 * gamma * 100 * n / 5000)).
Index default_stop_threshold(Index n, double gamma_percent);

/// Repeats eigenvector -> dense prefix -> degree filter on the residual
/// graph, removing each accepted set, until the prefix is smaller than the
/// threshold or the residual has no edges. A round whose prefix falls below
/// the threshold is discarded.
ExtractionResult extract_confident_sets(const CorrelationGraph& g, const ExtractionOptions& options);

} // namespace confclust

#endif
