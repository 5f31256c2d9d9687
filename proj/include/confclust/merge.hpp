#ifndef CONFCLUST_MERGE_HPP
#define CONFCLUST_MERGE_HPP

#include "confclust/clustering.hpp"
#include "confclust/confident.hpp"
#include "confclust/pca.hpp"

#include <span>
#include <string_view>
#include <vector>

namespace confclust {

/**
 * Per-vertex ranking of the other vertices by compression ratio with that
 * vertex (descending, ties by vertex index).
 *
 * `neighbors(u)` is N_u at the configured delta: the first
 * floor(delta/100 * (n-1)) entries. Deeper entries are kept when a caller
 * asks for a minimum depth (the majority vote uses floor(delta*n/100)).
 */
class Neighborhoods {
public:
    Neighborhoods() = default;
    /// `ranked` is row-major n x depth; list_length <= depth.
    Neighborhoods(Index n, double delta_percent, Index list_length, Index depth, std::vector<Index> ranked);

    /// Explicit lists (each of length `list_length`), for constructed instances.
    static Neighborhoods from_lists(const std::vector<std::vector<Index>>& lists, double delta_percent = 0.0);

    Index n() const noexcept { return n_; }
    double delta_percent() const noexcept { return delta_percent_; }
    Index list_length() const noexcept { return list_length_; }
    Index depth() const noexcept { return depth_; }

    std::span<const Index> neighbors(Index u) const { return prefix(u, list_length_); }
    /// First `t` ranked vertices; t <= depth().
    std::span<const Index> prefix(Index u, Index t) const;

private:
    Index n_ = 0;
    double delta_percent_ = 0.0;
    Index list_length_ = 0;
    Index depth_ = 0;
    std::vector<Index> ranked_;
};

/// N_u for every vertex at delta percent; `min_depth` extends the stored
/// ranking without changing list_length().
Neighborhoods delta_neighborhoods(const PairScores& scores, double delta_percent, Index min_depth = 0);

/// Mean over u in a of |N_u ∩ b|. Asymmetric.
double pair_affinity(std::span<const Index> a, std::span<const Index> b, const Neighborhoods& nb);

/// The gap rule has no previous merge to compare the first candidate with;
/// that candidate is instead held to `z_floor`.
struct StoppingRule {
    enum class Kind { TargetCount, Gap, ZFloor };
    Kind kind = Kind::Gap;
    Index target_count = 1;
    double gap_ratio = 0.25;
    double z_floor = 1.0;

    static StoppingRule target(Index count) { return {Kind::TargetCount, count, 0.25, 0.0}; }
    static StoppingRule gap(double ratio = 0.25, double first_floor = 1.0) { return {Kind::Gap, 1, ratio, first_floor}; }
    static StoppingRule floor(double z) { return {Kind::ZFloor, 1, 0.25, z}; }
};
std::string_view to_string(StoppingRule::Kind k);

struct MergeStep {
    Index round = 0;
    Index set_a = 0;  ///< lineage id (lowest order_found) of the first set
    Index set_b = 0;
    double z_max = 0.0;
    Index size_a = 0;
    Index size_b = 0;
    bool accepted = true; ///< false for the candidate that triggered a stop
};

enum class MergeStatus { RuleFired, ExhaustedScores, SingleSet };
std::string_view to_string(MergeStatus s);

struct MergeResult {
    Clustering primary;
    std::vector<MergeStep> z_history;
    std::vector<std::vector<Index>> lineage; ///< order_found ids per primary cluster
    MergeStatus status = MergeStatus::RuleFired;
};

/**
 * Greedy merging of confident sets by Z = Y_ij * Y_ji.
 *
 * Each round recomputes Y from the current set members, merges the pair with
 * the largest Z (ties: lexicographically smallest pair of lineage ids) and
 * stops when the rule fires. A zero Z_max is never merged.
 */
MergeResult form_primary_clusters(const ExtractionResult& extraction, const Neighborhoods& nb,
                                  const StoppingRule& rule);

/// Y matrix for the given sets (row i, column j = affinity of set i to set j).
std::vector<std::vector<double>> affinity_matrix(const std::vector<std::vector<Index>>& sets,
                                                 const Neighborhoods& nb);

} // namespace confclust

#endif
