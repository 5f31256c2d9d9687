#ifndef CONFCLUST_CLUSTERING_HPP
#define CONFCLUST_CLUSTERING_HPP

#include "confclust/ingest.hpp"

#include <string_view>
#include <vector>

namespace confclust {

enum class Stage { Primary, PostMajority, Final };
std::string_view to_string(Stage s);

/// Labeled partition-with-remainder of n points. Clusters and the
/// unassigned list are kept sorted.
struct Clustering {
    Index n = 0;
    std::vector<std::vector<Index>> clusters;
    std::vector<Index> unassigned;
    Stage stage = Stage::Primary;

    /// 1-based cluster index per point, 0 for unassigned.
    std::vector<int> labels() const;
    std::size_t assigned_count() const;

    /// Throws InvalidInput when clusters overlap each other or the
    /// unassigned list, or reference points outside [0, n).
    void check_disjoint() const;
};

} // namespace confclust

#endif
