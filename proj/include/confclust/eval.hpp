#ifndef CONFCLUST_EVAL_HPP
#define CONFCLUST_EVAL_HPP

#include "confclust/clustering.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace confclust {

using Count = std::int64_t;

/// counts[r][c] = |cluster r ∩ true cluster c+1|. Unassigned and unlabeled
/// points are excluded and tallied separately.
struct ConfusionTable {
    std::vector<std::vector<Count>> counts;
    int k = 0;
    Count unassigned = 0;
    Count unlabeled_assigned = 0;

    Count total() const;
    std::string to_text() const;
};

ConfusionTable confusion_table(const Clustering& c, std::span<const int> truth, int k);

/// 1-based argmax of the row; ties go to the smaller index.
int cluster_identity(std::span<const Count> row);

/// 1 - max(row) / sum(row).
double cluster_error(std::span<const Count> row);

struct ErrorSummary {
    double e_inf = 0.0;
    double e_avg = 0.0;  ///< sum of per-cluster errors
    double e_mean = 0.0; ///< e_avg divided by the number of non-empty clusters
    std::vector<double> per_cluster;
};

/// Empty rows are skipped.
ErrorSummary error_summary(const ConfusionTable& table);

/// max_i |set ∩ V_i| / |set|.
double zeta(std::span<const Index> set, std::span<const int> truth);

/// Adjusted Rand index of two label vectors of equal length.
double adjusted_rand_index(std::span<const int> a, std::span<const int> b);

/// ARI restricted to points assigned in both clusterings.
double partition_agreement(const Clustering& a, const Clustering& b);

/// Same, over two label vectors where 0 marks an unassigned point.
double partition_agreement(std::span<const int> a, std::span<const int> b);

} // namespace confclust

#endif
