#ifndef CONFCLUST_ASSIGN_HPP
#define CONFCLUST_ASSIGN_HPP

#include "confclust/clustering.hpp"
#include "confclust/merge.hpp"

#include <optional>
#include <string_view>
#include <vector>

namespace confclust {

/// Vote depth used by the majority step: floor(delta * n / 100), capped at n-1.
Index vote_depth(Index n, double delta_percent);

/**
 * One simultaneous pass over the unassigned points of a primary clustering:
 * a point joins cluster j when more than t/2 of its top-t ranked neighbors
 * are members of primary cluster j. Points assigned in this pass do not
 * count as members for each other.
 */
Clustering majority_assign(const Clustering& primary, const Neighborhoods& nb, double delta_percent);

enum class FinalizePolicy { Leave, Plurality, RecurseReport };
std::string_view to_string(FinalizePolicy p);
FinalizePolicy parse_finalize_policy(std::string_view s);

/// Leftover points handed to a follow-up run on the sub-dataset.
struct RecursionDescriptor {
    std::vector<Index> points;
};

struct FinalizeResult {
    Clustering clustering;
    std::optional<RecursionDescriptor> recursion;
};

/// Plurality joins each leftover to the cluster holding most of its top-t
/// neighbors (ties, including all-zero overlaps, go to the lower index).
FinalizeResult finalize(const Clustering& post_majority, const Neighborhoods& nb, FinalizePolicy policy,
                        double delta_percent);

} // namespace confclust

#endif
