#include "confclust/assign.hpp"

#include "confclust/corrgraph.hpp"
#include "confclust/error.hpp"

#include <algorithm>

namespace confclust {

std::string_view to_string(Stage s) {
    switch (s) {
    case Stage::Primary: return "primary";
    case Stage::PostMajority: return "post_majority";
    case Stage::Final: return "final";
    }
    return "unknown";
}

std::vector<int> Clustering::labels() const {
    std::vector<int> out(static_cast<std::size_t>(n), 0);
    for (std::size_t c = 0; c < clusters.size(); ++c) {
        for (Index v : clusters[c]) out[static_cast<std::size_t>(v)] = static_cast<int>(c) + 1;
    }
    return out;
}

std::size_t Clustering::assigned_count() const {
    std::size_t total = 0;
    for (const auto& c : clusters) total += c.size();
    return total;
}

void Clustering::check_disjoint() const {
    std::vector<char> seen(static_cast<std::size_t>(n), 0);
    auto mark = [&](Index v) {
        if (v < 0 || v >= n) throw Error(ErrorKind::InvalidInput, "vertex " + std::to_string(v) + " outside [0, n)");
        if (seen[static_cast<std::size_t>(v)]) throw Error(ErrorKind::InvalidInput, "vertex " + std::to_string(v) + " listed twice");
        seen[static_cast<std::size_t>(v)] = 1;
    };
    for (const auto& c : clusters) {
        for (Index v : c) mark(v);
    }
    for (Index v : unassigned) mark(v);
}

Index vote_depth(Index n, double delta_percent) {
    const auto t = static_cast<Index>(percent_count(delta_percent, static_cast<std::size_t>(n)));
    return std::min(t, std::max<Index>(n - 1, 0));
}

namespace {

std::vector<std::size_t> overlap_counts(std::span<const Index> top, const std::vector<int>& owner, std::size_t clusters) {
    std::vector<std::size_t> counts(clusters, 0);
    for (Index v : top) {
        const int o = owner[static_cast<std::size_t>(v)];
        if (o > 0) ++counts[static_cast<std::size_t>(o - 1)];
    }
    return counts;
}

} // namespace

Clustering majority_assign(const Clustering& primary, const Neighborhoods& nb, double delta_percent) {
    if (primary.stage != Stage::Primary) throw Error(ErrorKind::InvalidInput, "majority_assign expects a primary clustering");
    if (!(delta_percent > 0.0 && delta_percent <= 100.0)) {
        throw Error(ErrorKind::InvalidParameter, "delta = " + std::to_string(delta_percent) + " outside (0, 100]");
    }
    const Index t = vote_depth(primary.n, delta_percent);
    if (t < 1) throw Error(ErrorKind::InvalidParameter, "vote depth floor(delta*n/100) is 0");
    if (t > nb.depth()) {
        throw Error(ErrorKind::InvalidParameter, "neighborhoods hold " + std::to_string(nb.depth()) +
                                                     " ranks, vote needs " + std::to_string(t));
    }

    const auto owner = primary.labels();
    const std::size_t r = primary.clusters.size();
    std::vector<int> joined(primary.unassigned.size(), 0);

#pragma omp parallel for schedule(dynamic, 64)
    for (std::size_t k = 0; k < primary.unassigned.size(); ++k) {
        const Index u = primary.unassigned[k];
        const auto counts = overlap_counts(nb.prefix(u, t), owner, r);
        int winner = 0;
        int winners = 0;
        for (std::size_t j = 0; j < r; ++j) {
            if (2 * counts[j] > static_cast<std::size_t>(t)) {
                winner = static_cast<int>(j) + 1;
                ++winners;
            }
        }
        // Disjoint clusters cannot both hold a strict majority of t slots.
        joined[k] = winners > 1 ? -1 : winner;
    }
    for (std::size_t k = 0; k < joined.size(); ++k) {
        if (joined[k] < 0) {
            throw Error(ErrorKind::InvalidInput,
                        "more than one strict majority for vertex " + std::to_string(primary.unassigned[k]));
        }
    }

    Clustering out = primary;
    out.stage = Stage::PostMajority;
    out.unassigned.clear();
    for (std::size_t k = 0; k < primary.unassigned.size(); ++k) {
        if (joined[k] > 0) {
            out.clusters[static_cast<std::size_t>(joined[k] - 1)].push_back(primary.unassigned[k]);
        } else {
            out.unassigned.push_back(primary.unassigned[k]);
        }
    }
    for (auto& c : out.clusters) std::sort(c.begin(), c.end());
    return out;
}

std::string_view to_string(FinalizePolicy p) {
    switch (p) {
    case FinalizePolicy::Leave: return "leave";
    case FinalizePolicy::Plurality: return "plurality";
    case FinalizePolicy::RecurseReport: return "recurse_report";
    }
    return "unknown";
}

FinalizePolicy parse_finalize_policy(std::string_view s) {
    if (s == "leave") return FinalizePolicy::Leave;
    if (s == "plurality") return FinalizePolicy::Plurality;
    if (s == "recurse_report") return FinalizePolicy::RecurseReport;
    throw Error(ErrorKind::InvalidParameter, "unknown finalize policy '" + std::string(s) + "'");
}

FinalizeResult finalize(const Clustering& post_majority, const Neighborhoods& nb, FinalizePolicy policy,
                        double delta_percent) {
    if (post_majority.stage != Stage::PostMajority) {
        throw Error(ErrorKind::InvalidInput, "finalize expects a post-majority clustering");
    }
    FinalizeResult result{post_majority, std::nullopt};
    result.clustering.stage = Stage::Final;

    if (policy == FinalizePolicy::RecurseReport) {
        result.recursion = RecursionDescriptor{post_majority.unassigned};
        return result;
    }
    if (policy == FinalizePolicy::Leave || post_majority.unassigned.empty()) return result;
    if (post_majority.clusters.empty()) return result;

    const Index t = std::max<Index>(vote_depth(post_majority.n, delta_percent), 1);
    const auto owner = post_majority.labels();
    const std::size_t r = post_majority.clusters.size();
    for (Index u : post_majority.unassigned) {
        const auto counts = overlap_counts(nb.prefix(u, std::min(t, nb.depth())), owner, r);
        const auto best = static_cast<std::size_t>(std::max_element(counts.begin(), counts.end()) - counts.begin());
        result.clustering.clusters[best].push_back(u);
    }
    for (auto& c : result.clustering.clusters) std::sort(c.begin(), c.end());
    result.clustering.unassigned.clear();
    return result;
}

} // namespace confclust
