#include "confclust/merge.hpp"

#include "confclust/corrgraph.hpp"
#include "confclust/error.hpp"

#include <algorithm>
#include <numeric>
#include <optional>

namespace confclust {

Neighborhoods::Neighborhoods(Index n, double delta_percent, Index list_length, Index depth,
                             std::vector<Index> ranked)
    : n_(n), delta_percent_(delta_percent), list_length_(list_length), depth_(depth),
      ranked_(std::move(ranked)) {
    if (list_length_ > depth_ || static_cast<Index>(ranked_.size()) != n_ * depth_) {
        throw Error(ErrorKind::DimensionMismatch, "neighborhood table has the wrong shape");
    }
}

Neighborhoods Neighborhoods::from_lists(const std::vector<std::vector<Index>>& lists, double delta_percent) {
    const auto n = static_cast<Index>(lists.size());
    const Index len = lists.empty() ? 0 : static_cast<Index>(lists.front().size());
    std::vector<Index> ranked;
    ranked.reserve(static_cast<std::size_t>(n * len));
    for (Index u = 0; u < n; ++u) {
        const auto& l = lists[static_cast<std::size_t>(u)];
        if (static_cast<Index>(l.size()) != len) {
            throw Error(ErrorKind::DimensionMismatch, "neighborhood lists differ in length");
        }
        for (Index v : l) {
            if (v == u || v < 0 || v >= n) throw Error(ErrorKind::InvalidInput, "bad neighbor in list of " + std::to_string(u));
            ranked.push_back(v);
        }
    }
    return Neighborhoods(n, delta_percent, len, len, std::move(ranked));
}

std::span<const Index> Neighborhoods::prefix(Index u, Index t) const {
    if (t > depth_) throw Error(ErrorKind::InvalidParameter, "neighborhood depth " + std::to_string(depth_) + " < " + std::to_string(t));
    const auto start = static_cast<std::size_t>(u * depth_);
    return {ranked_.data() + start, static_cast<std::size_t>(t)};
}

Neighborhoods delta_neighborhoods(const PairScores& scores, double delta_percent, Index min_depth) {
    if (!(delta_percent > 0.0 && delta_percent <= 100.0)) {
        throw Error(ErrorKind::InvalidParameter, "delta = " + std::to_string(delta_percent) + " outside (0, 100]");
    }
    const Index n = scores.n();
    const Index others = std::max<Index>(n - 1, 0);
    const auto list_length = static_cast<Index>(percent_count(delta_percent, static_cast<std::size_t>(others)));
    const Index depth = std::min(std::max(list_length, min_depth), others);

    std::vector<Index> ranked(static_cast<std::size_t>(n * depth));
#pragma omp parallel for schedule(dynamic, 16)
    for (Index u = 0; u < n; ++u) {
        std::vector<Index> cand;
        cand.reserve(static_cast<std::size_t>(others));
        for (Index v = 0; v < n; ++v) {
            if (v != u) cand.push_back(v);
        }
        auto cmp = [&](Index a, Index b) {
            const double sa = scores(u, a), sb = scores(u, b);
            if (sa != sb) return sa > sb;
            return a < b;
        };
        std::partial_sort(cand.begin(), cand.begin() + depth, cand.end(), cmp);
        std::copy(cand.begin(), cand.begin() + depth, ranked.begin() + u * depth);
    }
    return Neighborhoods(n, delta_percent, list_length, depth, std::move(ranked));
}

double pair_affinity(std::span<const Index> a, std::span<const Index> b, const Neighborhoods& nb) {
    if (a.empty() || b.empty()) throw Error(ErrorKind::InvalidParameter, "affinity needs non-empty sets");
    std::vector<char> in_b(static_cast<std::size_t>(nb.n()), 0);
    for (Index v : b) in_b[static_cast<std::size_t>(v)] = 1;
    std::size_t total = 0;
    for (Index u : a) {
        for (Index v : nb.neighbors(u)) total += in_b[static_cast<std::size_t>(v)] ? 1 : 0;
    }
    return static_cast<double>(total) / static_cast<double>(a.size());
}

std::vector<std::vector<double>> affinity_matrix(const std::vector<std::vector<Index>>& sets,
                                                 const Neighborhoods& nb) {
    const std::size_t r = sets.size();
    std::vector<int> owner(static_cast<std::size_t>(nb.n()), -1);
    for (std::size_t s = 0; s < r; ++s) {
        for (Index v : sets[s]) owner[static_cast<std::size_t>(v)] = static_cast<int>(s);
    }
    std::vector<std::vector<double>> y(r, std::vector<double>(r, 0.0));
#pragma omp parallel for schedule(dynamic, 1)
    for (std::size_t i = 0; i < r; ++i) {
        std::vector<std::size_t> counts(r, 0);
        for (Index u : sets[i]) {
            for (Index v : nb.neighbors(u)) {
                const int o = owner[static_cast<std::size_t>(v)];
                if (o >= 0) ++counts[static_cast<std::size_t>(o)];
            }
        }
        for (std::size_t j = 0; j < r; ++j) {
            if (j != i) y[i][j] = static_cast<double>(counts[j]) / static_cast<double>(sets[i].size());
        }
    }
    return y;
}

std::string_view to_string(StoppingRule::Kind k) {
    switch (k) {
    case StoppingRule::Kind::TargetCount: return "target_count";
    case StoppingRule::Kind::Gap: return "gap";
    case StoppingRule::Kind::ZFloor: return "z_floor";
    }
    return "unknown";
}

std::string_view to_string(MergeStatus s) {
    switch (s) {
    case MergeStatus::RuleFired: return "rule_fired";
    case MergeStatus::ExhaustedScores: return "exhausted_scores";
    case MergeStatus::SingleSet: return "single_set";
    }
    return "unknown";
}

MergeResult form_primary_clusters(const ExtractionResult& extraction, const Neighborhoods& nb,
                                  const StoppingRule& rule) {
    if (extraction.sets.empty()) throw Error(ErrorKind::InvalidParameter, "no confident sets to merge");
    if (rule.kind == StoppingRule::Kind::TargetCount && rule.target_count < 1) {
        throw Error(ErrorKind::InvalidParameter, "target count must be >= 1");
    }
    if (rule.kind == StoppingRule::Kind::Gap && !(rule.gap_ratio >= 0.0)) {
        throw Error(ErrorKind::InvalidParameter, "gap ratio must be non-negative");
    }

    struct Live {
        std::vector<Index> members;
        std::vector<Index> lineage; // sorted order_found ids; front() is the set id
    };
    std::vector<Live> live;
    for (const auto& cs : extraction.sets) live.push_back({cs.members, {cs.order_found}});
    std::sort(live.begin(), live.end(), [](const Live& a, const Live& b) { return a.lineage.front() < b.lineage.front(); });

    MergeResult result;
    std::size_t covered = 0;
    for (const auto& l : live) covered += l.members.size();

    std::optional<double> previous;
    for (Index round = 0;; ++round) {
        if (live.size() <= 1) {
            result.status = MergeStatus::SingleSet;
            break;
        }
        if (rule.kind == StoppingRule::Kind::TargetCount &&
            static_cast<Index>(live.size()) <= rule.target_count) {
            result.status = MergeStatus::RuleFired;
            break;
        }
        std::vector<std::vector<Index>> sets;
        sets.reserve(live.size());
        for (const auto& l : live) sets.push_back(l.members);
        const auto y = affinity_matrix(sets, nb);

        // Live sets are kept in lineage-id order, so the first strict maximum
        // in (i, j) scan order is the lexicographically smallest tied pair.
        double z_max = 0.0;
        std::size_t bi = 0, bj = 0;
        bool found = false;
        for (std::size_t i = 0; i < live.size(); ++i) {
            for (std::size_t j = i + 1; j < live.size(); ++j) {
                const double z = y[i][j] * y[j][i];
                if (!found || z > z_max) {
                    z_max = z;
                    bi = i;
                    bj = j;
                    found = true;
                }
            }
        }
        MergeStep step{round,
                       live[bi].lineage.front(),
                       live[bj].lineage.front(),
                       z_max,
                       static_cast<Index>(live[bi].members.size()),
                       static_cast<Index>(live[bj].members.size()),
                       true};
        if (!(z_max > 0.0)) {
            result.status = MergeStatus::ExhaustedScores;
            break;
        }
        bool stop = false;
        if (rule.kind == StoppingRule::Kind::Gap) stop = z_max < (previous ? rule.gap_ratio * *previous : rule.z_floor);
        if (rule.kind == StoppingRule::Kind::ZFloor && z_max < rule.z_floor) stop = true;
        if (stop) {
            step.accepted = false;
            result.z_history.push_back(step);
            result.status = MergeStatus::RuleFired;
            break;
        }
        result.z_history.push_back(step);
        previous = z_max;

        Live merged;
        std::merge(live[bi].members.begin(), live[bi].members.end(), live[bj].members.begin(),
                   live[bj].members.end(), std::back_inserter(merged.members));
        std::merge(live[bi].lineage.begin(), live[bi].lineage.end(), live[bj].lineage.begin(),
                   live[bj].lineage.end(), std::back_inserter(merged.lineage));
        live[bi] = std::move(merged);
        live.erase(live.begin() + static_cast<std::ptrdiff_t>(bj));

        std::size_t now = 0;
        for (const auto& l : live) now += l.members.size();
        if (now != covered) throw Error(ErrorKind::InvalidInput, "merge changed the covered vertex count");
    }

    result.primary.n = nb.n();
    result.primary.stage = Stage::Primary;
    for (auto& l : live) {
        result.primary.clusters.push_back(l.members);
        result.lineage.push_back(l.lineage);
    }
    result.primary.unassigned = extraction.remaining;
    result.primary.check_disjoint();
    return result;
}

} // namespace confclust
