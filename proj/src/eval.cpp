#include "confclust/eval.hpp"

#include "confclust/error.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <numeric>

namespace confclust {

namespace {

void require_positive_row(std::span<const Count> row) {
    if (row.empty()) throw Error(ErrorKind::EmptyCluster, "empty confusion row");
    for (Count c : row) {
        if (c < 0) throw Error(ErrorKind::InvalidInput, "negative count in confusion row");
    }
    if (std::all_of(row.begin(), row.end(), [](Count c) { return c == 0; })) {
        throw Error(ErrorKind::EmptyCluster, "confusion row has no members");
    }
}

double choose2(double x) { return x * (x - 1.0) / 2.0; }

} // namespace

Count ConfusionTable::total() const {
    Count t = 0;
    for (const auto& row : counts) t = std::accumulate(row.begin(), row.end(), t);
    return t;
}

std::string ConfusionTable::to_text() const {
    std::string out = "      ";
    char buf[32];
    for (int c = 1; c <= k; ++c) {
        std::snprintf(buf, sizeof(buf), "%7s", ("V" + std::to_string(c)).c_str());
        out += buf;
    }
    out += "\n";
    for (std::size_t r = 0; r < counts.size(); ++r) {
        std::snprintf(buf, sizeof(buf), "%-6s", ("C" + std::to_string(r + 1)).c_str());
        out += buf;
        for (Count v : counts[r]) {
            std::snprintf(buf, sizeof(buf), "%7lld", static_cast<long long>(v));
            out += buf;
        }
        out += "\n";
    }
    return out;
}

ConfusionTable confusion_table(const Clustering& c, std::span<const int> truth, int k) {
    if (static_cast<Index>(truth.size()) != c.n) {
        throw Error(ErrorKind::DimensionMismatch, "truth labels cover " + std::to_string(truth.size()) +
                                                      " points, clustering has " + std::to_string(c.n));
    }
    ConfusionTable t;
    t.k = k;
    t.unassigned = static_cast<Count>(c.unassigned.size());
    t.counts.assign(c.clusters.size(), std::vector<Count>(static_cast<std::size_t>(k), 0));
    for (std::size_t r = 0; r < c.clusters.size(); ++r) {
        for (Index v : c.clusters[r]) {
            const int l = truth[static_cast<std::size_t>(v)];
            if (l <= 0) {
                ++t.unlabeled_assigned;
                continue;
            }
            if (l > k) throw Error(ErrorKind::InvalidInput, "label " + std::to_string(l) + " exceeds k");
            ++t.counts[r][static_cast<std::size_t>(l - 1)];
        }
    }
    return t;
}

int cluster_identity(std::span<const Count> row) {
    require_positive_row(row);
    return static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin()) + 1;
}

double cluster_error(std::span<const Count> row) {
    require_positive_row(row);
    const Count total = std::accumulate(row.begin(), row.end(), Count{0});
    const Count top = *std::max_element(row.begin(), row.end());
    return static_cast<double>(total - top) / static_cast<double>(total);
}

ErrorSummary error_summary(const ConfusionTable& table) {
    ErrorSummary s;
    for (const auto& row : table.counts) {
        if (std::all_of(row.begin(), row.end(), [](Count c) { return c == 0; })) continue;
        const double e = cluster_error(row);
        s.per_cluster.push_back(e);
        s.e_inf = std::max(s.e_inf, e);
        s.e_avg += e;
    }
    if (!s.per_cluster.empty()) s.e_mean = s.e_avg / static_cast<double>(s.per_cluster.size());
    return s;
}

double zeta(std::span<const Index> set, std::span<const int> truth) {
    if (set.empty()) throw Error(ErrorKind::InvalidParameter, "zeta of an empty set");
    std::map<int, Count> tally;
    for (Index v : set) {
        if (v < 0 || static_cast<std::size_t>(v) >= truth.size() || truth[static_cast<std::size_t>(v)] <= 0) {
            throw Error(ErrorKind::MissingLabel, "vertex " + std::to_string(v));
        }
        ++tally[truth[static_cast<std::size_t>(v)]];
    }
    Count best = 0;
    for (const auto& [label, count] : tally) best = std::max(best, count);
    return static_cast<double>(best) / static_cast<double>(set.size());
}

double adjusted_rand_index(std::span<const int> a, std::span<const int> b) {
    if (a.size() != b.size()) throw Error(ErrorKind::DimensionMismatch, "label vectors differ in length");
    if (a.empty()) throw Error(ErrorKind::Undefined, "ARI of zero points");
    std::map<std::pair<int, int>, Count> joint;
    std::map<int, Count> ra, rb;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ++joint[{a[i], b[i]}];
        ++ra[a[i]];
        ++rb[b[i]];
    }
    double index = 0.0, sum_a = 0.0, sum_b = 0.0;
    for (const auto& [key, c] : joint) index += choose2(static_cast<double>(c));
    for (const auto& [key, c] : ra) sum_a += choose2(static_cast<double>(c));
    for (const auto& [key, c] : rb) sum_b += choose2(static_cast<double>(c));
    const double total = choose2(static_cast<double>(a.size()));
    const double expected = total > 0.0 ? sum_a * sum_b / total : 0.0;
    const double max_index = 0.5 * (sum_a + sum_b);
    // Both partitions trivial in the same way (all singletons or one block).
    if (max_index == expected) return 1.0;
    return (index - expected) / (max_index - expected);
}

double partition_agreement(std::span<const int> a, std::span<const int> b) {
    if (a.size() != b.size()) throw Error(ErrorKind::DimensionMismatch, "clusterings cover different universes");
    std::vector<int> la, lb;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] > 0 && b[i] > 0) {
            la.push_back(a[i]);
            lb.push_back(b[i]);
        }
    }
    if (la.empty()) throw Error(ErrorKind::Undefined, "no point is assigned in both clusterings");
    return adjusted_rand_index(la, lb);
}

double partition_agreement(const Clustering& a, const Clustering& b) {
    if (a.n != b.n) throw Error(ErrorKind::DimensionMismatch, "clusterings cover different universes");
    const auto la = a.labels();
    const auto lb = b.labels();
    return partition_agreement(std::span<const int>(la), std::span<const int>(lb));
}

} // namespace confclust
