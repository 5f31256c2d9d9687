#include "confclust/corrgraph.hpp"

#include "confclust/error.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

namespace confclust {

namespace {

void require_labels(std::span<const int> labels, Index n) {
    if (static_cast<Index>(labels.size()) != n) {
        throw Error(ErrorKind::DimensionMismatch, "labels cover " + std::to_string(labels.size()) +
                                                      " vertices, graph has " + std::to_string(n));
    }
    for (std::size_t v = 0; v < labels.size(); ++v) {
        if (labels[v] <= 0) throw Error(ErrorKind::MissingLabel, "vertex " + std::to_string(v));
    }
}

void check_percent(double p, const char* what) {
    if (!(p > 0.0 && p <= 100.0)) {
        throw Error(ErrorKind::InvalidParameter,
                    std::string(what) + " = " + std::to_string(p) + " outside (0, 100]");
    }
}

} // namespace

CorrelationGraph::CorrelationGraph(Index n, std::vector<Edge> edges, double gamma_percent)
    : n_(n), gamma_percent_(gamma_percent) {
    for (auto& [a, b] : edges) {
        if (a == b) throw Error(ErrorKind::InvalidInput, "self-loop at " + std::to_string(a));
        if (a < 0 || b < 0 || a >= n || b >= n) {
            throw Error(ErrorKind::InvalidInput, "edge endpoint outside [0, n)");
        }
        if (a > b) std::swap(a, b);
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    edges_ = std::move(edges);

    std::vector<std::size_t> degree(static_cast<std::size_t>(n), 0);
    for (const auto& [a, b] : edges_) {
        ++degree[static_cast<std::size_t>(a)];
        ++degree[static_cast<std::size_t>(b)];
    }
    offsets_.assign(static_cast<std::size_t>(n) + 1, 0);
    for (Index v = 0; v < n; ++v) {
        offsets_[static_cast<std::size_t>(v) + 1] = offsets_[static_cast<std::size_t>(v)] + degree[static_cast<std::size_t>(v)];
    }
    adjacency_.resize(offsets_.back());
    std::vector<std::size_t> cursor(offsets_.begin(), offsets_.end() - 1);
    for (const auto& [a, b] : edges_) {
        adjacency_[cursor[static_cast<std::size_t>(a)]++] = b;
        adjacency_[cursor[static_cast<std::size_t>(b)]++] = a;
    }
    for (Index v = 0; v < n; ++v) {
        std::sort(adjacency_.begin() + static_cast<std::ptrdiff_t>(offsets_[static_cast<std::size_t>(v)]),
                  adjacency_.begin() + static_cast<std::ptrdiff_t>(offsets_[static_cast<std::size_t>(v) + 1]));
    }
}

bool CorrelationGraph::has_edge(Index u, Index v) const {
    auto nb = neighbors(u);
    return std::binary_search(nb.begin(), nb.end(), v);
}

std::size_t percent_count(double percent, std::size_t total) {
    const long double exact = static_cast<long double>(percent) * static_cast<long double>(total) / 100.0L;
    auto count = static_cast<std::size_t>(std::floor(exact * (1.0L + 1e-12L)));
    return std::min(count, total);
}

std::vector<std::size_t> top_ranked_pairs(const PairScores& scores, std::size_t count) {
    std::vector<std::size_t> idx(scores.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    count = std::min(count, idx.size());
    const auto& v = scores.values();
    auto cmp = [&v](std::size_t a, std::size_t b) { return ranks_before(v[a], a, v[b], b); };
    if (count < idx.size()) {
        std::nth_element(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(count), idx.end(), cmp);
        idx.resize(count);
    }
    std::sort(idx.begin(), idx.end(), cmp);
    return idx;
}

CorrelationGraph build_correlation_graph(const PairScores& scores, double gamma_percent) {
    check_percent(gamma_percent, "gamma");
    const auto count = percent_count(gamma_percent, scores.size());
    const auto top = top_ranked_pairs(scores, count);
    std::vector<Edge> edges;
    edges.reserve(top.size());
    for (auto idx : top) edges.push_back(scores.pair_at(idx));
    return CorrelationGraph(scores.n(), std::move(edges), gamma_percent);
}

GraphQuality graph_quality(const CorrelationGraph& g, std::span<const int> labels) {
    require_labels(labels, g.n());
    GraphQuality q;
    for (const auto& [a, b] : g.edges()) {
        if (labels[static_cast<std::size_t>(a)] == labels[static_cast<std::size_t>(b)]) {
            ++q.intra_edges;
        } else {
            ++q.inter_edges;
        }
    }
    std::vector<std::size_t> sizes;
    for (int l : labels) {
        if (static_cast<std::size_t>(l) >= sizes.size()) sizes.resize(static_cast<std::size_t>(l) + 1, 0);
        ++sizes[static_cast<std::size_t>(l)];
    }
    for (auto s : sizes) q.intra_pairs += s * (s > 0 ? s - 1 : 0) / 2;
    // No intra-cluster pairs at all: every (zero) true edge is present.
    q.alpha = q.intra_pairs == 0 ? 1.0 : static_cast<double>(q.intra_edges) / static_cast<double>(q.intra_pairs);
    q.beta = g.num_edges() == 0 ? 0.0 : static_cast<double>(q.inter_edges) / static_cast<double>(g.num_edges());
    return q;
}

std::vector<CurvePoint> compression_curve(const PairScores& scores, std::span<const int> labels,
                                          std::span<const double> grid) {
    require_labels(labels, scores.n());
    for (double p : grid) check_percent(p, "curve percent");
    std::size_t max_count = 0;
    for (double p : grid) max_count = std::max(max_count, percent_count(p, scores.size()));

    const auto ranked = top_ranked_pairs(scores, max_count);
    std::vector<std::size_t> intra_prefix(ranked.size() + 1, 0);
    for (std::size_t r = 0; r < ranked.size(); ++r) {
        auto [a, b] = scores.pair_at(ranked[r]);
        const bool intra = labels[static_cast<std::size_t>(a)] == labels[static_cast<std::size_t>(b)];
        intra_prefix[r + 1] = intra_prefix[r] + (intra ? 1 : 0);
    }
    std::vector<CurvePoint> out;
    out.reserve(grid.size());
    for (double p : grid) {
        CurvePoint pt;
        pt.percent = p;
        pt.pairs = percent_count(p, scores.size());
        pt.intra_fraction = pt.pairs == 0 ? 0.0
                                          : static_cast<double>(intra_prefix[pt.pairs]) / static_cast<double>(pt.pairs);
        out.push_back(pt);
    }
    return out;
}

void write_edge_list(const std::filesystem::path& path, const CorrelationGraph& g) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
    for (const auto& [a, b] : g.edges()) out << a << ' ' << b << '\n';
}

} // namespace confclust
