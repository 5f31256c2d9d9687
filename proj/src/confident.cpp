#include "confclust/confident.hpp"

#include "confclust/random.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>

namespace confclust {

namespace {

// Resolution of eigenvector entries when ranking, relative to the largest.
constexpr double kZeroSnap = 1e-7;

Eigen::MatrixXd orthonormalize(const Eigen::MatrixXd& a) {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
    return qr.householderQ() * Eigen::MatrixXd::Identity(a.rows(), a.cols());
}

void orient(Eigen::VectorXd& v) {
    const double sum = v.sum();
    if (sum < 0.0) {
        v = -v;
    } else if (sum == 0.0) {
        for (Index i = 0; i < v.size(); ++i) {
            if (v[i] != 0.0) {
                if (v[i] < 0.0) v = -v;
                break;
            }
        }
    }
}

} // namespace

Index ResidualGraph::active_count() const {
    return static_cast<Index>(std::count(active_.begin(), active_.end(), char{1}));
}

std::size_t ResidualGraph::active_edges() const {
    std::size_t count = 0;
    for (const auto& [a, b] : graph_->edges()) {
        if (active(a) && active(b)) ++count;
    }
    return count;
}

void ResidualGraph::remove(std::span<const Index> vertices) {
    for (auto v : vertices) active_[static_cast<std::size_t>(v)] = 0;
}

void ResidualGraph::multiply(const Eigen::MatrixXd& x, Eigen::MatrixXd& y) const {
    const Index n = graph_->n();
    y.setZero(n, x.cols());
    // Row u depends only on read-only x; each row is summed in neighbor order.
#pragma omp parallel for schedule(static)
    for (Index u = 0; u < n; ++u) {
        if (!active(u)) continue;
        for (Index v : graph_->neighbors(u)) {
            if (active(v)) y.row(u) += x.row(v);
        }
    }
}

EigenResult top_eigenvector(const ResidualGraph& g, const EigenOptions& options) {
    if (g.active_edges() == 0) throw Error(ErrorKind::NoEdges, "residual graph has no edges");
    if (!(options.tol > 0.0)) throw Error(ErrorKind::InvalidParameter, "tol must be positive");

    const Index n = g.n();
    const Index active = g.active_count();
    const Index block = std::clamp<Index>(options.block_size, 1, active);

    Rng rng(options.seed);
    Eigen::MatrixXd q = Eigen::MatrixXd::Zero(n, block);
    for (Index c = 0; c < block; ++c) {
        for (Index r = 0; r < n; ++r) {
            const double draw = rng.normal();
            if (g.active(r)) q(r, c) = draw;
        }
    }
    q = orthonormalize(q);

    EigenResult best;
    best.residual = std::numeric_limits<double>::infinity();
    Eigen::MatrixXd aq;
    for (int iter = 1; iter <= options.max_iter; ++iter) {
        g.multiply(q, aq);
        Eigen::MatrixXd h = q.transpose() * aq;
        h = 0.5 * (h + h.transpose()).eval();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(h);
        const Index top = block - 1; // ascending order: last is largest
        Eigen::VectorXd s = eig.eigenvectors().col(top);
        Eigen::VectorXd v = q * s;
        const double norm = v.norm();
        const double lambda = eig.eigenvalues()[top];
        Eigen::VectorXd av = aq * s;
        if (norm > 0.0) {
            v /= norm;
            av /= norm;
        }
        const double residual = (av - lambda * v).norm();
        if (residual < best.residual) {
            best.value = lambda;
            best.vector = v;
            best.residual = residual;
        }
        best.iterations = iter;
        if (residual <= options.tol * std::max(lambda, 1.0)) {
            best.value = lambda;
            best.vector = v;
            best.residual = residual;
            best.converged = true;
            break;
        }
        // Rotate to the Ritz basis (largest first) before the next power step.
        const Eigen::MatrixXd s_all = eig.eigenvectors().rowwise().reverse();
        q = orthonormalize(aq * s_all);
    }
    for (Index r = 0; r < n; ++r) {
        if (!g.active(r)) best.vector[r] = 0.0;
    }
    orient(best.vector);
    if (!best.converged) {
        throw EigenConvergenceError("power iteration did not reach residual " +
                                        std::to_string(options.tol) + " in " +
                                        std::to_string(options.max_iter) + " iterations (best " +
                                        std::to_string(best.residual) + ")",
                                    best);
    }
    return best;
}

PrefixSelection select_dense_prefix(const Eigen::VectorXd& v, const ResidualGraph& g) {
    const Index n = g.n();
    PrefixSelection out;
    if (v.size() != n) throw Error(ErrorKind::DimensionMismatch, "eigenvector length differs from vertex count");

    double scale = 0.0;
    for (Index u = 0; u < n; ++u) {
        if (g.active(u)) scale = std::max(scale, std::abs(v[u]));
    }
    // Entries are ranked on a grid of kZeroSnap * scale, so values equal up
    // to solver round-off tie and fall back to index order.
    std::vector<std::int64_t> key(static_cast<std::size_t>(n), 0);
    if (scale > 0.0) {
        for (Index u = 0; u < n; ++u) key[static_cast<std::size_t>(u)] = std::llround(v[u] / (kZeroSnap * scale));
    }

    std::vector<Index> order;
    order.reserve(static_cast<std::size_t>(n));
    for (Index u = 0; u < n; ++u) {
        if (g.active(u) && key[static_cast<std::size_t>(u)] >= 0) order.push_back(u);
    }
    std::sort(order.begin(), order.end(), [&](Index a, Index b) {
        const auto ka = key[static_cast<std::size_t>(a)], kb = key[static_cast<std::size_t>(b)];
        if (ka != kb) return ka > kb;
        return a < b;
    });

    std::vector<char> in_prefix(static_cast<std::size_t>(n), 0);
    std::size_t edges = 0;
    for (std::size_t t = 1; t <= order.size(); ++t) {
        const Index u = order[t - 1];
        for (Index w : g.graph().neighbors(u)) {
            if (in_prefix[static_cast<std::size_t>(w)]) ++edges;
        }
        in_prefix[static_cast<std::size_t>(u)] = 1;
        // edges >= C(t,2)/2  <=>  4 * edges >= t (t - 1)
        if (t >= 3 && 4 * edges >= t * (t - 1)) {
            out.c = static_cast<Index>(t);
            out.edges = edges;
        }
    }
    out.vertices.assign(order.begin(), order.begin() + out.c);
    return out;
}

ConfidentSet filter_low_degree(const PrefixSelection& prefix, const ResidualGraph& g) {
    ConfidentSet cs;
    cs.prefix = prefix.vertices;
    cs.prefix_size_c = prefix.c;
    cs.mean_degree_filter = static_cast<double>(prefix.c) / 2.0;
    if (prefix.vertices.empty()) return cs;

    std::vector<char> in_prefix(static_cast<std::size_t>(g.n()), 0);
    for (Index u : prefix.vertices) in_prefix[static_cast<std::size_t>(u)] = 1;
    for (Index u : prefix.vertices) {
        Index deg = 0;
        for (Index w : g.graph().neighbors(u)) {
            if (in_prefix[static_cast<std::size_t>(w)] && g.active(w)) ++deg;
        }
        if (2 * deg > prefix.c) cs.members.push_back(u);
    }
    std::sort(cs.members.begin(), cs.members.end());
    return cs;
}

std::string_view to_string(ExtractionStop s) {
    switch (s) {
    case ExtractionStop::PrefixBelowThreshold: return "prefix_below_threshold";
    case ExtractionStop::NoEdges: return "no_edges";
    case ExtractionStop::EmptyPrefix: return "empty_prefix";
    case ExtractionStop::EmptyFilter: return "empty_filter";
    }
    return "unknown";
}

Index default_stop_threshold(Index n, double gamma_percent) {
    const double scaled = (2.0 / 3.0) * gamma_percent * 100.0 * (static_cast<double>(n) / 5000.0);
    return std::max<Index>(20, static_cast<Index>(std::llround(scaled)));
}

ExtractionResult extract_confident_sets(const CorrelationGraph& g, const ExtractionOptions& options) {
    if (options.stop_threshold < 3) {
        throw Error(ErrorKind::InvalidParameter, "stop threshold must be >= 3");
    }
    ExtractionResult result;
    result.stop_threshold = options.stop_threshold;
    ResidualGraph residual(g);

    for (Index round = 0;; ++round) {
        if (residual.active_edges() == 0) {
            result.stop = ExtractionStop::NoEdges;
            break;
        }
        EigenOptions eo = options.eigen;
        eo.seed = stream_seed(options.eigen.seed, static_cast<std::uint64_t>(round));
        EigenResult eig;
        try {
            eig = top_eigenvector(residual, eo);
        } catch (const EigenConvergenceError& e) {
            throw EigenConvergenceError("round " + std::to_string(round) + ": " + e.what(), e.best());
        }
        auto prefix = select_dense_prefix(eig.vector, residual);
        result.eigen_history.push_back({eig.value, eig.iterations, eig.residual, prefix.c});
        if (prefix.c == 0) {
            result.stop = ExtractionStop::EmptyPrefix;
            break;
        }
        if (prefix.c < options.stop_threshold) {
            result.stop = ExtractionStop::PrefixBelowThreshold;
            break;
        }
        auto cs = filter_low_degree(prefix, residual);
        if (cs.members.empty()) {
            result.stop = ExtractionStop::EmptyFilter;
            break;
        }
        cs.order_found = static_cast<Index>(result.sets.size());
        residual.remove(cs.members);
        result.sets.push_back(std::move(cs));
    }

    for (Index v = 0; v < g.n(); ++v) {
        if (residual.active(v)) result.remaining.push_back(v);
    }
    return result;
}

} // namespace confclust
