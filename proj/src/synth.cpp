#include "confclust/synth.hpp"

#include "confclust/error.hpp"
#include "confclust/random.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace confclust {

namespace {

// Stream ids: 0 is reserved for centers, points use 1 + column.
constexpr std::uint64_t kCenterStream = 0;

void check_probability(double p, const char* what) {
    if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorKind::InvalidParameter, std::string(what) + " outside [0, 1]");
}

} // namespace

Index VectorModelSpec::n() const { return std::accumulate(sizes.begin(), sizes.end(), Index{0}); }

double VectorModelSpec::scale_of(Index cluster) const {
    if (noise_scale.size() == 1) return noise_scale.front();
    return noise_scale[static_cast<std::size_t>(cluster)];
}

VectorModelSpec VectorModelSpec::pbmc_like(std::uint64_t seed) {
    VectorModelSpec spec;
    spec.seed = seed;
    return spec;
}

Eigen::MatrixXd model_centers(const VectorModelSpec& spec) {
    const Index k = spec.k();
    if (spec.centers) {
        if (spec.centers->rows() != spec.d || spec.centers->cols() != k) {
            throw Error(ErrorKind::InvalidParameter, "centers must be d x k");
        }
        return *spec.centers;
    }
    if (k > spec.d) throw Error(ErrorKind::InvalidParameter, "orthogonal centers need k <= d");

    double distance = 0.0;
    if (spec.center_distance) {
        distance = *spec.center_distance;
    } else {
        const double r = spec.intra_inter_ratio;
        if (!(r > 0.0 && r <= 1.0)) throw Error(ErrorKind::InvalidParameter, "intra/inter ratio must be in (0, 1]");
        double var = 0.0;
        for (Index j = 0; j < k; ++j) {
            const double s = spec.scale_of(j);
            var += spec.noise == NoiseKind::Gaussian ? s * s : s * s / 3.0;
        }
        var /= static_cast<double>(k);
        distance = std::sqrt(2.0 * static_cast<double>(spec.d) * var * (1.0 / (r * r) - 1.0));
    }
    if (!(distance >= 0.0)) throw Error(ErrorKind::InvalidParameter, "center distance must be non-negative");

    Rng rng(spec.seed, kCenterStream);
    Eigen::MatrixXd g(spec.d, k);
    for (Index c = 0; c < k; ++c) {
        for (Index r = 0; r < spec.d; ++r) g(r, c) = rng.normal();
    }
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    Eigen::MatrixXd dirs = qr.householderQ() * Eigen::MatrixXd::Identity(spec.d, k);
    // Orthonormal directions scaled by D / sqrt(2) are pairwise D apart.
    return dirs * (distance / std::sqrt(2.0));
}

LabeledData gen_vectors(const VectorModelSpec& spec) {
    if (spec.sizes.empty()) throw Error(ErrorKind::InvalidParameter, "need at least one cluster");
    if (spec.d < 1) throw Error(ErrorKind::InvalidParameter, "dimension must be positive");
    for (Index s : spec.sizes) {
        if (s < 1) throw Error(ErrorKind::InvalidParameter, "cluster sizes must be positive");
    }
    if (spec.noise_scale.size() != 1 && spec.noise_scale.size() != spec.sizes.size()) {
        throw Error(ErrorKind::InvalidParameter, "noise_scale needs one value or one per cluster");
    }
    for (double s : spec.noise_scale) {
        if (!(s >= 0.0) || !std::isfinite(s)) throw Error(ErrorKind::InvalidParameter, "noise scale must be non-negative");
    }

    const Eigen::MatrixXd centers = model_centers(spec);
    const Index n = spec.n();
    Eigen::MatrixXd values(spec.d, n);
    std::vector<int> labels;
    labels.reserve(static_cast<std::size_t>(n));
    for (Index j = 0; j < spec.k(); ++j) {
        for (Index i = 0; i < spec.sizes[static_cast<std::size_t>(j)]; ++i) labels.push_back(static_cast<int>(j) + 1);
    }

#pragma omp parallel for schedule(static)
    for (Index col = 0; col < n; ++col) {
        const Index cluster = labels[static_cast<std::size_t>(col)] - 1;
        const double scale = spec.scale_of(cluster);
        Rng rng(spec.seed, 1 + static_cast<std::uint64_t>(col));
        for (Index r = 0; r < spec.d; ++r) {
            const double noise = spec.noise == NoiseKind::Gaussian ? scale * rng.normal()
                                                                   : scale * (2.0 * rng.uniform() - 1.0);
            values(r, col) = centers(r, cluster) + noise;
        }
    }

    DataMatrix data(std::move(values));
    auto truth = GroundTruth::from_indices(data.point_ids(), labels);
    return {std::move(data), std::move(labels), std::move(truth)};
}

LabeledGraph gen_sbm(const SbmSpec& spec) {
    check_probability(spec.p_in, "p_in");
    check_probability(spec.p_out, "p_out");
    if (!(spec.p_out < spec.p_in)) throw Error(ErrorKind::InvalidParameter, "SBM needs p_out < p_in");
    if (spec.sizes.empty()) throw Error(ErrorKind::InvalidParameter, "need at least one block");

    std::vector<int> labels;
    for (std::size_t b = 0; b < spec.sizes.size(); ++b) {
        if (spec.sizes[b] < 1) throw Error(ErrorKind::InvalidParameter, "block sizes must be positive");
        labels.insert(labels.end(), static_cast<std::size_t>(spec.sizes[b]), static_cast<int>(b) + 1);
    }
    const auto n = static_cast<Index>(labels.size());
    std::vector<Edge> edges;
    for (Index i = 0; i < n; ++i) {
        Rng rng(spec.seed, static_cast<std::uint64_t>(i));
        for (Index j = i + 1; j < n; ++j) {
            const double p = labels[static_cast<std::size_t>(i)] == labels[static_cast<std::size_t>(j)] ? spec.p_in : spec.p_out;
            if (rng.uniform() < p) edges.emplace_back(i, j);
        }
    }
    const double pairs = static_cast<double>(n) * static_cast<double>(n - 1) / 2.0;
    const double density = pairs > 0 ? 100.0 * static_cast<double>(edges.size()) / pairs : 0.0;
    return {CorrelationGraph(n, std::move(edges), density), std::move(labels)};
}

PlantedGraph gen_planted_dense(Index n, Index clique_size, double p_bg, std::uint64_t seed) {
    check_probability(p_bg, "p_bg");
    if (n < 1 || clique_size < 0 || clique_size > n) {
        throw Error(ErrorKind::InvalidParameter, "need 0 <= clique_size <= n");
    }
    Rng pick(seed, 0);
    std::vector<Index> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), Index{0});
    for (Index i = n - 1; i > 0; --i) {
        const auto j = static_cast<Index>(pick.next() % static_cast<std::uint64_t>(i + 1));
        std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
    }
    std::vector<Index> planted(perm.begin(), perm.begin() + clique_size);
    std::sort(planted.begin(), planted.end());
    std::vector<char> in_plant(static_cast<std::size_t>(n), 0);
    for (Index v : planted) in_plant[static_cast<std::size_t>(v)] = 1;

    std::vector<Edge> edges;
    for (Index i = 0; i < n; ++i) {
        Rng rng(seed, 1 + static_cast<std::uint64_t>(i));
        for (Index j = i + 1; j < n; ++j) {
            const bool clique = in_plant[static_cast<std::size_t>(i)] && in_plant[static_cast<std::size_t>(j)];
            const double draw = rng.uniform();
            if (clique || draw < p_bg) edges.emplace_back(i, j);
        }
    }
    const double pairs = static_cast<double>(n) * static_cast<double>(n - 1) / 2.0;
    const double density = pairs > 0 ? 100.0 * static_cast<double>(edges.size()) / pairs : 0.0;
    return {CorrelationGraph(n, std::move(edges), density), std::move(planted)};
}

} // namespace confclust
