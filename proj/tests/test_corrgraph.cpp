#include "confclust/corrgraph.hpp"
#include "confclust/pca.hpp"
#include "confclust/random.hpp"
#include "confclust/synth.hpp"

#include "test_util.hpp"

#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <set>

using namespace confclust;
using testutil::kind_of;

namespace {

PairScores random_scores(Index n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> v(static_cast<std::size_t>(n * (n - 1) / 2));
    for (auto& x : v) x = 1.0 + rng.uniform();
    return PairScores(n, 1, std::move(v));
}

PairScores synth_scores(const LabeledData& data, Index k_prime) {
    PcaOptions o;
    o.k_prime = k_prime;
    const auto model = fit_pca(data.data, o);
    return all_pair_scores(data.data, project(model, data.data));
}

} // namespace

TEST_SUITE("corrgraph") {

TEST_CASE("edge count is the floor of gamma percent of all pairs") {
    const auto scores = random_scores(100, 1);
    CHECK(build_correlation_graph(scores, 5.0).num_edges() == 247);
    CHECK(build_correlation_graph(scores, 3.0).num_edges() == 148);
    CHECK(percent_count(3.0, 100) == 3);
    CHECK(percent_count(2.5, 71 * 40) == 71);

    const auto full = build_correlation_graph(scores, 100.0);
    CHECK(full.num_edges() == 4950);
    for (Index u = 0; u < 100; ++u) CHECK(full.degree(u) == 99);
}

TEST_CASE("gamma outside (0, 100] is rejected") {
    const auto scores = random_scores(10, 1);
    CHECK(kind_of([&] { build_correlation_graph(scores, 0.0); }) == ErrorKind::InvalidParameter);
    CHECK(kind_of([&] { build_correlation_graph(scores, -1.0); }) == ErrorKind::InvalidParameter);
    CHECK(kind_of([&] { build_correlation_graph(scores, 100.5); }) == ErrorKind::InvalidParameter);
}

TEST_CASE("ties at the cutoff follow lexicographic pair order") {
    // 6 pairs for n = 4; three tied at the cutoff value 2.0.
    // (0,1)=3 (0,2)=2 (0,3)=1 (1,2)=2 (1,3)=inf (2,3)=2
    const PairScores scores(4, 1, {3.0, 2.0, 1.0, 2.0, kInfiniteRatio, 2.0});
    const auto top = top_ranked_pairs(scores, 6);
    CHECK(top == std::vector<std::size_t>{4, 0, 1, 3, 5, 2});

    // floor(50% of 6) = 3: inf, 3, then the first tied pair (0,2).
    const auto g = build_correlation_graph(scores, 50.0);
    CHECK(g.edges() == std::vector<Edge>{{0, 1}, {0, 2}, {1, 3}});
    for (int run = 0; run < 5; ++run) CHECK(build_correlation_graph(scores, 50.0).edges() == g.edges());
}

TEST_CASE("selection matches a brute-force sort") {
    Rng rng(7);
    const Index n = 60;
    std::vector<double> v(static_cast<std::size_t>(n * (n - 1) / 2));
    for (auto& x : v) {
        const double u = rng.uniform();
        x = u < 0.05 ? kInfiniteRatio : 1.0 + std::floor(u * 20.0) / 4.0; // heavy ties
    }
    const PairScores scores(n, 1, v);
    std::vector<std::size_t> order(v.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return ranks_before(v[a], a, v[b], b); });

    for (double gamma : {1.0, 3.0, 5.0, 37.5}) {
        const auto count = percent_count(gamma, v.size());
        std::vector<Edge> expected;
        for (std::size_t r = 0; r < count; ++r) expected.push_back(scores.pair_at(order[r]));
        std::sort(expected.begin(), expected.end());
        CHECK(build_correlation_graph(scores, gamma).edges() == expected);
    }
}

TEST_CASE("edges are nested and degrees sum to twice the edge count") {
    const auto scores = random_scores(80, 3);
    std::set<Edge> previous;
    for (double gamma : {1.0, 2.0, 5.0, 10.0, 50.0}) {
        const auto g = build_correlation_graph(scores, gamma);
        const std::set<Edge> current(g.edges().begin(), g.edges().end());
        CHECK(std::includes(current.begin(), current.end(), previous.begin(), previous.end()));
        std::size_t degree_sum = 0;
        for (Index u = 0; u < g.n(); ++u) {
            degree_sum += static_cast<std::size_t>(g.degree(u));
            for (Index w : g.neighbors(u)) CHECK(g.has_edge(w, u));
        }
        CHECK(degree_sum == 2 * g.num_edges());
        previous = current;
    }
}

TEST_CASE("graph construction rejects self-loops and collapses duplicates") {
    CHECK(kind_of([] { CorrelationGraph(3, {{1, 1}}); }) == ErrorKind::InvalidInput);
    CHECK(kind_of([] { CorrelationGraph(3, {{0, 3}}); }) == ErrorKind::InvalidInput);
    const CorrelationGraph g(3, {{1, 0}, {0, 1}, {2, 1}});
    CHECK(g.num_edges() == 2);
    CHECK(g.edges() == std::vector<Edge>{{0, 1}, {1, 2}});
}

TEST_CASE("quality of the exact correlation graph is (1, 0)") {
    const std::vector<int> labels{1, 1, 1, 2, 2, 3, 3, 3, 3};
    std::vector<Edge> edges;
    for (Index i = 0; i < 9; ++i) {
        for (Index j = i + 1; j < 9; ++j) {
            if (labels[static_cast<std::size_t>(i)] == labels[static_cast<std::size_t>(j)]) edges.emplace_back(i, j);
        }
    }
    const auto q = graph_quality(CorrelationGraph(9, edges), labels);
    CHECK(q.alpha == 1.0);
    CHECK(q.beta == 0.0);
    CHECK(q.intra_pairs == 3 + 1 + 6);
}

TEST_CASE("quality of the complete graph on two equal clusters") {
    for (Index m : {2, 5, 13}) {
        std::vector<int> labels(static_cast<std::size_t>(2 * m), 1);
        std::fill(labels.begin() + m, labels.end(), 2);
        const auto q = graph_quality(CorrelationGraph(2 * m, testutil::clique_range(0, 2 * m)), labels);
        const double pairs = static_cast<double>(2 * m * (2 * m - 1) / 2);
        CHECK(q.alpha == 1.0);
        CHECK(q.beta == doctest::Approx(static_cast<double>(m * m) / pairs));
        CHECK(static_cast<double>(q.intra_edges) ==
              doctest::Approx(static_cast<double>(2 * m * (2 * m - 1) / 2) * (1.0 - q.beta)));
    }
}

TEST_CASE("quality needs a label for every vertex") {
    const CorrelationGraph g(3, {{0, 1}});
    const std::vector<int> missing{1, 0, 2};
    const std::vector<int> short_labels{1, 1};
    CHECK(kind_of([&] { graph_quality(g, missing); }) == ErrorKind::MissingLabel);
    CHECK(kind_of([&] { graph_quality(g, short_labels); }) == ErrorKind::DimensionMismatch);
}

TEST_CASE("curve at 100 percent is the intra-pair fraction") {
    const Index m = 10;
    std::vector<int> labels(2 * m, 1);
    std::fill(labels.begin() + m, labels.end(), 2);
    const auto scores = random_scores(2 * m, 5);
    const std::vector<double> grid{100.0};
    const auto curve = compression_curve(scores, labels, grid);
    REQUIRE(curve.size() == 1);
    CHECK(curve[0].pairs == 190);
    CHECK(curve[0].intra_fraction == doctest::Approx(2.0 * 45.0 / 190.0));

    const std::vector<double> bad{0.0};
    CHECK(kind_of([&] { compression_curve(scores, labels, bad); }) == ErrorKind::InvalidParameter);
}

TEST_CASE("curve uses the same cutoff as the graph") {
    const auto scores = random_scores(50, 9);
    std::vector<int> labels(50);
    for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = 1 + static_cast<int>(i % 3);
    const std::vector<double> grid{1.0, 2.5, 5.0, 10.0};
    const auto curve = compression_curve(scores, labels, grid);
    for (std::size_t p = 0; p < grid.size(); ++p) {
        const auto g = build_correlation_graph(scores, grid[p]);
        const auto q = graph_quality(g, labels);
        CHECK(curve[p].pairs == g.num_edges());
        CHECK(curve[p].intra_fraction == doctest::Approx(1.0 - q.beta));
    }
}

TEST_CASE("well separated clusters give a pure top percent") {
    VectorModelSpec spec;
    spec.d = 40;
    spec.sizes = {30, 30, 30};
    spec.noise_scale = {0.01};
    spec.center_distance = 50.0;
    spec.seed = 4;
    const auto data = gen_vectors(spec);
    const auto scores = synth_scores(data, 2);
    const std::vector<double> grid{1.0};
    CHECK(compression_curve(scores, data.labels, grid)[0].intra_fraction == 1.0);
}

TEST_CASE("random vector model keeps beta small at five percent") {
    VectorModelSpec spec;
    spec.d = 200;
    spec.sizes = {120, 100, 80, 60};
    spec.seed = 2;
    const auto data = gen_vectors(spec);
    const auto g = build_correlation_graph(synth_scores(data, 10), 5.0);
    const auto q = graph_quality(g, data.labels);
    CHECK(q.beta <= 0.1);
    CHECK(q.alpha > 0.0);
}

TEST_CASE("edge list export") {
    testutil::TempDir tmp("edges");
    const CorrelationGraph g(4, {{2, 3}, {0, 1}});
    write_edge_list(tmp / "g.txt", g);
    CHECK(testutil::read_file(tmp / "g.txt") == "0 1\n2 3\n");
}

}
