#include "confclust/confident.hpp"
#include "confclust/eval.hpp"
#include "confclust/synth.hpp"

#include "test_util.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <numeric>
#include <set>

using namespace confclust;
using testutil::clique_edges;
using testutil::clique_range;
using testutil::kind_of;

namespace {

std::vector<Edge> join(std::vector<Edge> a, const std::vector<Edge>& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

std::size_t induced_edges(const CorrelationGraph& g, std::span<const Index> vs) {
    std::size_t count = 0;
    for (std::size_t a = 0; a < vs.size(); ++a) {
        for (std::size_t b = a + 1; b < vs.size(); ++b) count += g.has_edge(vs[a], vs[b]) ? 1 : 0;
    }
    return count;
}

Eigen::MatrixXd dense_adjacency(const CorrelationGraph& g) {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(g.n(), g.n());
    for (const auto& [i, j] : g.edges()) a(i, j) = a(j, i) = 1.0;
    return a;
}

ExtractionOptions with_threshold(Index t) {
    ExtractionOptions o;
    o.stop_threshold = t;
    return o;
}

void check_partition(const ExtractionResult& r, Index n) {
    std::vector<int> seen(static_cast<std::size_t>(n), 0);
    for (const auto& s : r.sets) {
        CHECK(!s.members.empty());
        CHECK(std::is_sorted(s.members.begin(), s.members.end()));
        for (Index v : s.members) ++seen[static_cast<std::size_t>(v)];
    }
    for (Index v : r.remaining) ++seen[static_cast<std::size_t>(v)];
    CHECK(std::all_of(seen.begin(), seen.end(), [](int c) { return c == 1; }));
}

void check_prefix_density(const CorrelationGraph& g, const ExtractionResult& r) {
    ResidualGraph residual(g);
    for (const auto& s : r.sets) {
        const auto c = static_cast<std::size_t>(s.prefix_size_c);
        REQUIRE(s.prefix.size() == c);
        CHECK(2 * induced_edges(g, s.prefix) >= c * (c - 1) / 2);

        // Degree filter replayed on the residual graph at extraction time.
        for (Index u : s.prefix) {
            std::size_t deg = 0;
            for (Index w : s.prefix) deg += (w != u && residual.active(w) && g.has_edge(u, w)) ? 1 : 0;
            const bool member = std::binary_search(s.members.begin(), s.members.end(), u);
            CHECK(member == (2 * deg > c));
        }
        CHECK(s.mean_degree_filter == doctest::Approx(static_cast<double>(c) / 2.0));
        residual.remove(s.members);
    }
}

} // namespace

TEST_SUITE("confident") {

TEST_CASE("triangle plus an isolated vertex") {
    const CorrelationGraph g(4, clique_edges({0, 1, 2}));
    const ResidualGraph r(g);
    const auto e = top_eigenvector(r, EigenOptions{});
    CHECK(e.value == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(e.converged);
    for (Index v = 0; v < 3; ++v) CHECK(e.vector(v) == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-8));
    CHECK(std::abs(e.vector(3)) < 1e-12);
}

TEST_CASE("complete graph K5") {
    const CorrelationGraph g(5, clique_range(0, 5));
    const auto e = top_eigenvector(ResidualGraph(g), EigenOptions{});
    CHECK(e.value == doctest::Approx(4.0).epsilon(1e-9));
    for (Index v = 0; v < 5; ++v) CHECK(e.vector(v) == doctest::Approx(1.0 / std::sqrt(5.0)).epsilon(1e-8));
}

TEST_CASE("K4 and K3: eigenvector, prefix and filter") {
    const CorrelationGraph g(7, join(clique_range(0, 4), clique_range(4, 3)));
    const ResidualGraph r(g);
    const auto e = top_eigenvector(r, EigenOptions{});
    CHECK(e.value == doctest::Approx(3.0).epsilon(1e-9));
    for (Index v = 4; v < 7; ++v) CHECK(std::abs(e.vector(v)) < 1e-6);

    const auto prefix = select_dense_prefix(e.vector, r);
    CHECK(prefix.c == 5);
    CHECK(prefix.edges == 6);
    CHECK(prefix.vertices == std::vector<Index>{0, 1, 2, 3, 4});

    const auto set = filter_low_degree(prefix, r);
    CHECK(set.members == std::vector<Index>{0, 1, 2, 3});
    CHECK(set.prefix_size_c == 5);
    CHECK(set.mean_degree_filter == 2.5);
}

TEST_CASE("eigenpair matches a dense solver") {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const auto g = testutil::random_graph(60, 0.15, seed);
        EigenOptions o;
        o.tol = 1e-10;
        const auto e = top_eigenvector(ResidualGraph(g), o);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> oracle(dense_adjacency(g));
        CHECK(e.value == doctest::Approx(oracle.eigenvalues()(59)).epsilon(1e-8));
        CHECK(std::abs(e.vector.dot(oracle.eigenvectors().col(59))) >= 1.0 - 1e-8);
        CHECK(e.vector.norm() == doctest::Approx(1.0));
        CHECK(e.vector.sum() >= 0.0);

        const Eigen::VectorXd resid = dense_adjacency(g) * e.vector - e.value * e.vector;
        CHECK(resid.norm() <= o.tol * std::max(e.value, 1.0) * 1.0001);
        CHECK(e.residual <= o.tol * std::max(e.value, 1.0));
    }
}

TEST_CASE("eigen solver errors") {
    const CorrelationGraph empty(5, {});
    CHECK(kind_of([&] { top_eigenvector(ResidualGraph(empty), EigenOptions{}); }) == ErrorKind::NoEdges);

    const auto g = testutil::random_graph(200, 0.05, 4);
    EigenOptions o;
    o.tol = 1e-15;
    o.max_iter = 1;
    try {
        top_eigenvector(ResidualGraph(g), o);
        FAIL("expected a convergence error");
    } catch (const EigenConvergenceError& err) {
        CHECK(err.kind() == ErrorKind::ConvergenceError);
        CHECK(err.best().vector.size() == 200);
        CHECK(!err.best().converged);
    }
}

TEST_CASE("removed vertices are invisible to the residual") {
    const CorrelationGraph g(7, join(clique_range(0, 4), clique_range(4, 3)));
    ResidualGraph r(g);
    const std::vector<Index> gone{0, 1, 2, 3};
    r.remove(gone);
    CHECK(r.active_count() == 3);
    CHECK(r.active_edges() == 3);
    const auto e = top_eigenvector(r, EigenOptions{});
    CHECK(e.value == doctest::Approx(2.0).epsilon(1e-9));
    for (Index v = 0; v < 4; ++v) CHECK(e.vector(v) == 0.0);
}

TEST_CASE("a lone clique is its own prefix and survives the filter") {
    for (Index m : {3, 4, 9}) {
        const CorrelationGraph g(m, clique_range(0, m));
        const ResidualGraph r(g);
        const auto prefix = select_dense_prefix(top_eigenvector(r, EigenOptions{}).vector, r);
        CHECK(prefix.c == m);
        const auto set = filter_low_degree(prefix, r);
        std::vector<Index> expected(static_cast<std::size_t>(m));
        std::iota(expected.begin(), expected.end(), Index{0});
        CHECK(set.members == expected);
    }
}

TEST_CASE("star keeps only its center") {
    std::vector<Edge> edges;
    for (Index leaf = 1; leaf <= 5; ++leaf) edges.emplace_back(0, leaf);
    const CorrelationGraph g(6, edges);
    const ResidualGraph r(g);
    const auto e = top_eigenvector(r, EigenOptions{});
    CHECK(e.value == doctest::Approx(std::sqrt(5.0)).epsilon(1e-9));
    const auto prefix = select_dense_prefix(e.vector, r);
    CHECK(prefix.c == 4);
    CHECK(filter_low_degree(prefix, r).members == std::vector<Index>{0});
}

TEST_CASE("prefix selection on an edgeless residual is empty") {
    const CorrelationGraph g(4, {});
    const ResidualGraph r(g);
    const auto prefix = select_dense_prefix(Eigen::VectorXd::Constant(4, 0.5), r);
    CHECK(prefix.vertices.empty());
    CHECK(prefix.c == 0);
}

TEST_CASE("prefix selection breaks entry ties by vertex index") {
    const CorrelationGraph g(6, join(clique_edges({1, 3, 5}), clique_edges({0, 2})));
    const ResidualGraph r(g);
    Eigen::VectorXd v(6);
    v << 0.2, 0.5, 0.2, 0.5, 0.1, 0.5;
    const auto prefix = select_dense_prefix(v, r);
    REQUIRE(prefix.c >= 3);
    CHECK(std::vector<Index>(prefix.vertices.begin(), prefix.vertices.begin() + 3) == std::vector<Index>{1, 3, 5});
}

TEST_CASE("two disjoint cliques are extracted larger first") {
    const CorrelationGraph g(30, join(clique_range(0, 20), clique_range(20, 10)));
    const auto r = extract_confident_sets(g, with_threshold(5));
    REQUIRE(r.sets.size() == 2);
    std::vector<Index> big(20), small(10);
    std::iota(big.begin(), big.end(), Index{0});
    std::iota(small.begin(), small.end(), Index{20});
    CHECK(r.sets[0].members == big);
    CHECK(r.sets[1].members == small);
    CHECK(r.sets[0].order_found == 0);
    CHECK(r.sets[1].order_found == 1);
    CHECK(r.remaining.empty());
    CHECK(r.stop == ExtractionStop::NoEdges);
    CHECK(r.eigen_history.size() == 2);
    check_partition(r, 30);
    check_prefix_density(g, r);
}

TEST_CASE("a prefix below the threshold ends extraction and is discarded") {
    const CorrelationGraph g(30, join(clique_range(0, 20), clique_range(20, 10)));
    const auto r = extract_confident_sets(g, with_threshold(15));
    REQUIRE(r.sets.size() == 1);
    CHECK(r.sets[0].members.size() == 20);
    CHECK(r.stop == ExtractionStop::PrefixBelowThreshold);
    CHECK(r.remaining.size() == 10);
    check_partition(r, 30);
}

TEST_CASE("edgeless graph yields no sets") {
    const CorrelationGraph g(12, {});
    const auto r = extract_confident_sets(g, with_threshold(3));
    CHECK(r.sets.empty());
    CHECK(r.remaining.size() == 12);
    CHECK(r.stop == ExtractionStop::NoEdges);
    CHECK(kind_of([&] { extract_confident_sets(g, with_threshold(2)); }) == ErrorKind::InvalidParameter);
}

TEST_CASE("two-block SBM: first set is nearly pure") {
    SbmSpec spec;
    spec.sizes = {50, 50};
    spec.p_in = 0.9;
    spec.p_out = 0.02;
    spec.seed = 3;
    const auto sbm = gen_sbm(spec);
    const auto r = extract_confident_sets(sbm.graph, with_threshold(5));
    REQUIRE(!r.sets.empty());
    CHECK(zeta(r.sets[0].members, sbm.labels) >= 0.95);
    CHECK(r.sets[0].members.size() >= 25);
    check_partition(r, 100);
    check_prefix_density(sbm.graph, r);
}

TEST_CASE("planted clique is recovered") {
    const auto planted = gen_planted_dense(400, 40, 0.05, 8);
    const auto r = extract_confident_sets(planted.graph, with_threshold(10));
    REQUIRE(!r.sets.empty());
    const auto& first = r.sets[0].members;
    std::vector<Index> common;
    std::set_intersection(first.begin(), first.end(), planted.planted.begin(), planted.planted.end(),
                          std::back_inserter(common));
    CHECK(common.size() == planted.planted.size());
    CHECK(static_cast<double>(common.size()) / static_cast<double>(first.size()) >= 0.95);
    check_partition(r, 400);
    check_prefix_density(planted.graph, r);
}

TEST_CASE("invariants on random and block graphs") {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        SbmSpec spec;
        spec.sizes = {40, 30, 20};
        spec.p_in = 0.7;
        spec.p_out = 0.05;
        spec.seed = seed;
        const auto sbm = gen_sbm(spec);
        const auto r = extract_confident_sets(sbm.graph, with_threshold(3));
        check_partition(r, 90);
        check_prefix_density(sbm.graph, r);

        const auto g = testutil::random_graph(80, 0.3, seed);
        const auto r2 = extract_confident_sets(g, with_threshold(3));
        check_partition(r2, 80);
        check_prefix_density(g, r2);
    }
}

TEST_CASE("extraction is deterministic") {
    const auto g = testutil::random_graph(120, 0.1, 5);
    const auto a = extract_confident_sets(g, with_threshold(3));
    const auto b = extract_confident_sets(g, with_threshold(3));
    REQUIRE(a.sets.size() == b.sets.size());
    for (std::size_t i = 0; i < a.sets.size(); ++i) CHECK(a.sets[i].members == b.sets[i].members);
    CHECK(a.remaining == b.remaining);
}

TEST_CASE("default stop threshold") {
    CHECK(default_stop_threshold(2870, 5.0) == 191);
    CHECK(default_stop_threshold(5000, 5.0) == 333);
    CHECK(default_stop_threshold(100, 5.0) == 20);
    CHECK(default_stop_threshold(4743, 3.0) == 190);
}

}
