#include "confclust/assign.hpp"

#include "test_util.hpp"

#include <doctest.h>

#include <algorithm>
#include <numeric>

using namespace confclust;
using testutil::kind_of;

namespace {

// 100 points: cluster 1 = 0..19, cluster 2 = 20..39, the rest unassigned.
// At delta = 10 the vote depth is floor(10 * 100 / 100) = 10.
Clustering two_clusters() {
    Clustering c;
    c.n = 100;
    c.clusters.resize(2);
    for (Index v = 0; v < 20; ++v) c.clusters[0].push_back(v);
    for (Index v = 20; v < 40; ++v) c.clusters[1].push_back(v);
    for (Index v = 40; v < 100; ++v) c.unassigned.push_back(v);
    return c;
}

// Vertex lists of length 10: `in1` entries from cluster 1, `in2` from
// cluster 2, the rest from unassigned points 60.. (never voting members).
std::vector<Index> list_with(Index in1, Index in2, Index self) {
    std::vector<Index> list;
    for (Index k = 0; k < in1; ++k) list.push_back(k);
    for (Index k = 0; k < in2; ++k) list.push_back(20 + k);
    for (Index k = 60; static_cast<Index>(list.size()) < 10; ++k) {
        if (k != self) list.push_back(k);
    }
    return list;
}

std::vector<std::vector<Index>> default_lists() {
    std::vector<std::vector<Index>> lists(100);
    for (Index u = 0; u < 100; ++u) lists[static_cast<std::size_t>(u)] = list_with(0, 0, u);
    return lists;
}

} // namespace

TEST_SUITE("assign") {

TEST_CASE("vote depth") {
    CHECK(vote_depth(100, 10.0) == 10);
    CHECK(vote_depth(2870, 2.5) == 71);
    CHECK(vote_depth(4743, 2.5) == 118);
    CHECK(vote_depth(10, 100.0) == 9);
}

TEST_CASE("strict majority of the top t") {
    auto lists = default_lists();
    lists[40] = list_with(0, 6, 40); // 6 of 10 in cluster 2
    lists[41] = list_with(0, 5, 41); // exactly half
    lists[42] = list_with(5, 5, 42);
    lists[43] = list_with(10, 0, 43);
    const auto nb = Neighborhoods::from_lists(lists);
    const auto out = majority_assign(two_clusters(), nb, 10.0);
    CHECK(out.stage == Stage::PostMajority);
    const auto labels = out.labels();
    CHECK(labels[40] == 2);
    CHECK(labels[41] == 0);
    CHECK(labels[42] == 0);
    CHECK(labels[43] == 1);
    CHECK(out.unassigned.size() == 58);
    out.check_disjoint();
}

TEST_CASE("assignment is simultaneous") {
    auto lists = default_lists();
    lists[40] = list_with(6, 0, 40);
    // 41 would reach a majority only by counting 40 as a new member of cluster 1.
    lists[41] = {0, 1, 2, 3, 4, 40, 60, 61, 62, 63};
    const auto nb = Neighborhoods::from_lists(lists);
    const auto labels = majority_assign(two_clusters(), nb, 10.0).labels();
    CHECK(labels[40] == 1);
    CHECK(labels[41] == 0);
}

TEST_CASE("outcome does not depend on processing order") {
    auto lists = default_lists();
    for (Index u = 40; u < 60; ++u) lists[static_cast<std::size_t>(u)] = list_with(u % 8, 7 - u % 8, u);
    const auto nb = Neighborhoods::from_lists(lists);
    auto forward = two_clusters();
    auto reversed = forward;
    std::reverse(reversed.unassigned.begin(), reversed.unassigned.end());
    const auto a = majority_assign(forward, nb, 10.0);
    const auto b = majority_assign(reversed, nb, 10.0);
    CHECK(a.labels() == b.labels());

    // Every assigned point had exactly one cluster above t/2.
    const auto labels = a.labels();
    for (Index u = 40; u < 60; ++u) {
        const auto in1 = u % 8, in2 = 7 - u % 8;
        const int expected = in1 > 5 ? 1 : (in2 > 5 ? 2 : 0);
        CHECK(labels[static_cast<std::size_t>(u)] == expected);
    }
}

TEST_CASE("coverage never shrinks") {
    auto lists = default_lists();
    for (Index u = 40; u < 100; u += 3) lists[static_cast<std::size_t>(u)] = list_with(7, 0, u);
    const auto nb = Neighborhoods::from_lists(lists);
    const auto primary = two_clusters();
    const auto post = majority_assign(primary, nb, 10.0);
    CHECK(post.unassigned.size() <= primary.unassigned.size());
    for (std::size_t c = 0; c < 2; ++c) {
        CHECK(std::includes(post.clusters[c].begin(), post.clusters[c].end(), primary.clusters[c].begin(),
                            primary.clusters[c].end()));
    }
}

TEST_CASE("zero vote depth is rejected") {
    const auto nb = Neighborhoods::from_lists(default_lists());
    CHECK(kind_of([&] { majority_assign(two_clusters(), nb, 0.5); }) == ErrorKind::InvalidParameter);
}

TEST_CASE("plurality ties go to the lower cluster") {
    Clustering post;
    post.n = 100;
    post.stage = Stage::PostMajority;
    post.clusters.resize(3);
    for (Index v = 0; v < 10; ++v) post.clusters[0].push_back(v);
    for (Index v = 10; v < 20; ++v) post.clusters[1].push_back(v);
    for (Index v = 20; v < 30; ++v) post.clusters[2].push_back(v);
    for (Index v = 30; v < 100; ++v) post.unassigned.push_back(v);

    std::vector<std::vector<Index>> lists(100);
    for (Index u = 0; u < 100; ++u) {
        for (Index k = 90; static_cast<Index>(lists[static_cast<std::size_t>(u)].size()) < 10; ++k) {
            if (k != u) lists[static_cast<std::size_t>(u)].push_back(k == 100 ? 89 : k);
        }
    }
    lists[30] = {10, 11, 12, 0, 1, 2, 20, 90, 91, 92}; // overlaps (3, 3, 1)
    lists[31] = {20, 21, 22, 23, 10, 90, 91, 92, 93, 94};
    const auto nb = Neighborhoods::from_lists(lists);

    const auto out = finalize(post, nb, FinalizePolicy::Plurality, 10.0);
    CHECK(out.clustering.stage == Stage::Final);
    CHECK(out.clustering.unassigned.empty());
    const auto labels = out.clustering.labels();
    CHECK(labels[30] == 1);
    CHECK(labels[31] == 3);
    CHECK(labels[50] == 1); // no overlap at all
    CHECK(out.clustering.assigned_count() == 100);
    CHECK_FALSE(out.recursion.has_value());
    out.clustering.check_disjoint();
}

TEST_CASE("leave and recurse policies keep leftovers") {
    const auto nb = Neighborhoods::from_lists(default_lists());
    auto post = two_clusters();
    post.stage = Stage::PostMajority;

    const auto left = finalize(post, nb, FinalizePolicy::Leave, 10.0);
    CHECK(left.clustering.stage == Stage::Final);
    CHECK(left.clustering.unassigned == post.unassigned);
    CHECK(left.clustering.clusters == post.clusters);

    const auto rec = finalize(post, nb, FinalizePolicy::RecurseReport, 10.0);
    CHECK(rec.clustering.unassigned == post.unassigned);
    REQUIRE(rec.recursion.has_value());
    CHECK(rec.recursion->points == post.unassigned);
}

TEST_CASE("policy names") {
    CHECK(parse_finalize_policy("leave") == FinalizePolicy::Leave);
    CHECK(parse_finalize_policy("plurality") == FinalizePolicy::Plurality);
    CHECK(parse_finalize_policy("recurse_report") == FinalizePolicy::RecurseReport);
    CHECK(to_string(FinalizePolicy::Plurality) == "plurality");
    CHECK(kind_of([] { parse_finalize_policy("vote"); }) == ErrorKind::InvalidParameter);
}

TEST_CASE("overlapping clusters are caught") {
    Clustering c;
    c.n = 5;
    c.clusters = {{0, 1}, {1, 2}};
    c.unassigned = {3, 4};
    CHECK(kind_of([&] { c.check_disjoint(); }) == ErrorKind::InvalidInput);
    c.clusters = {{0, 1}, {2}};
    c.unassigned = {2, 3};
    CHECK(kind_of([&] { c.check_disjoint(); }) == ErrorKind::InvalidInput);
    c.unassigned = {3, 7};
    CHECK(kind_of([&] { c.check_disjoint(); }) == ErrorKind::InvalidInput);
}

}
