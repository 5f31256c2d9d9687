#include "confclust/error.hpp"
#include "confclust/ingest.hpp"

#include "test_util.hpp"

#include <doctest.h>

#include <cmath>

using namespace confclust;
using testutil::TempDir;
using testutil::kind_of;
using testutil::write_file;

TEST_SUITE("ingest") {

TEST_CASE("dense CSV with header in both orientations") {
    TempDir tmp("ingest");
    const auto p = write_file(tmp / "m.csv", "gene,c1,c2\ng1,1,2\ng2,3,4\ng3,5,6\n");

    const auto rows = load_dense_matrix(p, Orientation::FeaturesAsRows);
    CHECK(rows.n_features() == 3);
    CHECK(rows.n_points() == 2);
    CHECK(rows.point_ids() == std::vector<std::string>{"c1", "c2"});
    CHECK(rows.feature_ids() == std::vector<std::string>{"g1", "g2", "g3"});
    CHECK(rows.at(2, 1) == 6.0);

    const auto cols = load_dense_matrix(p, Orientation::PointsAsRows);
    CHECK(cols.n_features() == 2);
    CHECK(cols.n_points() == 3);
    CHECK(cols.point_ids() == std::vector<std::string>{"g1", "g2", "g3"});
    CHECK(cols.at(1, 2) == 6.0);
}

TEST_CASE("dense TSV without header synthesizes ids") {
    TempDir tmp("ingest");
    const auto p = write_file(tmp / "m.tsv", "1\t2\t3\n4\t5\t6\n");
    const auto m = load_dense_matrix(p, Orientation::FeaturesAsRows);
    CHECK(m.n_features() == 2);
    CHECK(m.n_points() == 3);
    CHECK(m.point_ids() == std::vector<std::string>{"p000001", "p000002", "p000003"});
    CHECK(m.at(1, 0) == 4.0);
}

TEST_CASE("dense parse errors") {
    TempDir tmp("ingest");
    const auto bad = write_file(tmp / "bad.csv", "id,a,b\nx,1,2\ny,abc,3\n");
    try {
        load_dense_matrix(bad, Orientation::FeaturesAsRows);
        FAIL("expected ParseError");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::ParseError);
        const std::string msg = e.what();
        CHECK(msg.find("abc") != std::string::npos);
    }
    const auto ragged = write_file(tmp / "ragged.csv", "1,2,3\n4,5\n");
    CHECK(kind_of([&] { load_dense_matrix(ragged, Orientation::FeaturesAsRows); }) == ErrorKind::ParseError);
    const auto empty = write_file(tmp / "empty.csv", "");
    CHECK(kind_of([&] { load_dense_matrix(empty, Orientation::FeaturesAsRows); }) == ErrorKind::EmptyInput);
    CHECK(kind_of([&] { load_dense_matrix(tmp / "missing.csv", Orientation::FeaturesAsRows); }) == ErrorKind::IoError);
}

TEST_CASE("non-finite and duplicate ids rejected") {
    TempDir tmp("ingest");
    const auto dup = write_file(tmp / "dup.csv", "id,c1,c1\ng1,1,2\n");
    CHECK(kind_of([&] { load_dense_matrix(dup, Orientation::FeaturesAsRows); }) == ErrorKind::DuplicateId);
    Eigen::MatrixXd m(1, 1);
    m(0, 0) = std::nan("");
    CHECK(kind_of([&] { DataMatrix d(m); }) == ErrorKind::InvalidInput);
}

TEST_CASE("matrix market coordinate input") {
    TempDir tmp("ingest");
    const auto p = write_file(tmp / "m.mtx", "%%MatrixMarket matrix coordinate real general\n% comment\n3 2 2\n1 1 5\n3 2 7\n");
    const auto m = load_sparse_matrix(p);
    CHECK(m.is_sparse());
    CHECK(m.n_features() == 3);
    CHECK(m.n_points() == 2);
    CHECK(m.sparse().nonZeros() == 2);
    CHECK(m.at(0, 0) == 5.0);
    CHECK(m.at(2, 1) == 7.0);
    CHECK(m.at(1, 1) == 0.0);
    CHECK(m.point_ids() == std::vector<std::string>{"p000001", "p000002"});

    const auto oob = write_file(tmp / "oob.mtx", "%%MatrixMarket matrix coordinate real general\n3 2 1\n4 1 1\n");
    CHECK(kind_of([&] { load_sparse_matrix(oob); }) == ErrorKind::FormatError);
    const auto short_nnz = write_file(tmp / "nnz.mtx", "%%MatrixMarket matrix coordinate real general\n3 2 3\n1 1 1\n");
    CHECK(kind_of([&] { load_sparse_matrix(short_nnz); }) == ErrorKind::FormatError);
    const auto header = write_file(tmp / "hdr.mtx", "%%MatrixMarket matrix array real general\n3 2\n");
    CHECK(kind_of([&] { load_sparse_matrix(header); }) == ErrorKind::FormatError);

    const auto ids = write_file(tmp / "ids.txt", "a\nb\nc\n");
    CHECK(kind_of([&] { load_sparse_matrix(p, ids); }) == ErrorKind::DimensionMismatch);
    const auto ids2 = write_file(tmp / "ids2.txt", "a\nb\n");
    const auto feats = write_file(tmp / "features.tsv", "ENSG1\tA\tGene Expression\nENSG2\tB\tGene Expression\nENSG3\tC\tGene Expression\n");
    const auto named = load_sparse_matrix(p, ids2, feats);
    CHECK(named.point_ids() == std::vector<std::string>{"a", "b"});
    CHECK(named.feature_ids() == std::vector<std::string>{"ENSG1", "ENSG2", "ENSG3"});
}

TEST_CASE("pattern and integer fields") {
    TempDir tmp("ingest");
    const auto pat = write_file(tmp / "p.mtx", "%%MatrixMarket matrix coordinate pattern general\n2 2 2\n1 1\n2 2\n");
    const auto m = load_sparse_matrix(pat);
    CHECK(m.at(0, 0) == 1.0);
    CHECK(m.at(1, 1) == 1.0);
    const auto integer = write_file(tmp / "i.mtx", "%%MatrixMarket matrix coordinate integer general\n2 1 1\n2 1 9\n");
    CHECK(load_sparse_matrix(integer).at(1, 0) == 9.0);
}

TEST_CASE("labels") {
    TempDir tmp("ingest");
    const auto p = write_file(tmp / "l.csv", "c1,CD4\nc2,CD8\nc3,CD4\n");
    const auto gt = load_labels(p);
    CHECK(gt.k == 2);
    CHECK(gt.labels.at("c1") == 1);
    CHECK(gt.labels.at("c2") == 2);
    CHECK(gt.labels.at("c3") == 1);
    CHECK(gt.names == std::vector<std::string>{"CD4", "CD8"});
    CHECK(gt.for_points({"c3", "zz", "c2"}) == std::vector<int>{1, 0, 2});

    const auto with_header = write_file(tmp / "h.tsv", "cell\tLabel\nc1\tB\n");
    CHECK(load_labels(with_header).k == 1);

    const auto dup = write_file(tmp / "dup.csv", "c1,CD4\nc1,CD8\n");
    try {
        load_labels(dup);
        FAIL("expected DuplicateId");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::DuplicateId);
        CHECK(std::string(e.what()).find("c1") != std::string::npos);
    }
    const auto empty = write_file(tmp / "e.csv", "\n");
    CHECK(kind_of([&] { load_labels(empty); }) == ErrorKind::EmptyInput);
}

TEST_CASE("six label strings over 4743 rows give k = 6") {
    TempDir tmp("ingest");
    std::string text;
    const char* names[] = {"CD14", "CD19", "CD34", "CD4", "CD56", "CD8"};
    for (int i = 0; i < 4743; ++i) text += "cell" + std::to_string(i) + "," + names[i % 6] + "\n";
    CHECK(load_labels(write_file(tmp / "l.csv", text)).k == 6);
}

TEST_CASE("dense round trip is bit-identical") {
    TempDir tmp("ingest");
    Rng rng(7);
    Eigen::MatrixXd v(4, 5);
    for (Index c = 0; c < 5; ++c) {
        for (Index r = 0; r < 4; ++r) v(r, c) = rng.normal() * 1e3 + 1.0 / 3.0;
    }
    const DataMatrix m(v, {"a", "b", "c", "d", "e"}, {"f1", "f2", "f3", "f4"});
    for (auto orientation : {Orientation::FeaturesAsRows, Orientation::PointsAsRows}) {
        write_dense_matrix(tmp / "out.csv", m, orientation);
        const auto back = load_dense_matrix(tmp / "out.csv", orientation);
        CHECK(back.dense() == m.dense());
        CHECK(back.point_ids() == m.point_ids());
        CHECK(back.feature_ids() == m.feature_ids());
    }
}

TEST_CASE("sparse round trip is bit-identical") {
    TempDir tmp("ingest");
    Eigen::SparseMatrix<double> s(5, 3);
    s.insert(0, 0) = 0.1;
    s.insert(4, 0) = 1e-300;
    s.insert(2, 2) = 12345.678901234567;
    const DataMatrix m(s, {"x", "y", "z"});
    write_sparse_matrix(tmp / "m.mtx", m, tmp / "ids.txt");
    const auto back = load_sparse_matrix(tmp / "m.mtx", tmp / "ids.txt");
    CHECK(back.sparse().nonZeros() == 3);
    CHECK(Eigen::MatrixXd(back.sparse()) == Eigen::MatrixXd(s));
    CHECK(back.point_ids() == m.point_ids());
}

TEST_CASE("normalize") {
    Eigen::MatrixXd v(2, 3);
    v << 1, 0, 2,
         3, 0, 2;
    const DataMatrix m(v);
    NormalizeConfig cfg;
    cfg.library_size = 8.0;
    const auto r = normalize(m, cfg);
    CHECK(r.matrix.at(0, 0) == doctest::Approx(2.0));
    CHECK(r.matrix.at(1, 0) == doctest::Approx(6.0));
    CHECK(r.zero_columns == std::vector<Index>{1});
    CHECK_FALSE(r.warnings.empty());
    CHECK(r.matrix.at(0, 1) == 0.0);
    for (Index c : {0, 2}) {
        CHECK(std::abs(r.matrix.dense().col(c).sum() - 8.0) <= 1e-9 * 8.0);
    }

    const auto again = normalize(r.matrix, cfg);
    CHECK((again.matrix.dense() - r.matrix.dense()).cwiseAbs().maxCoeff() <= 1e-12 * 8.0);

    NormalizeConfig logcfg;
    logcfg.log1p = true;
    const auto lg = normalize(m, logcfg);
    CHECK(lg.matrix.at(0, 1) == 0.0);
    CHECK(lg.matrix.at(1, 0) == doctest::Approx(std::log1p(3.0)));

    cfg.log1p = true;
    const auto both = normalize(m, cfg);
    CHECK(both.matrix.at(1, 0) == doctest::Approx(std::log1p(6.0)));

    Eigen::MatrixXd neg(1, 1);
    neg(0, 0) = -1.0;
    NormalizeConfig scale;
    scale.library_size = 1.0;
    CHECK(kind_of([&] { normalize(DataMatrix(neg), scale); }) == ErrorKind::InvalidInput);
}

TEST_CASE("normalize sparse keeps sparsity") {
    Eigen::SparseMatrix<double> s(3, 2);
    s.insert(0, 0) = 1.0;
    s.insert(2, 0) = 3.0;
    s.insert(1, 1) = 5.0;
    NormalizeConfig cfg;
    cfg.library_size = 10.0;
    cfg.log1p = true;
    const auto r = normalize(DataMatrix(s), cfg);
    CHECK(r.matrix.is_sparse());
    CHECK(r.matrix.sparse().nonZeros() == 3);
    CHECK(r.matrix.at(2, 0) == doctest::Approx(std::log1p(7.5)));
}

TEST_CASE("squared distance agrees between storages") {
    Eigen::MatrixXd v(3, 3);
    v << 1, 0, 2,
         0, 0, 5,
         4, 1, 0;
    const DataMatrix dense(v);
    const DataMatrix sparse(Eigen::SparseMatrix<double>(v.sparseView()));
    for (Index i = 0; i < 3; ++i) {
        for (Index j = 0; j < 3; ++j) CHECK(dense.squared_distance(i, j) == sparse.squared_distance(i, j));
    }
    CHECK(dense.squared_distance(0, 2) == doctest::Approx(1 + 25 + 16));
    CHECK((dense.column_mean() - sparse.column_mean()).norm() == doctest::Approx(0.0));
}

}
