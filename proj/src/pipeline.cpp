#include "confclust/pipeline.hpp"

#include "confclust/corrgraph.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <fstream>
#include <new>

namespace confclust {

namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

std::string shortest(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

json summary_json(const ErrorSummary& s) {
    return {{"e_inf", s.e_inf}, {"e_avg", s.e_avg}, {"e_mean", s.e_mean}, {"per_cluster", s.per_cluster}};
}

json stage_json(const Clustering& c, const Dataset& ds) {
    json j;
    std::vector<std::size_t> sizes;
    for (const auto& cl : c.clusters) sizes.push_back(cl.size());
    j["clusters"] = c.clusters.size();
    j["sizes"] = sizes;
    j["assigned"] = c.assigned_count();
    j["unassigned"] = c.unassigned.size();
    if (!ds.labeled()) return j;

    const auto table = confusion_table(c, ds.labels, ds.k);
    j["confusion"] = table.counts;
    j["unlabeled_assigned"] = table.unlabeled_assigned;
    std::vector<json> identity;
    for (const auto& row : table.counts) {
        const bool empty = std::all_of(row.begin(), row.end(), [](Count x) { return x == 0; });
        identity.push_back(empty ? json(nullptr) : json(ds.label_names[static_cast<std::size_t>(cluster_identity(row) - 1)]));
    }
    j["identity"] = identity;
    j["error"] = summary_json(error_summary(table));
    return j;
}

json pca_json(const PcaModel& m) {
    std::vector<double> eig(m.eigenvalues.data(), m.eigenvalues.data() + m.eigenvalues.size());
    return {{"k_prime", m.k_prime},
            {"eigenvalues", eig},
            {"iterations", m.iterations},
            {"converged", m.converged},
            {"max_residual", m.max_residual},
            {"warnings", m.warnings}};
}

json z_history_json(const std::vector<MergeStep>& steps) {
    json arr = json::array();
    for (const auto& s : steps) {
        arr.push_back({{"round", s.round},
                       {"set_a", s.set_a},
                       {"set_b", s.set_b},
                       {"z_max", s.z_max},
                       {"size_a", s.size_a},
                       {"size_b", s.size_b},
                       {"accepted", s.accepted}});
    }
    return arr;
}

std::vector<int> stage_labels(const Clustering& c) { return c.labels(); }

} // namespace

bool Dataset::fully_labeled() const {
    return labeled() && std::none_of(labels.begin(), labels.end(), [](int l) { return l <= 0; });
}

Dataset load_dataset(const RunConfig& cfg) {
    if (cfg.data.empty()) throw Error(ErrorKind::InvalidParameter, "no input data given");
    InputFormat format = cfg.format;
    if (format == InputFormat::Auto) format = cfg.data.extension() == ".mtx" ? InputFormat::Sparse : InputFormat::Dense;

    auto data = format == InputFormat::Sparse ? load_sparse_matrix(cfg.data, cfg.ids, cfg.features)
                                              : load_dense_matrix(cfg.data, cfg.orientation);
    Dataset ds{std::move(data), {}, {}, 0};
    if (cfg.labels) {
        const auto truth = load_labels(*cfg.labels);
        ds.labels = truth.for_points(ds.data.point_ids());
        ds.label_names = truth.names;
        ds.k = truth.k;
    }
    return ds;
}

const CachedScores* ScoreCache::find(Index k_prime) const {
    auto it = entries_.find(k_prime);
    return it == entries_.end() ? nullptr : &it->second;
}

void ScoreCache::insert(Index k_prime, CachedScores entry) { entries_[k_prime] = std::move(entry); }

json PipelineResult::full_report() const {
    json j = report;
    j["timings"] = timings;
    return j;
}

PipelineResult run_pipeline(const RunConfig& cfg, const Dataset& ds, ScoreCache* cache) {
    PipelineResult result;
    json& rep = result.report;
    rep["config"] = to_json(cfg);
    rep["dataset"] = {{"points", ds.data.n_points()},
                      {"features", ds.data.n_features()},
                      {"sparse", ds.data.is_sparse()},
                      {"labeled", ds.labeled()},
                      {"label_count", ds.k}};
    result.timings = json::object();

    auto stage = [&](const char* name, auto&& body) {
        if (result.failure) return false;
        const auto t0 = Clock::now();
        try {
            body();
        } catch (const Error& e) {
            result.failure = StageFailure{name, e.kind(), e.what()};
        } catch (const std::bad_alloc&) {
            result.failure = StageFailure{name, ErrorKind::InvalidInput, "out of memory"};
        }
        result.timings[name] = std::chrono::duration<double>(Clock::now() - t0).count();
        return !result.failure;
    };

    const DataMatrix* data = &ds.data;
    std::optional<DataMatrix> normalized;
    stage("normalize", [&] {
        if (!cfg.normalize.library_size && !cfg.normalize.log1p) return;
        auto nr = normalize(ds.data, cfg.normalize);
        rep["normalize"] = {{"zero_columns", nr.zero_columns}, {"warnings", nr.warnings}};
        normalized.emplace(std::move(nr.matrix));
        data = &*normalized;
    });

    std::shared_ptr<const PairScores> scores;
    const CachedScores* hit = cache ? cache->find(cfg.k_prime) : nullptr;
    if (hit) {
        scores = hit->scores;
        rep["pca"] = hit->pca;
        result.timings["score_cache"] = "memory";
    } else {
        std::optional<PcaModel> model;
        stage("pca", [&] {
            PcaOptions po;
            po.k_prime = cfg.k_prime;
            po.tol = cfg.pca_tol;
            po.max_iter = cfg.pca_max_iter;
            po.seed = cfg.seed;
            model = fit_pca(*data, po);
            rep["pca"] = pca_json(*model);
        });
        stage("scores", [&] {
            if (cfg.score_cache && std::filesystem::exists(*cfg.score_cache)) {
                auto loaded = PairScores::load(*cfg.score_cache);
                if (loaded.n() == data->n_points() && loaded.k_prime() == cfg.k_prime) {
                    scores = std::make_shared<const PairScores>(std::move(loaded));
                    result.timings["score_cache"] = "file";
                    return;
                }
            }
            scores = std::make_shared<const PairScores>(all_pair_scores(*data, project(*model, *data)));
            if (cfg.score_cache) scores->save(*cfg.score_cache);
        });
        if (scores && cache) cache->insert(cfg.k_prime, {scores, rep["pca"]});
    }

    std::optional<CorrelationGraph> graph;
    stage("corrgraph", [&] {
        graph = build_correlation_graph(*scores, cfg.gamma_percent);
        json g = {{"gamma", cfg.gamma_percent}, {"edges", graph->num_edges()}};
        if (ds.fully_labeled()) {
            const auto q = graph_quality(*graph, ds.labels);
            g["alpha"] = q.alpha;
            g["beta"] = q.beta;
            g["intra_edges"] = q.intra_edges;
            g["inter_edges"] = q.inter_edges;
        }
        rep["graph"] = g;
    });

    const bool derived_t = !cfg.stop_threshold.has_value();
    result.stop_threshold = derived_t ? default_stop_threshold(ds.data.n_points(), cfg.gamma_percent) : *cfg.stop_threshold;
    const Index vote_t = vote_depth(ds.data.n_points(), cfg.delta_percent);
    rep["interpretation"] = {
        {"stop_threshold", result.stop_threshold},
        {"stop_threshold_source", derived_t ? "derived: max(20, round(2/3 * gamma * 100 * n / 5000))" : "config"},
        {"below_threshold_round", "discarded"},
        {"pair_order", "ratio descending, ties by lexicographic pair (i, j)"},
        {"prefix_order", "residual eigenvector entries descending, ties by vertex index"},
        {"degree_filter", "induced degree > c/2"},
        {"merge_ties", "smallest pair of lowest original set indices"},
        {"gap_first_merge_floor", cfg.stopping.z_floor},
        {"neighborhood_length", percent_count(cfg.delta_percent, static_cast<std::size_t>(std::max<Index>(ds.data.n_points() - 1, 0)))},
        {"vote_depth", vote_t},
        {"majority", "strict, simultaneous against primary clusters"},
        {"plurality_ties", "lower cluster index"},
    };

    stage("confident", [&] {
        ExtractionOptions eo;
        eo.stop_threshold = result.stop_threshold;
        eo.eigen.tol = cfg.eigen_tol;
        eo.eigen.max_iter = cfg.eigen_max_iter;
        eo.eigen.seed = cfg.seed;
        result.extraction = extract_confident_sets(*graph, eo);
        const auto& ex = *result.extraction;
        json sets = json::array();
        for (const auto& cs : ex.sets) {
            json s = {{"order", cs.order_found}, {"size", cs.members.size()}, {"c", cs.prefix_size_c}};
            if (ds.fully_labeled()) s["zeta"] = zeta(cs.members, ds.labels);
            sets.push_back(s);
        }
        json rounds = json::array();
        for (const auto& r : ex.eigen_history) {
            rounds.push_back({{"eigenvalue", r.value}, {"iterations", r.iterations}, {"residual", r.residual}, {"prefix_size", r.prefix_size}});
        }
        rep["confident_sets"] = sets;
        rep["extraction"] = {{"stop", std::string(to_string(ex.stop))}, {"remaining", ex.remaining.size()}, {"rounds", rounds}};
        if (ex.sets.empty()) throw Error(ErrorKind::NoEdges, "no confident set was found");
    });

    std::optional<Neighborhoods> nb;
    stage("merge", [&] {
        nb = delta_neighborhoods(*scores, cfg.delta_percent, vote_t);
        result.merge = form_primary_clusters(*result.extraction, *nb, cfg.stopping);
        result.primary = result.merge->primary;
        rep["merge"] = {{"status", std::string(to_string(result.merge->status))},
                        {"rule", std::string(to_string(cfg.stopping.kind))},
                        {"z_history", z_history_json(result.merge->z_history)},
                        {"lineage", result.merge->lineage}};
    });

    json stages = json::object();
    if (result.primary) stages["primary"] = stage_json(*result.primary, ds);
    stage("assign", [&] {
        result.post_majority = majority_assign(*result.primary, *nb, cfg.delta_percent);
        stages["post_majority"] = stage_json(*result.post_majority, ds);
    });
    stage("finalize", [&] {
        auto fr = finalize(*result.post_majority, *nb, cfg.finalize, cfg.delta_percent);
        result.final_clustering = std::move(fr.clustering);
        result.recursion = std::move(fr.recursion);
        stages["final"] = stage_json(*result.final_clustering, ds);
        stages["final"]["policy"] = std::string(to_string(cfg.finalize));
        if (result.recursion) {
            std::vector<std::string> ids;
            for (Index v : result.recursion->points) ids.push_back(ds.data.point_ids()[static_cast<std::size_t>(v)]);
            rep["recursion"] = {{"points", ids.size()}, {"point_ids", ids}};
        }
    });
    rep["stages"] = stages;

    rep["failed_at"] = result.failure ? json(result.failure->stage) : json(nullptr);
    if (result.failure) {
        rep["error"] = {{"kind", std::string(to_string(result.failure->kind))}, {"message", result.failure->message}};
    }
    return result;
}

void write_outputs(const std::filesystem::path& dir, const PipelineResult& result, const Dataset& ds) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error(ErrorKind::IoError, "cannot create " + dir.string() + ": " + ec.message());

    {
        std::ofstream out(dir / "report.json");
        if (!out) throw Error(ErrorKind::IoError, "cannot write " + (dir / "report.json").string());
        out << result.full_report().dump(2) << '\n';
    }
    const auto& ids = ds.data.point_ids();
    if (result.primary) write_labels(dir / "labels_primary.csv", ids, stage_labels(*result.primary));
    if (result.post_majority) write_labels(dir / "labels_post_majority.csv", ids, stage_labels(*result.post_majority));
    if (result.final_clustering) write_labels(dir / "labels_final.csv", ids, stage_labels(*result.final_clustering));
    if (result.merge) {
        std::ofstream out(dir / "z_history.csv");
        out << "round,set_a,set_b,z_max,size_a,size_b,accepted\n";
        for (const auto& s : result.merge->z_history) {
            out << s.round << ',' << s.set_a << ',' << s.set_b << ',' << shortest(s.z_max) << ',' << s.size_a << ','
                << s.size_b << ',' << (s.accepted ? 1 : 0) << '\n';
        }
    }
    if (result.recursion) {
        std::ofstream out(dir / "recursion_points.txt");
        for (Index v : result.recursion->points) out << ids[static_cast<std::size_t>(v)] << '\n';
    }
    const auto marker = dir / "FAILED";
    if (result.failure) {
        std::ofstream out(marker);
        out << "failed_at=" << result.failure->stage << '\n' << result.failure->message << '\n';
    } else {
        std::filesystem::remove(marker, ec);
    }
}

PipelineResult run_pipeline(const RunConfig& cfg) {
    Dataset ds{DataMatrix(Eigen::MatrixXd(0, 0)), {}, {}, 0};
    try {
        ds = load_dataset(cfg);
    } catch (const Error& e) {
        PipelineResult failed;
        failed.failure = StageFailure{"ingest", e.kind(), e.what()};
        failed.report = {{"config", to_json(cfg)},
                         {"failed_at", "ingest"},
                         {"error", {{"kind", std::string(to_string(e.kind()))}, {"message", e.what()}}}};
        failed.timings = json::object();
        write_outputs(cfg.output_dir, failed, ds);
        throw PipelineError("ingest", e.kind(), e.what());
    }
    auto result = run_pipeline(cfg, ds);
    write_outputs(cfg.output_dir, result, ds);
    if (result.failure) throw PipelineError(result.failure->stage, result.failure->kind, result.failure->message);
    return result;
}

bool SweepReport::any_failed() const {
    return std::any_of(cells.begin(), cells.end(), [](const SweepCell& c) { return c.failure.has_value(); });
}

json SweepReport::to_json() const {
    json j;
    json arr = json::array();
    for (const auto& c : cells) {
        json cell = {{"k_prime", c.k_prime}, {"gamma", c.gamma_percent}, {"delta", c.delta_percent}};
        if (c.failure) {
            cell["failed_at"] = c.failure->stage;
            cell["error"] = c.failure->message;
        } else {
            cell["primary_clusters"] = c.primary_clusters;
            cell["unassigned"] = {{"primary", c.unassigned_primary},
                                  {"post_majority", c.unassigned_post_majority},
                                  {"final", c.unassigned_final}};
            if (c.primary_error) cell["primary_error"] = summary_json(*c.primary_error);
            if (c.post_majority_error) cell["post_majority_error"] = summary_json(*c.post_majority_error);
        }
        arr.push_back(cell);
    }
    j["cells"] = arr;
    json m = json::array();
    for (const auto& row : ari) {
        json r = json::array();
        for (const auto& v : row) r.push_back(v ? json(*v) : json(nullptr));
        m.push_back(r);
    }
    j["ari"] = m;
    return j;
}

SweepReport run_sweep(const RunConfig& base, const Dataset& ds, const SweepGrid& grid, bool reuse_scores) {
    if (grid.k_primes.empty() || grid.gammas.empty() || grid.deltas.empty()) {
        throw Error(ErrorKind::InvalidParameter, "sweep grid has an empty axis");
    }
    SweepReport report;
    ScoreCache cache;
    for (Index kp : grid.k_primes) {
        for (double g : grid.gammas) {
            for (double d : grid.deltas) {
                RunConfig cfg = base;
                cfg.k_prime = kp;
                cfg.gamma_percent = g;
                cfg.delta_percent = d;
                cfg.score_cache.reset();
                const auto r = run_pipeline(cfg, ds, reuse_scores ? &cache : nullptr);

                SweepCell cell;
                cell.k_prime = kp;
                cell.gamma_percent = g;
                cell.delta_percent = d;
                cell.failure = r.failure;
                if (r.ok()) {
                    cell.primary_clusters = r.primary->clusters.size();
                    cell.unassigned_primary = r.primary->unassigned.size();
                    cell.unassigned_post_majority = r.post_majority->unassigned.size();
                    cell.unassigned_final = r.final_clustering->unassigned.size();
                    cell.primary_labels = r.primary->labels();
                    if (ds.labeled()) {
                        cell.primary_error = error_summary(confusion_table(*r.primary, ds.labels, ds.k));
                        cell.post_majority_error = error_summary(confusion_table(*r.post_majority, ds.labels, ds.k));
                    }
                }
                report.cells.push_back(std::move(cell));
            }
        }
    }

    const std::size_t m = report.cells.size();
    report.ari.assign(m, std::vector<std::optional<double>>(m));
    for (std::size_t a = 0; a < m; ++a) {
        for (std::size_t b = a; b < m; ++b) {
            const auto& ca = report.cells[a];
            const auto& cb = report.cells[b];
            if (ca.failure || cb.failure) continue;
            try {
                const double v = partition_agreement(std::span<const int>(ca.primary_labels), std::span<const int>(cb.primary_labels));
                report.ari[a][b] = v;
                report.ari[b][a] = v;
            } catch (const Error&) {
            }
        }
    }
    return report;
}

} // namespace confclust
