#include "confclust/corrgraph.hpp"
#include "confclust/eval.hpp"
#include "confclust/pipeline.hpp"
#include "confclust/synth.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

using namespace confclust;

namespace {

constexpr int kOk = 0;
constexpr int kBadInput = 2;
constexpr int kNumeric = 3;
constexpr int kPartialSweep = 4;

int exit_code(const Error& e) { return e.is_numeric() ? kNumeric : kBadInput; }

struct Overrides {
    std::string config_path;
    std::vector<std::pair<std::string, std::string>> values;
    std::vector<std::string> raw_sets;
};

void add_override(CLI::App* app, Overrides& ov, const std::string& flag, const std::string& key, const std::string& help) {
    app->add_option_function<std::string>(flag, [&ov, key](const std::string& v) { ov.values.emplace_back(key, v); }, help);
}

void add_flag_override(CLI::App* app, Overrides& ov, const std::string& flag, const std::string& key, const std::string& help) {
    app->add_flag_function(flag, [&ov, key](std::int64_t) { ov.values.emplace_back(key, "true"); }, help);
}

void add_input_options(CLI::App* app, Overrides& ov) {
    app->add_option("-c,--config", ov.config_path, "config file (flags override it)");
    add_override(app, ov, "-i,--data", "input.data", "matrix file: dense CSV/TSV or Matrix Market .mtx");
    add_override(app, ov, "--format", "input.format", "auto, dense or sparse");
    add_override(app, ov, "--orientation", "input.orientation", "features_as_rows (default) or points_as_rows");
    add_override(app, ov, "--ids", "input.ids", "point id file for sparse input");
    add_override(app, ov, "--features", "input.features", "feature id file for sparse input");
    add_override(app, ov, "-l,--labels", "input.labels", "ground-truth labels (point_id,label)");
    add_override(app, ov, "--library-size", "normalize.library_size", "scale every column to this sum");
    add_flag_override(app, ov, "--log1p", "normalize.log1p", "apply log(1 + x) after scaling");
}

void add_pipeline_options(CLI::App* app, Overrides& ov) {
    add_override(app, ov, "-k,--k-prime", "pipeline.k_prime", "number of principal components (default 20)");
    add_override(app, ov, "-g,--gamma", "pipeline.gamma", "percent of pairs kept as edges (default 5)");
    add_override(app, ov, "-d,--delta", "pipeline.delta", "neighborhood size in percent (default 2.5)");
    add_override(app, ov, "-T,--stop-threshold", "pipeline.stop_threshold", "extraction stop size (default derived)");
    add_override(app, ov, "--seed", "pipeline.seed", "seed for the iterative solvers");
    add_override(app, ov, "--rule", "merge.rule", "gap, target_count or z_floor");
    add_override(app, ov, "--gap-ratio", "merge.gap_ratio", "gap rule ratio (default 0.25)");
    add_override(app, ov, "--z-floor", "merge.z_floor", "z_floor rule bound, also the gap rule's first-merge floor");
    add_override(app, ov, "--target-count", "merge.target_count", "cluster count for target_count");
    add_override(app, ov, "--finalize", "assign.finalize", "leave, plurality or recurse_report");
    add_override(app, ov, "--score-cache", "output.score_cache", "binary file for pair scores (read if present)");
    app->add_option("--set", ov.raw_sets, "section.key=value, applied last")->allow_extra_args(false);
}

RunConfig build_config(const Overrides& ov) {
    RunConfig cfg = ov.config_path.empty() ? RunConfig{} : load_run_config(ov.config_path);
    for (const auto& [key, value] : ov.values) set_option(cfg, key, value);
    for (const auto& kv : ov.raw_sets) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw Error(ErrorKind::InvalidParameter, "--set expects key=value, got '" + kv + "'");
        set_option(cfg, kv.substr(0, eq), kv.substr(eq + 1));
    }
    return cfg;
}

template <typename T>
std::vector<T> parse_list(const std::string& text, const char* what) {
    std::vector<T> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::istringstream is(item);
        T v{};
        if (!(is >> v) || !(is >> std::ws).eof()) {
            throw Error(ErrorKind::InvalidParameter, std::string(what) + ": bad list item '" + item + "'");
        }
        out.push_back(v);
    }
    if (out.empty()) throw Error(ErrorKind::InvalidParameter, std::string(what) + " is empty");
    return out;
}

void print_stage(const char* name, const Clustering& c, const Dataset& ds) {
    std::printf("%-14s clusters %zu  assigned %zu  unassigned %zu", name, c.clusters.size(), c.assigned_count(),
                c.unassigned.size());
    if (ds.labeled()) {
        const auto s = error_summary(confusion_table(c, ds.labels, ds.k));
        std::printf("  e_inf %.4f  e_avg %.4f", s.e_inf, s.e_avg);
    }
    std::printf("\n");
}

int cmd_cluster(const Overrides& ov, const std::string& out_dir) {
    RunConfig cfg = build_config(ov);
    if (!out_dir.empty()) cfg.output_dir = out_dir;
    Dataset ds = load_dataset(cfg);
    auto result = run_pipeline(cfg, ds);
    write_outputs(cfg.output_dir, result, ds);

    std::printf("points %lld  features %lld  stop threshold %lld\n", static_cast<long long>(ds.data.n_points()),
                static_cast<long long>(ds.data.n_features()), static_cast<long long>(result.stop_threshold));
    if (result.extraction) std::printf("confident sets %zu\n", result.extraction->sets.size());
    if (result.primary) print_stage("primary", *result.primary, ds);
    if (result.post_majority) print_stage("post_majority", *result.post_majority, ds);
    if (result.final_clustering) print_stage("final", *result.final_clustering, ds);
    std::printf("report %s\n", (cfg.output_dir / "report.json").string().c_str());
    if (result.failure) {
        std::fprintf(stderr, "failed at %s: %s\n", result.failure->stage.c_str(), result.failure->message.c_str());
        return Error(result.failure->kind, "").is_numeric() ? kNumeric : kBadInput;
    }
    return kOk;
}

int cmd_sweep(const Overrides& ov, const std::string& out_dir, const std::string& kps, const std::string& gammas,
              const std::string& deltas, bool no_cache) {
    RunConfig cfg = build_config(ov);
    if (!out_dir.empty()) cfg.output_dir = out_dir;
    Dataset ds = load_dataset(cfg);
    SweepGrid grid{parse_list<Index>(kps, "--k-primes"), parse_list<double>(gammas, "--gammas"),
                   parse_list<double>(deltas, "--deltas")};
    const auto report = run_sweep(cfg, ds, grid, !no_cache);

    std::filesystem::create_directories(cfg.output_dir);
    std::ofstream(cfg.output_dir / "sweep.json") << report.to_json().dump(2) << '\n';
    std::printf("%6s %6s %6s  %8s %10s\n", "k'", "gamma", "delta", "clusters", "unassigned");
    for (const auto& c : report.cells) {
        std::printf("%6lld %6g %6g  ", static_cast<long long>(c.k_prime), c.gamma_percent, c.delta_percent);
        if (c.failure) {
            std::printf("failed at %s: %s\n", c.failure->stage.c_str(), c.failure->message.c_str());
        } else {
            std::printf("%8zu %10zu\n", c.primary_clusters, c.unassigned_primary);
        }
    }
    double min_ari = 1.0;
    bool any = false;
    for (const auto& row : report.ari) {
        for (const auto& v : row) {
            if (v) {
                min_ari = std::min(min_ari, *v);
                any = true;
            }
        }
    }
    if (any) std::printf("min pairwise ARI %.4f\n", min_ari);
    std::printf("report %s\n", (cfg.output_dir / "sweep.json").string().c_str());
    return report.any_failed() ? kPartialSweep : kOk;
}

struct SynthArgs {
    std::string out = "synth_out";
    std::uint64_t seed = 1;
    Index d = 400;
    std::string sizes = "620,560,160,580,500,450";
    std::string noise = "gaussian";
    std::string sigma = "1";
    double ratio = 0.95;
    double center_distance = -1.0;
    std::string format = "dense";
};

int cmd_synth(const SynthArgs& a) {
    VectorModelSpec spec;
    spec.seed = a.seed;
    spec.d = a.d;
    spec.sizes = parse_list<Index>(a.sizes, "--sizes");
    if (a.noise == "gaussian") spec.noise = NoiseKind::Gaussian;
    else if (a.noise == "uniform") spec.noise = NoiseKind::Uniform;
    else throw Error(ErrorKind::InvalidParameter, "--noise must be gaussian or uniform");
    spec.noise_scale = parse_list<double>(a.sigma, "--sigma");
    spec.intra_inter_ratio = a.ratio;
    if (a.center_distance >= 0.0) spec.center_distance = a.center_distance;

    const auto ld = gen_vectors(spec);
    const std::filesystem::path dir(a.out);
    std::filesystem::create_directories(dir);
    std::vector<std::string> names;
    for (Index j = 1; j <= spec.k(); ++j) names.push_back("V" + std::to_string(j));
    if (a.format == "sparse") {
        const DataMatrix sp(Eigen::SparseMatrix<double>(ld.data.dense().sparseView()), ld.data.point_ids());
        write_sparse_matrix(dir / "data.mtx", sp, dir / "ids.txt", {});
    } else if (a.format == "dense") {
        write_dense_matrix(dir / "data.csv", ld.data, Orientation::FeaturesAsRows);
    } else {
        throw Error(ErrorKind::InvalidParameter, "--format must be dense or sparse");
    }
    write_labels(dir / "labels.csv", ld.data.point_ids(), ld.labels, names);
    std::printf("wrote %lld points x %lld features to %s\n", static_cast<long long>(ld.data.n_points()),
                static_cast<long long>(ld.data.n_features()), dir.string().c_str());
    return kOk;
}

int cmd_eval(const std::string& pred_path, const std::string& truth_path, bool as_json) {
    const auto pred = load_labels(pred_path);
    const auto truth = load_labels(truth_path);

    std::set<std::string> universe;
    for (const auto& [id, l] : pred.labels) universe.insert(id);
    for (const auto& [id, l] : truth.labels) universe.insert(id);
    const std::vector<std::string> ids(universe.begin(), universe.end());

    // Cluster names keep their first-seen order; UNASSIGNED is not a cluster.
    std::vector<int> remap(pred.names.size() + 1, 0);
    std::vector<std::string> cluster_names;
    for (std::size_t i = 0; i < pred.names.size(); ++i) {
        if (pred.names[i] == "UNASSIGNED") continue;
        cluster_names.push_back(pred.names[i]);
        remap[i + 1] = static_cast<int>(cluster_names.size());
    }
    Clustering c;
    c.n = static_cast<Index>(ids.size());
    c.stage = Stage::Final;
    c.clusters.resize(cluster_names.size());
    const auto raw = pred.for_points(ids);
    std::vector<int> pred_labels(ids.size(), 0);
    for (std::size_t v = 0; v < ids.size(); ++v) {
        pred_labels[v] = remap[static_cast<std::size_t>(raw[v])];
        if (pred_labels[v] > 0) {
            c.clusters[static_cast<std::size_t>(pred_labels[v] - 1)].push_back(static_cast<Index>(v));
        } else {
            c.unassigned.push_back(static_cast<Index>(v));
        }
    }
    const auto truth_labels = truth.for_points(ids);
    const auto table = confusion_table(c, truth_labels, truth.k);
    const auto summary = error_summary(table);

    std::vector<int> a, b;
    for (std::size_t v = 0; v < ids.size(); ++v) {
        if (pred_labels[v] > 0 && truth_labels[v] > 0) {
            a.push_back(pred_labels[v]);
            b.push_back(truth_labels[v]);
        }
    }
    std::optional<double> ari;
    if (!a.empty()) ari = adjusted_rand_index(a, b);

    if (as_json) {
        nlohmann::json j = {{"clusters", cluster_names},
                            {"truth", truth.names},
                            {"confusion", table.counts},
                            {"unassigned", table.unassigned},
                            {"unlabeled_assigned", table.unlabeled_assigned},
                            {"e_inf", summary.e_inf},
                            {"e_avg", summary.e_avg},
                            {"e_mean", summary.e_mean},
                            {"per_cluster", summary.per_cluster},
                            {"ari", ari ? nlohmann::json(*ari) : nlohmann::json(nullptr)}};
        std::cout << j.dump(2) << '\n';
        return kOk;
    }
    std::cout << table.to_text();
    std::printf("unassigned %lld  unlabeled_assigned %lld\n", static_cast<long long>(table.unassigned),
                static_cast<long long>(table.unlabeled_assigned));
    std::printf("e_inf %.6f  e_avg %.6f  e_mean %.6f\n", summary.e_inf, summary.e_avg, summary.e_mean);
    if (ari) std::printf("ari %.6f\n", *ari);
    return kOk;
}

int cmd_curve(const Overrides& ov, const std::string& grid_text, const std::string& out) {
    RunConfig cfg = build_config(ov);
    Dataset ds = load_dataset(cfg);
    if (!ds.fully_labeled()) throw Error(ErrorKind::MissingLabel, "curve needs a label for every point");
    const auto grid = parse_list<double>(grid_text, "--grid");
    const DataMatrix* data = &ds.data;
    std::optional<DataMatrix> normalized;
    if (cfg.normalize.library_size || cfg.normalize.log1p) {
        normalized.emplace(normalize(ds.data, cfg.normalize).matrix);
        data = &*normalized;
    }
    PcaOptions po;
    po.k_prime = cfg.k_prime;
    po.tol = cfg.pca_tol;
    po.max_iter = cfg.pca_max_iter;
    po.seed = cfg.seed;
    const auto model = fit_pca(*data, po);
    const auto scores = all_pair_scores(*data, project(model, *data));
    const auto curve = compression_curve(scores, ds.labels, grid);

    std::ostringstream csv;
    csv << "percent,pairs,intra_fraction\n";
    for (const auto& p : curve) csv << p.percent << ',' << p.pairs << ',' << p.intra_fraction << '\n';
    if (out.empty()) {
        std::cout << csv.str();
    } else {
        std::ofstream f(out);
        if (!f) throw Error(ErrorKind::IoError, "cannot write " + out);
        f << csv.str();
    }
    return kOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Confident clustering of high-dimensional vectors"};
    app.require_subcommand(1);

    Overrides cluster_ov, sweep_ov, curve_ov;
    std::string cluster_out, sweep_out;

    auto* cluster = app.add_subcommand("cluster", "run the full pipeline on one dataset");
    add_input_options(cluster, cluster_ov);
    add_pipeline_options(cluster, cluster_ov);
    cluster->add_option("-o,--out", cluster_out, "output directory");

    std::string kps = "10,20,30", gammas = "3,5", deltas = "2.5";
    bool no_cache = false;
    auto* sweep = app.add_subcommand("sweep", "run the pipeline over a parameter grid");
    add_input_options(sweep, sweep_ov);
    add_pipeline_options(sweep, sweep_ov);
    sweep->add_option("-o,--out", sweep_out, "output directory");
    sweep->add_option("--k-primes", kps, "comma-separated k' values");
    sweep->add_option("--gammas", gammas, "comma-separated gamma values");
    sweep->add_option("--deltas", deltas, "comma-separated delta values");
    sweep->add_flag("--no-cache", no_cache, "recompute pair scores in every cell");

    SynthArgs sa;
    auto* synth = app.add_subcommand("synth", "generate a labeled random-vector dataset");
    synth->add_option("-o,--out", sa.out, "output directory");
    synth->add_option("--seed", sa.seed, "generator seed");
    synth->add_option("--dim", sa.d, "dimension");
    synth->add_option("--sizes", sa.sizes, "comma-separated cluster sizes");
    synth->add_option("--noise", sa.noise, "gaussian or uniform");
    synth->add_option("--sigma", sa.sigma, "noise scale, one value or one per cluster");
    synth->add_option("--ratio", sa.ratio, "target mean intra/inter distance ratio");
    synth->add_option("--center-distance", sa.center_distance, "explicit pairwise center distance");
    synth->add_option("--format", sa.format, "dense or sparse");

    std::string pred_path, truth_path;
    bool as_json = false;
    auto* eval = app.add_subcommand("eval", "compare a clustering with ground truth");
    eval->add_option("pred", pred_path, "predicted labels (point_id,cluster)")->required();
    eval->add_option("truth", truth_path, "ground-truth labels (point_id,label)")->required();
    eval->add_flag("--json", as_json, "print JSON");

    std::string grid = "1,2,3,4,5,6,7,8,9,10", curve_out;
    auto* curve = app.add_subcommand("curve", "fraction of intra-cluster pairs among top-ranked pairs");
    add_input_options(curve, curve_ov);
    add_override(curve, curve_ov, "-k,--k-prime", "pipeline.k_prime", "number of principal components");
    add_override(curve, curve_ov, "--seed", "pipeline.seed", "PCA seed");
    curve->add_option("--grid", grid, "comma-separated percentages");
    curve->add_option("-o,--out", curve_out, "CSV path (stdout when omitted)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kBadInput;
    }

    try {
        if (*cluster) return cmd_cluster(cluster_ov, cluster_out);
        if (*sweep) return cmd_sweep(sweep_ov, sweep_out, kps, gammas, deltas, no_cache);
        if (*synth) return cmd_synth(sa);
        if (*eval) return cmd_eval(pred_path, truth_path, as_json);
        if (*curve) return cmd_curve(curve_ov, grid, curve_out);
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_code(e);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kBadInput;
    }
    return kOk;
}
