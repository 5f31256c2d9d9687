#ifndef CONFCLUST_PIPELINE_HPP
#define CONFCLUST_PIPELINE_HPP

#include "confclust/assign.hpp"
#include "confclust/confident.hpp"
#include "confclust/error.hpp"
#include "confclust/eval.hpp"
#include "confclust/merge.hpp"
#include "confclust/pca.hpp"
#include "confclust/run_config.hpp"

#include <json.hpp>

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace confclust {

/// Points plus optional ground truth aligned to them (labels[v] in 1..k,
/// 0 where a point has no label; empty when no truth was supplied).
struct Dataset {
    DataMatrix data;
    std::vector<int> labels;
    std::vector<std::string> label_names;
    int k = 0;

    bool labeled() const { return !labels.empty(); }
    bool fully_labeled() const;
};

/// Reads the matrix (and labels, if configured) named by the config.
Dataset load_dataset(const RunConfig& cfg);

/// A module failure tagged with the pipeline stage that raised it.
class PipelineError : public Error {
public:
    PipelineError(std::string stage, ErrorKind kind, const std::string& message)
        : Error(kind, "[" + stage + "] " + message), stage_(std::move(stage)) {}
    const std::string& stage() const noexcept { return stage_; }

private:
    std::string stage_;
};

struct CachedScores {
    std::shared_ptr<const PairScores> scores;
    nlohmann::json pca; ///< the PCA section of the report that produced them
};

/// Pair scores keyed by k'. Shared between the cells of a sweep.
class ScoreCache {
public:
    const CachedScores* find(Index k_prime) const;
    void insert(Index k_prime, CachedScores entry);
    std::size_t size() const { return entries_.size(); }

private:
    std::map<Index, CachedScores> entries_;
};

struct StageFailure {
    std::string stage;
    ErrorKind kind = ErrorKind::InvalidInput;
    std::string message;
};

struct PipelineResult {
    nlohmann::json report;  ///< deterministic payload
    nlohmann::json timings; ///< seconds per stage
    Index stop_threshold = 0;
    std::optional<ExtractionResult> extraction;
    std::optional<MergeResult> merge;
    std::optional<Clustering> primary;
    std::optional<Clustering> post_majority;
    std::optional<Clustering> final_clustering;
    std::optional<RecursionDescriptor> recursion;
    std::optional<StageFailure> failure;

    bool ok() const { return !failure.has_value(); }
    /// Report payload with the timings section appended.
    nlohmann::json full_report() const;
};

/**
 * Runs normalize -> pca -> scores -> corrgraph -> confident -> merge ->
 * assign -> finalize on an in-memory dataset. Module errors do not escape;
 * they are recorded in `failure` (and as "failed_at" in the report) with
 * everything computed before the failing stage kept.
 */
PipelineResult run_pipeline(const RunConfig& cfg, const Dataset& ds, ScoreCache* cache = nullptr);

/**
 * Writes report.json, labels_<stage>.csv for each completed stage,
 * z_history.csv and, when present, recursion_points.txt. A failed run also
 * gets a FAILED marker file naming the stage.
 */
void write_outputs(const std::filesystem::path& dir, const PipelineResult& result, const Dataset& ds);

/// Load, run, write. Throws PipelineError (after writing outputs) on failure.
PipelineResult run_pipeline(const RunConfig& cfg);

struct SweepGrid {
    std::vector<Index> k_primes;
    std::vector<double> gammas;
    std::vector<double> deltas;
};

struct SweepCell {
    Index k_prime = 0;
    double gamma_percent = 0.0;
    double delta_percent = 0.0;
    std::optional<StageFailure> failure;
    std::size_t primary_clusters = 0;
    std::size_t unassigned_primary = 0;
    std::size_t unassigned_post_majority = 0;
    std::size_t unassigned_final = 0;
    std::optional<ErrorSummary> primary_error;
    std::optional<ErrorSummary> post_majority_error;
    std::vector<int> primary_labels;
};

struct SweepReport {
    std::vector<SweepCell> cells;
    /// Pairwise ARI between primary clusterings on commonly assigned
    /// points; empty when either cell failed or nothing is shared.
    std::vector<std::vector<std::optional<double>>> ari;

    bool any_failed() const;
    nlohmann::json to_json() const;
};

/// Every (k', gamma, delta) combination; pair scores are computed once per k'
/// when `reuse_scores` is set.
SweepReport run_sweep(const RunConfig& base, const Dataset& ds, const SweepGrid& grid, bool reuse_scores = true);

} // namespace confclust

#endif
