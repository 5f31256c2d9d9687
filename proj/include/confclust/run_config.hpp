#ifndef CONFCLUST_RUN_CONFIG_HPP
#define CONFCLUST_RUN_CONFIG_HPP

#include "confclust/assign.hpp"
#include "confclust/ingest.hpp"
#include "confclust/merge.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

namespace confclust {

enum class InputFormat { Auto, Dense, Sparse };

struct RunConfig {
    std::filesystem::path data;
    InputFormat format = InputFormat::Auto;
    Orientation orientation = Orientation::FeaturesAsRows;
    std::optional<std::filesystem::path> ids;      ///< sparse input only
    std::optional<std::filesystem::path> features; ///< sparse input only
    std::optional<std::filesystem::path> labels;

    NormalizeConfig normalize;

    Index k_prime = 20;
    double gamma_percent = 5.0;
    double delta_percent = 2.5;
    std::optional<Index> stop_threshold;
    StoppingRule stopping = StoppingRule::gap();
    FinalizePolicy finalize = FinalizePolicy::Leave;
    std::uint64_t seed = 0;

    double pca_tol = 1e-8;
    int pca_max_iter = 2000;
    double eigen_tol = 1e-9;
    int eigen_max_iter = 5000;

    std::filesystem::path output_dir = "confclust_out";
    std::optional<std::filesystem::path> score_cache;
};

/**
 * Sets one option by its qualified name ("section.key"), parsing `value`
 * as the option's type. Unknown keys and malformed values raise
 * InvalidParameter.
 *
 * Keys:
 *   input.data, input.format (auto|dense|sparse),
 *   input.orientation (features_as_rows|points_as_rows), input.ids,
 *   input.features, input.labels
 *   normalize.library_size, normalize.log1p
 *   pipeline.k_prime, pipeline.gamma, pipeline.delta, pipeline.stop_threshold,
 *   pipeline.seed, pipeline.pca_tol, pipeline.pca_max_iter,
 *   pipeline.eigen_tol, pipeline.eigen_max_iter
 *   merge.rule (gap|target_count|z_floor), merge.gap_ratio, merge.z_floor,
 *   merge.target_count
 *   assign.finalize (leave|plurality|recurse_report)
 *   output.dir, output.score_cache
 */
void set_option(RunConfig& cfg, const std::string& key, const std::string& value);

/**
 * Config file grammar, one item per line:
 *
 *   # comment            (also ';'; after whitespace, also trailing)
 *   [section]
 *   key = value
 *
 * Keys before any section header belong to section "pipeline". Relative
 * paths are resolved against the config file's directory.
 */
RunConfig parse_run_config(const std::string& text, const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);

nlohmann::json to_json(const RunConfig& cfg);

std::string_view to_string(InputFormat f);

} // namespace confclust

#endif
