#ifndef CONFCLUST_INGEST_HPP
#define CONFCLUST_INGEST_HPP

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <filesystem>
#include <optional>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

namespace confclust {

using Index = Eigen::Index;

/**
 * d x n dataset with points stored as columns.
 *
 * Storage is either dense or sparse (column-major in both cases); all
 * numeric routines in the pipeline accept either form. Entries are
 * validated finite and point identifiers unique at construction.
 */
class DataMatrix {
public:
    using Dense = Eigen::MatrixXd;
    using Sparse = Eigen::SparseMatrix<double, Eigen::ColMajor>;

    DataMatrix(Dense values, std::vector<std::string> point_ids = {},
               std::vector<std::string> feature_ids = {});
    DataMatrix(Sparse values, std::vector<std::string> point_ids = {},
               std::vector<std::string> feature_ids = {});

    Index n_features() const noexcept { return n_features_; }
    Index n_points() const noexcept { return n_points_; }

    bool is_sparse() const noexcept { return std::holds_alternative<Sparse>(values_); }
    const Dense& dense() const { return std::get<Dense>(values_); }
    const Sparse& sparse() const { return std::get<Sparse>(values_); }

    const std::vector<std::string>& point_ids() const noexcept { return point_ids_; }
    const std::vector<std::string>& feature_ids() const noexcept { return feature_ids_; }

    double at(Index feature, Index point) const;
    Eigen::VectorXd column(Index point) const;
    Dense to_dense() const;

    /// Squared Euclidean distance between two columns, computed from
    /// coordinate differences (no Gram-matrix cancellation).
    double squared_distance(Index i, Index j) const;

    /// Per-feature mean over columns.
    Eigen::VectorXd column_mean() const;

private:
    void validate_and_fill_ids();

    std::variant<Dense, Sparse> values_;
    Index n_features_ = 0;
    Index n_points_ = 0;
    std::vector<std::string> point_ids_;
    std::vector<std::string> feature_ids_;
};

/// Hidden ground-truth partition. Label indices are 1-based; 0 marks a
/// point without a label when mapped onto a DataMatrix.
struct GroundTruth {
    std::unordered_map<std::string, int> labels;
    std::vector<std::string> names; ///< names[i-1] is the string of label i
    int k = 0;

    std::vector<int> for_points(const std::vector<std::string>& point_ids) const;
    static GroundTruth from_indices(const std::vector<std::string>& point_ids,
                                    const std::vector<int>& labels);
};

enum class Orientation { FeaturesAsRows, PointsAsRows };

DataMatrix load_dense_matrix(const std::filesystem::path& path, Orientation orientation);
DataMatrix load_sparse_matrix(const std::filesystem::path& matrix_path,
                              const std::optional<std::filesystem::path>& ids_path = std::nullopt,
                              const std::optional<std::filesystem::path>& features_path = std::nullopt);
GroundTruth load_labels(const std::filesystem::path& path);

void write_dense_matrix(const std::filesystem::path& path, const DataMatrix& m,
                        Orientation orientation, char delimiter = ',');
/// Writes Matrix Market coordinate data plus one-id-per-line side files
/// (skipped when the corresponding path is empty).
void write_sparse_matrix(const std::filesystem::path& matrix_path, const DataMatrix& m,
                         const std::filesystem::path& ids_path = {},
                         const std::filesystem::path& features_path = {});
void write_labels(const std::filesystem::path& path, const std::vector<std::string>& point_ids,
                  const std::vector<int>& labels, const std::vector<std::string>& names = {});

struct NormalizeConfig {
    std::optional<double> library_size;
    bool log1p = false;
};

struct NormalizeResult {
    DataMatrix matrix;
    std::vector<Index> zero_columns; ///< columns left unscaled because they sum to 0
    std::vector<std::string> warnings;
};

NormalizeResult normalize(const DataMatrix& m, const NormalizeConfig& cfg);

/// Zero-padded ordinal identifiers: "p000001", "p000002", ...
std::vector<std::string> synthesize_ids(Index count, char prefix = 'p');

} // namespace confclust

#endif
