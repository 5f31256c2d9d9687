#include "confclust/ingest.hpp"

#include "confclust/error.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_set>

namespace confclust {

namespace {

std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    std::string out(s.substr(b, e - b));
    if (out.size() >= 2 && out.front() == '"' && out.back() == '"') {
        out = out.substr(1, out.size() - 2);
    }
    return out;
}

std::vector<std::string> split(const std::string& line, char delim) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        auto pos = line.find(delim, start);
        out.push_back(trim(std::string_view(line).substr(start, pos - start)));
        if (pos == std::string::npos) break;
        start = pos + 1;
    }
    return out;
}

std::optional<double> parse_number(const std::string& s) {
    if (s.empty()) return std::nullopt;
    double v = 0.0;
    const char* first = s.data();
    if (*first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

std::string format_number(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(line);
    }
    while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
    return lines;
}

char detect_delimiter(const std::string& first_line) {
    return first_line.find('\t') != std::string::npos ? '\t' : ',';
}

std::vector<std::string> read_id_file(const std::filesystem::path& path) {
    std::vector<std::string> ids;
    for (const auto& line : read_lines(path)) {
        // 10x feature files carry extra tab-separated columns; the id is the first.
        auto tab = line.find('\t');
        ids.push_back(trim(tab == std::string::npos ? line : line.substr(0, tab)));
    }
    return ids;
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

} // namespace

std::vector<std::string> synthesize_ids(Index count, char prefix) {
    std::vector<std::string> ids;
    ids.reserve(static_cast<std::size_t>(count));
    for (Index i = 1; i <= count; ++i) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%c%06lld", prefix, static_cast<long long>(i));
        ids.emplace_back(buf);
    }
    return ids;
}

DataMatrix::DataMatrix(Dense values, std::vector<std::string> point_ids,
                       std::vector<std::string> feature_ids)
    : values_(std::move(values)), point_ids_(std::move(point_ids)),
      feature_ids_(std::move(feature_ids)) {
    n_features_ = dense().rows();
    n_points_ = dense().cols();
    if (!dense().allFinite()) throw Error(ErrorKind::InvalidInput, "matrix has non-finite entries");
    validate_and_fill_ids();
}

DataMatrix::DataMatrix(Sparse values, std::vector<std::string> point_ids,
                       std::vector<std::string> feature_ids)
    : values_(std::move(values)), point_ids_(std::move(point_ids)),
      feature_ids_(std::move(feature_ids)) {
    auto& sp = std::get<Sparse>(values_);
    sp.makeCompressed();
    n_features_ = sp.rows();
    n_points_ = sp.cols();
    for (Index k = 0; k < sp.nonZeros(); ++k) {
        if (!std::isfinite(sp.valuePtr()[k])) {
            throw Error(ErrorKind::InvalidInput, "matrix has non-finite entries");
        }
    }
    validate_and_fill_ids();
}

void DataMatrix::validate_and_fill_ids() {
    if (point_ids_.empty()) point_ids_ = synthesize_ids(n_points_, 'p');
    if (static_cast<Index>(point_ids_.size()) != n_points_) {
        throw Error(ErrorKind::DimensionMismatch, "expected " + std::to_string(n_points_) +
                                                      " point ids, got " +
                                                      std::to_string(point_ids_.size()));
    }
    if (!feature_ids_.empty() && static_cast<Index>(feature_ids_.size()) != n_features_) {
        throw Error(ErrorKind::DimensionMismatch, "expected " + std::to_string(n_features_) +
                                                      " feature ids, got " +
                                                      std::to_string(feature_ids_.size()));
    }
    std::unordered_set<std::string> seen;
    for (const auto& id : point_ids_) {
        if (!seen.insert(id).second) throw Error(ErrorKind::DuplicateId, id);
    }
}

double DataMatrix::at(Index feature, Index point) const {
    if (is_sparse()) return sparse().coeff(feature, point);
    return dense()(feature, point);
}

Eigen::VectorXd DataMatrix::column(Index point) const {
    if (is_sparse()) return Eigen::VectorXd(sparse().col(point));
    return dense().col(point);
}

DataMatrix::Dense DataMatrix::to_dense() const {
    if (is_sparse()) return Dense(sparse());
    return dense();
}

double DataMatrix::squared_distance(Index i, Index j) const {
    if (!is_sparse()) return (dense().col(i) - dense().col(j)).squaredNorm();
    const auto& sp = sparse();
    const int* outer = sp.outerIndexPtr();
    const int* inner = sp.innerIndexPtr();
    const double* val = sp.valuePtr();
    int a = outer[i], a_end = outer[i + 1];
    int b = outer[j], b_end = outer[j + 1];
    double acc = 0.0;
    while (a < a_end || b < b_end) {
        double diff;
        if (b >= b_end || (a < a_end && inner[a] < inner[b])) {
            diff = val[a++];
        } else if (a >= a_end || inner[b] < inner[a]) {
            diff = -val[b++];
        } else {
            diff = val[a++] - val[b++];
        }
        acc += diff * diff;
    }
    return acc;
}

Eigen::VectorXd DataMatrix::column_mean() const {
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(n_features_);
    if (n_points_ == 0) return mean;
    if (is_sparse()) {
        const auto& sp = sparse();
        for (Index c = 0; c < sp.outerSize(); ++c) {
            for (Sparse::InnerIterator it(sp, c); it; ++it) mean[it.row()] += it.value();
        }
    } else {
        mean = dense().rowwise().sum();
    }
    return mean / static_cast<double>(n_points_);
}

std::vector<int> GroundTruth::for_points(const std::vector<std::string>& point_ids) const {
    std::vector<int> out(point_ids.size(), 0);
    for (std::size_t i = 0; i < point_ids.size(); ++i) {
        auto it = labels.find(point_ids[i]);
        if (it != labels.end()) out[i] = it->second;
    }
    return out;
}

GroundTruth GroundTruth::from_indices(const std::vector<std::string>& point_ids,
                                      const std::vector<int>& idx) {
    if (point_ids.size() != idx.size()) {
        throw Error(ErrorKind::DimensionMismatch, "labels and ids differ in length");
    }
    GroundTruth gt;
    for (std::size_t i = 0; i < idx.size(); ++i) {
        if (idx[i] < 1) throw Error(ErrorKind::InvalidInput, "label indices start at 1");
        if (!gt.labels.emplace(point_ids[i], idx[i]).second) {
            throw Error(ErrorKind::DuplicateId, point_ids[i]);
        }
        gt.k = std::max(gt.k, idx[i]);
    }
    for (int c = 1; c <= gt.k; ++c) gt.names.push_back(std::to_string(c));
    return gt;
}

DataMatrix load_dense_matrix(const std::filesystem::path& path, Orientation orientation) {
    auto lines = read_lines(path);
    if (lines.empty()) throw Error(ErrorKind::EmptyInput, path.string());
    const char delim = detect_delimiter(lines.front());

    std::vector<std::vector<std::string>> rows;
    rows.reserve(lines.size());
    for (const auto& l : lines) rows.push_back(split(l, delim));

    // A header row carries at least one non-numeric token past the corner cell.
    bool has_header = false;
    for (std::size_t c = 1; c < rows[0].size(); ++c) {
        if (!parse_number(rows[0][c])) has_header = true;
    }
    if (rows[0].size() == 1 && !parse_number(rows[0][0])) has_header = true;
    const std::size_t body_start = has_header ? 1 : 0;
    if (body_start >= rows.size()) throw Error(ErrorKind::EmptyInput, "no data rows in " + path.string());

    const bool has_row_ids = !parse_number(rows[body_start][0]);
    const std::size_t width = rows[body_start].size();
    const std::size_t n_values = width - (has_row_ids ? 1 : 0);
    if (n_values == 0) throw Error(ErrorKind::EmptyInput, "no numeric columns in " + path.string());

    const std::size_t n_rows = rows.size() - body_start;
    DataMatrix::Dense table(static_cast<Index>(n_rows), static_cast<Index>(n_values));
    std::vector<std::string> row_ids, col_ids;
    for (std::size_t r = body_start; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.size() != width) {
            throw Error(ErrorKind::ParseError, "ragged row at line " + std::to_string(r + 1) +
                                                   ": expected " + std::to_string(width) +
                                                   " fields, got " + std::to_string(row.size()));
        }
        if (has_row_ids) row_ids.push_back(row[0]);
        for (std::size_t c = 0; c < n_values; ++c) {
            const auto& tok = row[c + (has_row_ids ? 1 : 0)];
            auto v = parse_number(tok);
            if (!v || !std::isfinite(*v)) {
                throw Error(ErrorKind::ParseError,
                            "non-numeric cell '" + tok + "' at row " + std::to_string(r + 1) +
                                ", col " + std::to_string(c + (has_row_ids ? 2 : 1)));
            }
            table(static_cast<Index>(r - body_start), static_cast<Index>(c)) = *v;
        }
    }
    if (has_header) {
        const auto& h = rows[0];
        if (h.size() == n_values) {
            col_ids = h;
        } else if (h.size() == width) {
            col_ids.assign(h.begin() + 1, h.end());
        } else {
            throw Error(ErrorKind::ParseError, "header at line 1 has " + std::to_string(h.size()) +
                                                   " fields, expected " + std::to_string(width));
        }
    }

    if (orientation == Orientation::FeaturesAsRows) {
        return DataMatrix(std::move(table), std::move(col_ids), std::move(row_ids));
    }
    return DataMatrix(DataMatrix::Dense(table.transpose()), std::move(row_ids), std::move(col_ids));
}

DataMatrix load_sparse_matrix(const std::filesystem::path& matrix_path,
                              const std::optional<std::filesystem::path>& ids_path,
                              const std::optional<std::filesystem::path>& features_path) {
    std::ifstream in(matrix_path);
    if (!in) throw Error(ErrorKind::IoError, "cannot open " + matrix_path.string());
    std::string line;
    if (!std::getline(in, line)) throw Error(ErrorKind::EmptyInput, matrix_path.string());
    auto banner = lower(line);
    if (banner.rfind("%%matrixmarket", 0) != 0 || banner.find("coordinate") == std::string::npos) {
        throw Error(ErrorKind::FormatError, "expected '%%MatrixMarket matrix coordinate' header");
    }
    const bool pattern = banner.find("pattern") != std::string::npos;
    if (banner.find("complex") != std::string::npos) {
        throw Error(ErrorKind::FormatError, "complex fields are not supported");
    }

    long long rows = -1, cols = -1, nnz = -1;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '%') continue;
        std::istringstream ss(line);
        if (!(ss >> rows >> cols >> nnz) || rows < 0 || cols < 0 || nnz < 0) {
            throw Error(ErrorKind::FormatError, "bad size line '" + line + "'");
        }
        break;
    }
    if (rows < 0) throw Error(ErrorKind::FormatError, "missing size line");

    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(static_cast<std::size_t>(nnz));
    long long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '%') continue;
        std::istringstream ss(line);
        long long r = 0, c = 0;
        std::string value_tok;
        if (!(ss >> r >> c)) throw Error(ErrorKind::FormatError, "bad entry '" + line + "'");
        double v = 1.0;
        if (!pattern) {
            if (!(ss >> value_tok)) throw Error(ErrorKind::FormatError, "missing value in '" + line + "'");
            auto parsed = parse_number(value_tok);
            if (!parsed || !std::isfinite(*parsed)) {
                throw Error(ErrorKind::FormatError, "bad value in '" + line + "'");
            }
            v = *parsed;
        }
        if (r < 1 || r > rows || c < 1 || c > cols) {
            throw Error(ErrorKind::FormatError, "index (" + std::to_string(r) + "," +
                                                    std::to_string(c) + ") outside " +
                                                    std::to_string(rows) + "x" + std::to_string(cols));
        }
        triplets.emplace_back(static_cast<int>(r - 1), static_cast<int>(c - 1), v);
    }
    if (static_cast<long long>(triplets.size()) != nnz) {
        throw Error(ErrorKind::FormatError, "declared " + std::to_string(nnz) + " entries, found " +
                                                std::to_string(triplets.size()));
    }

    DataMatrix::Sparse sp(static_cast<Index>(rows), static_cast<Index>(cols));
    sp.setFromTriplets(triplets.begin(), triplets.end());

    std::vector<std::string> ids, features;
    if (ids_path) {
        ids = read_id_file(*ids_path);
        if (static_cast<long long>(ids.size()) != cols) {
            throw Error(ErrorKind::DimensionMismatch, "id file has " + std::to_string(ids.size()) +
                                                          " lines for " + std::to_string(cols) +
                                                          " columns");
        }
    }
    if (features_path) {
        features = read_id_file(*features_path);
        if (static_cast<long long>(features.size()) != rows) {
            throw Error(ErrorKind::DimensionMismatch, "feature file has " +
                                                          std::to_string(features.size()) +
                                                          " lines for " + std::to_string(rows) + " rows");
        }
    }
    return DataMatrix(std::move(sp), std::move(ids), std::move(features));
}

GroundTruth load_labels(const std::filesystem::path& path) {
    auto lines = read_lines(path);
    if (lines.empty()) throw Error(ErrorKind::EmptyInput, path.string());
    const char delim = detect_delimiter(lines.front());

    GroundTruth gt;
    std::unordered_map<std::string, int> name_index;
    for (std::size_t r = 0; r < lines.size(); ++r) {
        if (trim(lines[r]).empty()) continue;
        auto fields = split(lines[r], delim);
        if (fields.size() < 2) {
            throw Error(ErrorKind::ParseError, "line " + std::to_string(r + 1) + " needs two fields");
        }
        if (r == 0 && lower(fields[1]).find("label") != std::string::npos) continue;
        auto [it, inserted] = name_index.emplace(fields[1], static_cast<int>(gt.names.size()) + 1);
        if (inserted) gt.names.push_back(fields[1]);
        if (!gt.labels.emplace(fields[0], it->second).second) {
            throw Error(ErrorKind::DuplicateId, fields[0]);
        }
    }
    if (gt.labels.empty()) throw Error(ErrorKind::EmptyInput, path.string());
    gt.k = static_cast<int>(gt.names.size());
    return gt;
}

void write_dense_matrix(const std::filesystem::path& path, const DataMatrix& m,
                        Orientation orientation, char delimiter) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
    const bool features_rows = orientation == Orientation::FeaturesAsRows;
    auto col_ids = features_rows ? m.point_ids() : m.feature_ids();
    auto row_ids = features_rows ? m.feature_ids() : m.point_ids();
    const Index n_rows = features_rows ? m.n_features() : m.n_points();
    const Index n_cols = features_rows ? m.n_points() : m.n_features();
    if (row_ids.empty()) row_ids = synthesize_ids(n_rows, 'f');
    if (col_ids.empty()) col_ids = synthesize_ids(n_cols, 'f');

    out << "id";
    for (Index c = 0; c < n_cols; ++c) {
        out << delimiter << col_ids[static_cast<std::size_t>(c)];
    }
    out << '\n';
    const auto dense = m.to_dense();
    for (Index r = 0; r < n_rows; ++r) {
        out << row_ids[static_cast<std::size_t>(r)];
        for (Index c = 0; c < n_cols; ++c) {
            out << delimiter << format_number(features_rows ? dense(r, c) : dense(c, r));
        }
        out << '\n';
    }
}

void write_sparse_matrix(const std::filesystem::path& matrix_path, const DataMatrix& m,
                         const std::filesystem::path& ids_path,
                         const std::filesystem::path& features_path) {
    DataMatrix::Sparse sp = m.is_sparse() ? m.sparse() : m.dense().sparseView();
    sp.makeCompressed();
    std::ofstream out(matrix_path);
    if (!out) throw Error(ErrorKind::IoError, "cannot write " + matrix_path.string());
    out << "%%MatrixMarket matrix coordinate real general\n";
    out << sp.rows() << ' ' << sp.cols() << ' ' << sp.nonZeros() << '\n';
    for (Index c = 0; c < sp.outerSize(); ++c) {
        for (DataMatrix::Sparse::InnerIterator it(sp, c); it; ++it) {
            out << it.row() + 1 << ' ' << c + 1 << ' ' << format_number(it.value()) << '\n';
        }
    }
    if (!ids_path.empty()) {
        std::ofstream ids(ids_path);
        for (const auto& id : m.point_ids()) ids << id << '\n';
    }
    if (!features_path.empty() && !m.feature_ids().empty()) {
        std::ofstream feats(features_path);
        for (const auto& id : m.feature_ids()) feats << id << '\n';
    }
}

void write_labels(const std::filesystem::path& path, const std::vector<std::string>& point_ids,
                  const std::vector<int>& labels, const std::vector<std::string>& names) {
    if (point_ids.size() != labels.size()) {
        throw Error(ErrorKind::DimensionMismatch, "labels and ids differ in length");
    }
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        out << point_ids[i] << ',';
        if (labels[i] <= 0) {
            out << "UNASSIGNED";
        } else if (!names.empty()) {
            out << names[static_cast<std::size_t>(labels[i] - 1)];
        } else {
            out << labels[i];
        }
        out << '\n';
    }
}

NormalizeResult normalize(const DataMatrix& m, const NormalizeConfig& cfg) {
    std::vector<Index> zero_columns;
    std::vector<std::string> warnings;

    auto process = [&](auto& values) {
        using M = std::decay_t<decltype(values)>;
        if (cfg.library_size) {
            const double target = *cfg.library_size;
            if (!(target > 0.0)) throw Error(ErrorKind::InvalidParameter, "library size must be positive");
            for (Index c = 0; c < m.n_points(); ++c) {
                double sum = 0.0;
                if constexpr (std::is_same_v<M, DataMatrix::Sparse>) {
                    for (typename M::InnerIterator it(values, c); it; ++it) {
                        if (it.value() < 0.0) throw Error(ErrorKind::InvalidInput, "negative entry in column " + std::to_string(c));
                        sum += it.value();
                    }
                    if (sum == 0.0) { zero_columns.push_back(c); continue; }
                    for (typename M::InnerIterator it(values, c); it; ++it) it.valueRef() *= target / sum;
                } else {
                    if ((values.col(c).array() < 0.0).any()) {
                        throw Error(ErrorKind::InvalidInput, "negative entry in column " + std::to_string(c));
                    }
                    sum = values.col(c).sum();
                    if (sum == 0.0) { zero_columns.push_back(c); continue; }
                    values.col(c) *= target / sum;
                }
            }
        }
        if (cfg.log1p) {
            if constexpr (std::is_same_v<M, DataMatrix::Sparse>) {
                for (Index k = 0; k < values.nonZeros(); ++k) values.valuePtr()[k] = std::log1p(values.valuePtr()[k]);
            } else {
                values = values.array().log1p().matrix();
            }
        }
    };

    if (m.is_sparse()) {
        DataMatrix::Sparse values = m.sparse();
        process(values);
        for (auto c : zero_columns) warnings.push_back("column " + m.point_ids()[static_cast<std::size_t>(c)] + " sums to zero; left unscaled");
        return {DataMatrix(std::move(values), m.point_ids(), m.feature_ids()), std::move(zero_columns), std::move(warnings)};
    }
    DataMatrix::Dense values = m.dense();
    process(values);
    for (auto c : zero_columns) warnings.push_back("column " + m.point_ids()[static_cast<std::size_t>(c)] + " sums to zero; left unscaled");
    return {DataMatrix(std::move(values), m.point_ids(), m.feature_ids()), std::move(zero_columns), std::move(warnings)};
}

} // namespace confclust
