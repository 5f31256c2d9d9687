#include "confclust/run_config.hpp"

#include "confclust/error.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

namespace confclust {

namespace {

std::string strip(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

std::string lowered(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const char* expected) {
    throw Error(ErrorKind::InvalidParameter, key + " = '" + value + "': expected " + expected);
}

double to_double(const std::string& key, const std::string& value) {
    double v = 0.0;
    const char* first = value.data();
    const char* last = value.data() + value.size();
    if (first != last && *first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || value.empty()) bad_value(key, value, "a number");
    return v;
}

template <typename Int>
Int to_int(const std::string& key, const std::string& value) {
    Int v = 0;
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
    if (ec != std::errc() || ptr != value.data() + value.size() || value.empty()) bad_value(key, value, "an integer");
    return v;
}

bool to_bool(const std::string& key, const std::string& value) {
    const auto v = lowered(value);
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    bad_value(key, value, "true or false");
}

// A '#' or ';' preceded by whitespace starts a trailing comment.
std::string without_comment(const std::string& line) {
    for (std::size_t i = 1; i < line.size(); ++i) {
        if ((line[i] == '#' || line[i] == ';') && std::isspace(static_cast<unsigned char>(line[i - 1]))) {
            return line.substr(0, i);
        }
    }
    return line;
}

bool is_none(const std::string& value) {
    const auto v = lowered(value);
    return v.empty() || v == "none" || v == "auto";
}

} // namespace

std::string_view to_string(InputFormat f) {
    switch (f) {
    case InputFormat::Auto: return "auto";
    case InputFormat::Dense: return "dense";
    case InputFormat::Sparse: return "sparse";
    }
    return "unknown";
}

void set_option(RunConfig& cfg, const std::string& key, const std::string& raw) {
    const std::string value = strip(raw);
    if (key == "input.data") {
        cfg.data = value;
    } else if (key == "input.format") {
        const auto v = lowered(value);
        if (v == "auto") cfg.format = InputFormat::Auto;
        else if (v == "dense") cfg.format = InputFormat::Dense;
        else if (v == "sparse" || v == "mtx") cfg.format = InputFormat::Sparse;
        else bad_value(key, value, "auto, dense or sparse");
    } else if (key == "input.orientation") {
        const auto v = lowered(value);
        if (v == "features_as_rows") cfg.orientation = Orientation::FeaturesAsRows;
        else if (v == "points_as_rows") cfg.orientation = Orientation::PointsAsRows;
        else bad_value(key, value, "features_as_rows or points_as_rows");
    } else if (key == "input.ids") {
        cfg.ids = is_none(value) ? std::nullopt : std::optional<std::filesystem::path>(value);
    } else if (key == "input.features") {
        cfg.features = is_none(value) ? std::nullopt : std::optional<std::filesystem::path>(value);
    } else if (key == "input.labels") {
        cfg.labels = is_none(value) ? std::nullopt : std::optional<std::filesystem::path>(value);
    } else if (key == "normalize.library_size") {
        if (is_none(value)) {
            cfg.normalize.library_size.reset();
        } else {
            const double s = to_double(key, value);
            if (!(s > 0.0)) bad_value(key, value, "a positive number");
            cfg.normalize.library_size = s;
        }
    } else if (key == "normalize.log1p") {
        cfg.normalize.log1p = to_bool(key, value);
    } else if (key == "pipeline.k_prime") {
        cfg.k_prime = to_int<Index>(key, value);
    } else if (key == "pipeline.gamma") {
        cfg.gamma_percent = to_double(key, value);
    } else if (key == "pipeline.delta") {
        cfg.delta_percent = to_double(key, value);
    } else if (key == "pipeline.stop_threshold") {
        cfg.stop_threshold = is_none(value) ? std::nullopt : std::optional<Index>(to_int<Index>(key, value));
    } else if (key == "pipeline.seed") {
        cfg.seed = to_int<std::uint64_t>(key, value);
    } else if (key == "pipeline.pca_tol") {
        cfg.pca_tol = to_double(key, value);
    } else if (key == "pipeline.pca_max_iter") {
        cfg.pca_max_iter = to_int<int>(key, value);
    } else if (key == "pipeline.eigen_tol") {
        cfg.eigen_tol = to_double(key, value);
    } else if (key == "pipeline.eigen_max_iter") {
        cfg.eigen_max_iter = to_int<int>(key, value);
    } else if (key == "merge.rule") {
        const auto v = lowered(value);
        if (v == "gap") cfg.stopping.kind = StoppingRule::Kind::Gap;
        else if (v == "target_count") cfg.stopping.kind = StoppingRule::Kind::TargetCount;
        else if (v == "z_floor") cfg.stopping.kind = StoppingRule::Kind::ZFloor;
        else bad_value(key, value, "gap, target_count or z_floor");
    } else if (key == "merge.gap_ratio") {
        cfg.stopping.gap_ratio = to_double(key, value);
    } else if (key == "merge.z_floor") {
        cfg.stopping.z_floor = to_double(key, value);
    } else if (key == "merge.target_count") {
        cfg.stopping.target_count = to_int<Index>(key, value);
    } else if (key == "assign.finalize") {
        cfg.finalize = parse_finalize_policy(lowered(value));
    } else if (key == "output.dir") {
        cfg.output_dir = value;
    } else if (key == "output.score_cache") {
        cfg.score_cache = is_none(value) ? std::nullopt : std::optional<std::filesystem::path>(value);
    } else {
        throw Error(ErrorKind::InvalidParameter, "unknown option '" + key + "'");
    }
}

RunConfig parse_run_config(const std::string& text, const std::filesystem::path& base_dir) {
    RunConfig cfg;
    std::istringstream in(text);
    std::string line;
    std::string section = "pipeline";
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto s = strip(without_comment(line));
        if (s.empty() || s.front() == '#' || s.front() == ';') continue;
        if (s.front() == '[') {
            if (s.back() != ']' || s.size() < 3) {
                throw Error(ErrorKind::ParseError, "config line " + std::to_string(line_no) + ": bad section header");
            }
            section = lowered(strip(std::string_view(s).substr(1, s.size() - 2)));
            continue;
        }
        const auto eq = s.find('=');
        if (eq == std::string::npos) {
            throw Error(ErrorKind::ParseError, "config line " + std::to_string(line_no) + ": expected key = value");
        }
        const auto key = section + "." + lowered(strip(std::string_view(s).substr(0, eq)));
        try {
            set_option(cfg, key, strip(std::string_view(s).substr(eq + 1)));
        } catch (const Error& e) {
            throw Error(e.kind(), "config line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    if (!base_dir.empty()) {
        auto resolve = [&](std::filesystem::path& p) {
            if (!p.empty() && p.is_relative()) p = base_dir / p;
        };
        auto resolve_opt = [&](std::optional<std::filesystem::path>& p) {
            if (p) resolve(*p);
        };
        resolve(cfg.data);
        resolve_opt(cfg.ids);
        resolve_opt(cfg.features);
        resolve_opt(cfg.labels);
        resolve(cfg.output_dir);
        resolve_opt(cfg.score_cache);
    }
    return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_run_config(buf.str(), path.parent_path());
}

nlohmann::json to_json(const RunConfig& cfg) {
    auto opt_path = [](const std::optional<std::filesystem::path>& p) -> nlohmann::json {
        return p ? nlohmann::json(p->generic_string()) : nlohmann::json(nullptr);
    };
    nlohmann::json j;
    j["input"] = {
        {"data", cfg.data.generic_string()},
        {"format", std::string(to_string(cfg.format))},
        {"orientation", cfg.orientation == Orientation::FeaturesAsRows ? "features_as_rows" : "points_as_rows"},
        {"ids", opt_path(cfg.ids)},
        {"features", opt_path(cfg.features)},
        {"labels", opt_path(cfg.labels)},
    };
    j["normalize"] = {
        {"library_size", cfg.normalize.library_size ? nlohmann::json(*cfg.normalize.library_size) : nlohmann::json(nullptr)},
        {"log1p", cfg.normalize.log1p},
    };
    j["pipeline"] = {
        {"k_prime", cfg.k_prime},
        {"gamma", cfg.gamma_percent},
        {"delta", cfg.delta_percent},
        {"stop_threshold", cfg.stop_threshold ? nlohmann::json(*cfg.stop_threshold) : nlohmann::json(nullptr)},
        {"seed", cfg.seed},
        {"pca_tol", cfg.pca_tol},
        {"pca_max_iter", cfg.pca_max_iter},
        {"eigen_tol", cfg.eigen_tol},
        {"eigen_max_iter", cfg.eigen_max_iter},
    };
    j["merge"] = {
        {"rule", std::string(to_string(cfg.stopping.kind))},
        {"gap_ratio", cfg.stopping.gap_ratio},
        {"z_floor", cfg.stopping.z_floor},
        {"target_count", cfg.stopping.target_count},
    };
    j["assign"] = {{"finalize", std::string(to_string(cfg.finalize))}};
    return j;
}

} // namespace confclust
