#include "hybridloc/io.hpp"

#include "hybridloc/decimal.hpp"
#include "hybridloc/errors.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace hybridloc {

namespace {

// ---------------------------------------------------------------------------
// Config

std::size_t line_of(const YAML::Node& node) {
    const YAML::Mark mark = node.Mark();
    return mark.is_null() ? 0 : static_cast<std::size_t>(mark.line) + 1;
}

template <typename T>
T scalar_as(const YAML::Node& node, const std::string& path, const char* expected) {
    if (!node.IsScalar()) {
        throw ParseError(path, line_of(node), std::string("expected ") + expected);
    }
    try {
        return node.as<T>();
    } catch (const YAML::Exception&) {
        throw ParseError(path, line_of(node), std::string("expected ") + expected + ", got '" + node.Scalar() + "'");
    }
}

double number(const YAML::Node& node, const std::string& path) {
    const auto value = scalar_as<double>(node, path, "a number");
    if (!std::isfinite(value)) {
        throw ParseError(path, line_of(node), "must be finite");
    }
    return value;
}

double positive(const YAML::Node& node, const std::string& path) {
    const double value = number(node, path);
    if (!(value > 0.0)) {
        throw ParseError(path, line_of(node), "must be > 0");
    }
    return value;
}

double non_negative(const YAML::Node& node, const std::string& path) {
    const double value = number(node, path);
    if (value < 0.0) {
        throw ParseError(path, line_of(node), "must be >= 0");
    }
    return value;
}

Anchor parse_anchor(const YAML::Node& node, const std::string& path) {
    if (!node.IsMap()) {
        throw ParseError(path, line_of(node), "expected a mapping with id, x, y, tech");
    }
    Anchor anchor;
    bool has_id = false, has_x = false, has_y = false, has_tech = false;
    for (const auto& entry : node) {
        const auto key = entry.first.as<std::string>();
        const std::string key_path = path + "." + key;
        const YAML::Node& value = entry.second;
        if (key == "id") {
            anchor.id = scalar_as<std::string>(value, key_path, "a string");
            has_id = true;
        } else if (key == "x") {
            anchor.position.x() = number(value, key_path);
            has_x = true;
        } else if (key == "y") {
            anchor.position.y() = number(value, key_path);
            has_y = true;
        } else if (key == "tech") {
            try {
                anchor.tech = tech_from_string(scalar_as<std::string>(value, key_path, "BLE or UWB"));
            } catch (const InvalidArgument& e) {
                throw ParseError(key_path, line_of(value), e.what());
            }
            has_tech = true;
        } else {
            throw ParseError(key_path, line_of(entry.first), "unknown key");
        }
    }
    const auto require = [&](bool present, const char* key) {
        if (!present) {
            throw ParseError(path + "." + key, line_of(node), "missing required key");
        }
    };
    require(has_id, "id");
    require(has_x, "x");
    require(has_y, "y");
    require(has_tech, "tech");
    return anchor;
}

Vec2 parse_waypoint(const YAML::Node& node, const std::string& path) {
    if (!node.IsSequence() || node.size() != 2) {
        throw ParseError(path, line_of(node), "expected [x, y]");
    }
    return Vec2(number(node[0], path + "[0]"), number(node[1], path + "[1]"));
}

ScenarioConfig parse_config(std::string_view text, bool require_waypoints) {
    YAML::Node root;
    try {
        root = YAML::Load(std::string(text));
    } catch (const YAML::ParserException& e) {
        throw ParseError("", static_cast<std::size_t>(e.mark.line) + 1, e.msg);
    }
    if (!root.IsMap()) {
        throw ParseError("", line_of(root), "config must be a mapping");
    }

    ScenarioConfig cfg;
    bool has_anchors = false;
    bool has_waypoints = false;
    for (const auto& entry : root) {
        const auto key = entry.first.as<std::string>();
        const YAML::Node& value = entry.second;
        if (key == "anchors") {
            if (!value.IsSequence()) {
                throw ParseError(key, line_of(value), "expected a list of anchors");
            }
            for (std::size_t i = 0; i < value.size(); ++i) {
                cfg.anchors.push_back(parse_anchor(value[i], "anchors[" + std::to_string(i) + "]"));
            }
            has_anchors = true;
        } else if (key == "waypoints") {
            if (!value.IsSequence()) {
                throw ParseError(key, line_of(value), "expected a list of [x, y] points");
            }
            for (std::size_t i = 0; i < value.size(); ++i) {
                cfg.waypoints.push_back(parse_waypoint(value[i], "waypoints[" + std::to_string(i) + "]"));
            }
            has_waypoints = true;
        } else if (key == "speed_mps") {
            cfg.speed_mps = positive(value, key);
        } else if (key == "rss_rate_hz") {
            cfg.rss_rate_hz = positive(value, key);
        } else if (key == "tdoa_rate_hz") {
            cfg.tdoa_rate_hz = positive(value, key);
        } else if (key == "shadow_sigma_db") {
            cfg.shadow_sigma_db = non_negative(value, key);
        } else if (key == "toa_sigma_ns") {
            cfg.toa_sigma_s = non_negative(value, key) * 1e-9;
        } else if (key == "rss0_dbm") {
            cfg.path_loss.rss0_dbm = number(value, key);
        } else if (key == "d0_m") {
            cfg.path_loss.d0_m = positive(value, key);
        } else if (key == "gamma") {
            cfg.path_loss.gamma = positive(value, key);
        } else if (key == "sigma_a") {
            cfg.dwna.sigma_a = non_negative(value, key);
        } else if (key == "seed") {
            cfg.seed = scalar_as<std::uint64_t>(value, key, "a non-negative integer");
        } else if (key == "duration_s") {
            cfg.duration_s = positive(value, key);
        } else if (key == "filter_rss_sigma_db") {
            cfg.filter_rss_sigma_db = positive(value, key);
        } else if (key == "filter_tdoa_sigma_m") {
            cfg.filter_tdoa_sigma_m = positive(value, key);
        } else if (key == "correlated_tdoa") {
            cfg.filter.correlated_tdoa = scalar_as<bool>(value, key, "true or false");
        } else if (key == "innovation_jitter") {
            cfg.filter.jitter = non_negative(value, key);
        } else {
            throw ParseError(key, line_of(entry.first), "unknown key");
        }
    }

    if (!has_anchors || cfg.anchors.empty()) {
        throw ParseError("anchors", line_of(root), "missing required key (needs at least one anchor)");
    }
    if (require_waypoints && !has_waypoints) {
        throw ParseError("waypoints", line_of(root), "missing required key");
    }

    try {
        if (require_waypoints) {
            cfg.validate();
        } else {
            const Deployment check(cfg.anchors);
        }
    } catch (const InvalidArgument& e) {
        throw ParseError("", 0, e.what());
    }
    return cfg;
}

// ---------------------------------------------------------------------------
// CSV

struct CsvLine {
    std::size_t number = 0;  // 1-based
    std::vector<std::string_view> fields;
};

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

// Splits into lines, strips '\r', drops empty lines. The header is returned as line 1.
std::vector<CsvLine> csv_lines(std::string_view text) {
    std::vector<CsvLine> out;
    std::size_t number = 0;
    std::size_t start = 0;
    while (start < text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos) {
            end = text.size();
        }
        std::string_view line = text.substr(start, end - start);
        if (!line.empty() && line.back() == '\r') {
            line.remove_suffix(1);
        }
        ++number;
        if (!line.empty()) {
            out.push_back({number, split_fields(line)});
        }
        start = end + 1;
    }
    return out;
}

std::string join(const std::vector<std::string_view>& fields) {
    std::string out;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        out += (i ? "," : "");
        out += fields[i];
    }
    return out;
}

void expect_header(const std::vector<CsvLine>& lines, std::string_view header) {
    if (lines.empty()) {
        throw ParseError("", 1, "missing header '" + std::string(header) + "'");
    }
    if (join(lines.front().fields) != header) {
        throw ParseError("", lines.front().number, "expected header '" + std::string(header) + "'");
    }
}

double csv_number(const CsvLine& line, std::size_t column, const char* name) {
    double value = 0.0;
    if (!parse_decimal(line.fields[column], value) || !std::isfinite(value)) {
        throw ParseError(name, line.number, "expected a finite number, got '" + std::string(line.fields[column]) + "'");
    }
    return value;
}

void expect_columns(const CsvLine& line, std::size_t count) {
    if (line.fields.size() != count) {
        throw ParseError("", line.number,
                         "expected " + std::to_string(count) + " fields, got " + std::to_string(line.fields.size()));
    }
}

void append_row(std::string& out, std::initializer_list<double> values) {
    bool first = true;
    for (double v : values) {
        if (!first) {
            out += ',';
        }
        out += format_decimal(v);
        first = false;
    }
    out += '\n';
}

std::string with_header(std::string_view header) {
    std::string out(header);
    out += '\n';
    return out;
}

}  // namespace

ScenarioConfig load_scenario_config(std::string_view text) {
    return parse_config(text, true);
}

ScenarioConfig load_deployment_config(std::string_view text) {
    return parse_config(text, false);
}

std::string write_scenario_config(const ScenarioConfig& cfg) {
    std::ostringstream os;
    os << "anchors:\n";
    for (const Anchor& a : cfg.anchors) {
        os << "  - {id: " << a.id << ", x: " << format_decimal(a.position.x())
           << ", y: " << format_decimal(a.position.y()) << ", tech: " << to_string(a.tech) << "}\n";
    }
    os << "waypoints:\n";
    for (const Vec2& w : cfg.waypoints) {
        os << "  - [" << format_decimal(w.x()) << ", " << format_decimal(w.y()) << "]\n";
    }
    os << "speed_mps: " << format_decimal(cfg.speed_mps) << '\n'
       << "rss_rate_hz: " << format_decimal(cfg.rss_rate_hz) << '\n'
       << "tdoa_rate_hz: " << format_decimal(cfg.tdoa_rate_hz) << '\n'
       << "shadow_sigma_db: " << format_decimal(cfg.shadow_sigma_db) << '\n'
       << "toa_sigma_ns: " << format_decimal(cfg.toa_sigma_s * 1e9) << '\n'
       << "rss0_dbm: " << format_decimal(cfg.path_loss.rss0_dbm) << '\n'
       << "d0_m: " << format_decimal(cfg.path_loss.d0_m) << '\n'
       << "gamma: " << format_decimal(cfg.path_loss.gamma) << '\n'
       << "sigma_a: " << format_decimal(cfg.dwna.sigma_a) << '\n'
       << "seed: " << cfg.seed << '\n';
    if (cfg.duration_s) {
        os << "duration_s: " << format_decimal(*cfg.duration_s) << '\n';
    }
    if (cfg.filter_rss_sigma_db) {
        os << "filter_rss_sigma_db: " << format_decimal(*cfg.filter_rss_sigma_db) << '\n';
    }
    if (cfg.filter_tdoa_sigma_m) {
        os << "filter_tdoa_sigma_m: " << format_decimal(*cfg.filter_tdoa_sigma_m) << '\n';
    }
    if (cfg.filter.correlated_tdoa) {
        os << "correlated_tdoa: true\n";
    }
    if (cfg.filter.jitter > 0.0) {
        os << "innovation_jitter: " << format_decimal(cfg.filter.jitter) << '\n';
    }
    return os.str();
}

Feed read_measurement_log(std::string_view text) {
    const std::vector<CsvLine> lines = csv_lines(text);
    expect_header(lines, kMeasurementLogHeader);

    Feed feed;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const CsvLine& line = lines[i];
        expect_columns(line, 6);
        const double t = csv_number(line, 0, "t");
        const std::string_view kind = line.fields[1];
        const std::string anchor_id(line.fields[2]);
        const std::string ref_id(line.fields[3]);
        const double value = csv_number(line, 4, "value");
        const double sigma = csv_number(line, 5, "sigma");

        if (anchor_id.empty()) {
            throw ParseError("anchor_id", line.number, "must not be empty");
        }
        if (!(sigma > 0.0)) {
            throw ParseError("sigma", line.number, "must be > 0");
        }
        if (!feed.empty() && t < feed.back().timestamp) {
            throw OrderingError("line " + std::to_string(line.number) + ": t=" + std::string(line.fields[0]) +
                                    " is earlier than the previous record",
                                line.number);
        }
        if (feed.empty() || t != feed.back().timestamp) {
            feed.push_back(MeasurementBatch{t, {}, {}});
        }

        if (kind == "RSS") {
            if (!ref_id.empty()) {
                throw ParseError("ref_anchor_id", line.number, "must be empty for RSS rows");
            }
            feed.back().rss.push_back(RssReading{anchor_id, value, sigma});
        } else if (kind == "TDOA") {
            if (ref_id.empty()) {
                throw ParseError("ref_anchor_id", line.number, "required for TDOA rows");
            }
            if (ref_id == anchor_id) {
                throw ParseError("ref_anchor_id", line.number, "must differ from anchor_id");
            }
            feed.back().tdoa.push_back(TdoaReading{anchor_id, ref_id, value, sigma});
        } else {
            throw ParseError("kind", line.number, "expected RSS or TDOA, got '" + std::string(kind) + "'");
        }
    }
    return feed;
}

std::string write_measurement_log(std::span<const MeasurementBatch> feed) {
    std::string out = with_header(kMeasurementLogHeader);
    for (const MeasurementBatch& batch : feed) {
        const std::string t = format_decimal(batch.timestamp);
        for (const RssReading& r : batch.rss) {
            out += t + ",RSS," + r.anchor_id + ",," + format_decimal(r.value) + "," + format_decimal(r.sigma) + "\n";
        }
        for (const TdoaReading& r : batch.tdoa) {
            out += t + ",TDOA," + r.anchor_id + "," + r.ref_anchor_id + "," + format_decimal(r.value) + "," +
                   format_decimal(r.sigma) + "\n";
        }
    }
    return out;
}

std::string write_track(std::span<const Belief> track) {
    std::string out = with_header(kTrackHeader);
    for (const Belief& b : track) {
        append_row(out, {b.timestamp, b.state(0), b.state(1), b.state(2), b.state(3), b.cov(0, 0), b.cov(1, 1)});
    }
    return out;
}

Track read_track(std::string_view text) {
    const std::vector<CsvLine> lines = csv_lines(text);
    expect_header(lines, kTrackHeader);
    static constexpr const char* kNames[] = {"t", "x", "y", "vx", "vy", "var_x", "var_y"};

    Track track;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        expect_columns(lines[i], 7);
        double v[7];
        for (std::size_t c = 0; c < 7; ++c) {
            v[c] = csv_number(lines[i], c, kNames[c]);
        }
        Belief b;
        b.timestamp = v[0];
        b.state << v[1], v[2], v[3], v[4];
        b.cov = Vec4(v[5], v[6], 0.0, 0.0).asDiagonal();
        track.push_back(b);
    }
    return track;
}

std::string write_errors(std::span<const ErrorSample> series) {
    std::string out = with_header(kErrorsHeader);
    for (const ErrorSample& s : series) {
        append_row(out, {s.t, s.error});
    }
    return out;
}

std::string write_cdf(const CdfCurve& curve) {
    std::string out = with_header(kCdfHeader);
    for (const CdfPoint& p : curve.points) {
        append_row(out, {p.error, p.fraction});
    }
    return out;
}

std::string write_summary(const ErrorSummary& summary) {
    std::string out = with_header(kSummaryHeader);
    out += "median_m," + format_decimal(summary.median) + "\n";
    out += "mean_m," + format_decimal(summary.mean) + "\n";
    out += "p90_m," + format_decimal(summary.p90) + "\n";
    out += "max_m," + format_decimal(summary.max) + "\n";
    out += "count," + std::to_string(summary.count) + "\n";
    return out;
}

std::string write_truth(const GroundTruth& truth) {
    std::vector<TruthSample> rows = truth.samples;
    double arrival = 0.0;
    for (std::size_t i = 0; i < truth.polyline.size(); ++i) {
        if (i > 0) {
            arrival += (truth.polyline[i] - truth.polyline[i - 1]).norm() / truth.speed;
        }
        const bool sampled = std::any_of(rows.begin(), rows.end(), [&](const TruthSample& s) {
            return (s.position - truth.polyline[i]).norm() < kGeometryEpsilon && std::abs(s.t - arrival) < 1e-9;
        });
        if (!sampled) {
            TruthSample vertex = truth.at(arrival);
            vertex.position = truth.polyline[i];
            rows.push_back(vertex);
        }
    }
    std::stable_sort(rows.begin(), rows.end(), [](const TruthSample& a, const TruthSample& b) { return a.t < b.t; });

    std::string out = with_header(kTruthHeader);
    for (const TruthSample& s : rows) {
        append_row(out, {s.t, s.position.x(), s.position.y(), s.velocity.x(), s.velocity.y()});
    }
    return out;
}

std::vector<Vec2> read_polyline(std::string_view text) {
    const std::vector<CsvLine> lines = csv_lines(text);
    if (lines.empty()) {
        throw ParseError("", 1, "missing header");
    }
    const auto& header = lines.front().fields;
    const auto column = [&](std::string_view name) {
        const auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) {
            throw ParseError("", lines.front().number, "header needs an '" + std::string(name) + "' column");
        }
        return static_cast<std::size_t>(it - header.begin());
    };
    const std::size_t cx = column("x");
    const std::size_t cy = column("y");

    std::vector<Vec2> polyline;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        expect_columns(lines[i], header.size());
        const Vec2 p(csv_number(lines[i], cx, "x"), csv_number(lines[i], cy, "y"));
        if (polyline.empty() || (p - polyline.back()).norm() > 0.0) {
            polyline.push_back(p);
        }
    }
    if (polyline.size() < 2) {
        throw ParseError("", 0, "a polyline needs at least two distinct points");
    }
    return polyline;
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError(path.string(), "cannot open for reading");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError(path.string(), "cannot open for writing");
    }
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) {
        throw IoError(path.string(), "write failed");
    }
}

}  // namespace hybridloc
