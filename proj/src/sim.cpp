#include "hybridloc/sim.hpp"

#include "hybridloc/decimal.hpp"
#include "hybridloc/errors.hpp"

#include <boost/random/normal_distribution.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace hybridloc {

namespace {

constexpr double kDefaultRssSigmaDb = 3.0;
constexpr double kDefaultToaSigmaS = 0.2e-9;
// Two instants closer than this are the same epoch.
constexpr double kTimeTolerance = 1e-9;

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

void require_positive(double value, const char* what) {
    if (!(value > 0.0) || !std::isfinite(value)) {
        throw InvalidArgument(std::string(what) + " must be positive and finite");
    }
}

void require_non_negative(double value, const char* what) {
    if (!(value >= 0.0) || !std::isfinite(value)) {
        throw InvalidArgument(std::string(what) + " must be >= 0 and finite");
    }
}

std::vector<Anchor> sorted_by_id(std::vector<Anchor> anchors) {
    std::sort(anchors.begin(), anchors.end(), [](const Anchor& a, const Anchor& b) { return a.id < b.id; });
    return anchors;
}

}  // namespace

double ScenarioConfig::path_length() const {
    double length = 0.0;
    for (std::size_t i = 1; i < waypoints.size(); ++i) {
        length += (waypoints[i] - waypoints[i - 1]).norm();
    }
    return length;
}

double ScenarioConfig::duration() const {
    return duration_s.value_or(path_length() / speed_mps);
}

double ScenarioConfig::rss_reading_sigma() const {
    if (filter_rss_sigma_db) {
        return *filter_rss_sigma_db;
    }
    return shadow_sigma_db > 0.0 ? shadow_sigma_db : kDefaultRssSigmaDb;
}

double ScenarioConfig::tdoa_reading_sigma() const {
    if (filter_tdoa_sigma_m) {
        return *filter_tdoa_sigma_m;
    }
    const double toa = toa_sigma_s > 0.0 ? toa_sigma_s : kDefaultToaSigmaS;
    return std::numbers::sqrt2 * kSpeedOfLight * toa;
}

std::vector<std::string> ScenarioConfig::validate() const {
    const Deployment deployment(anchors);  // ids unique, positions finite
    path_loss.validate();
    dwna.validate();
    require_positive(speed_mps, "speed");
    require_positive(rss_rate_hz, "RSS rate");
    require_positive(tdoa_rate_hz, "TDOA rate");
    require_non_negative(shadow_sigma_db, "shadowing sigma");
    require_non_negative(toa_sigma_s, "TOA sigma");
    if (duration_s) {
        require_positive(*duration_s, "duration");
    }
    if (filter_rss_sigma_db) {
        require_positive(*filter_rss_sigma_db, "filter RSS sigma");
    }
    if (filter_tdoa_sigma_m) {
        require_positive(*filter_tdoa_sigma_m, "filter TDOA sigma");
    }
    if (!(filter.jitter >= 0.0)) {
        throw InvalidArgument("jitter must be >= 0");
    }
    if (waypoints.size() < 2) {
        throw InvalidArgument("at least two waypoints are required");
    }
    for (std::size_t i = 1; i < waypoints.size(); ++i) {
        if ((waypoints[i] - waypoints[i - 1]).norm() < kGeometryEpsilon) {
            throw InvalidArgument("waypoints " + std::to_string(i - 1) + " and " + std::to_string(i) +
                                  " coincide");
        }
    }

    std::vector<std::string> warnings;
    const auto ble = deployment.of_tech(Tech::kBle).size();
    const auto uwb = deployment.of_tech(Tech::kUwb).size();
    if (ble < 3) {
        warnings.push_back("only " + std::to_string(ble) + " BLE anchors; RSS-only position is unobservable");
    }
    if (uwb < 3) {
        warnings.push_back("only " + std::to_string(uwb) + " UWB anchors; TDOA-only position is unobservable");
    }
    return warnings;
}

ScenarioConfig default_scenario() {
    ScenarioConfig cfg;
    cfg.anchors = {
        {"ble1", Vec2(5.0, 0.0), Tech::kBle},  {"ble2", Vec2(10.0, 5.0), Tech::kBle},
        {"ble3", Vec2(5.0, 10.0), Tech::kBle}, {"ble4", Vec2(0.0, 5.0), Tech::kBle},
        {"uwb1", Vec2(0.0, 0.0), Tech::kUwb},  {"uwb2", Vec2(10.0, 0.0), Tech::kUwb},
        {"uwb3", Vec2(10.0, 10.0), Tech::kUwb}, {"uwb4", Vec2(0.0, 10.0), Tech::kUwb},
    };
    cfg.waypoints = {Vec2(2.0, 2.0), Vec2(8.0, 2.0), Vec2(8.0, 8.0), Vec2(2.0, 8.0), Vec2(2.0, 2.0)};
    return cfg;
}

TruthSample GroundTruth::at(double t) const {
    double remaining = std::max(t, 0.0) * speed;
    for (std::size_t i = 1; i < polyline.size(); ++i) {
        const Vec2& a = polyline[i - 1];
        const Vec2& b = polyline[i];
        const double length = (b - a).norm();
        const Vec2 direction = (b - a) / length;
        // At a corner the tag already moves along the outgoing segment.
        if (remaining < length) {
            return TruthSample{t, a + (remaining / length) * (b - a), speed * direction};
        }
        remaining -= length;
    }
    return TruthSample{t, polyline.back(), Vec2::Zero()};
}

GroundTruth build_trajectory(std::span<const Vec2> waypoints, double speed, double tick,
                             std::optional<double> duration) {
    if (waypoints.size() < 2) {
        throw InvalidArgument("a trajectory needs at least two waypoints");
    }
    require_positive(speed, "speed");
    require_positive(tick, "tick");
    double length = 0.0;
    for (std::size_t i = 1; i < waypoints.size(); ++i) {
        const double segment = (waypoints[i] - waypoints[i - 1]).norm();
        if (segment < kGeometryEpsilon) {
            throw InvalidArgument("repeated consecutive waypoint at index " + std::to_string(i));
        }
        length += segment;
    }
    const double total = duration.value_or(length / speed);
    require_positive(total, "duration");

    GroundTruth truth;
    truth.polyline.assign(waypoints.begin(), waypoints.end());
    truth.speed = speed;
    const auto count = static_cast<std::size_t>(std::floor(total / tick + kTimeTolerance));
    truth.samples.reserve(count + 1);
    for (std::size_t k = 0; k <= count; ++k) {
        truth.samples.push_back(truth.at(static_cast<double>(k) * tick));
    }
    return truth;
}

NoiseStream::NoiseStream(std::uint64_t seed, std::uint64_t stream_id)
    : engine_(splitmix64(splitmix64(seed) ^ stream_id)) {}

double NoiseStream::gaussian(double sigma) {
    // Always draw so a zero sigma does not shift the rest of the stream.
    const double unit = boost::random::normal_distribution<double>(0.0, 1.0)(engine_);
    return sigma * unit;
}

std::vector<RssReading> simulate_rss(const Vec2& pos, std::span<const Anchor> ble_anchors, const PathLossParams& pl,
                                     double shadow_sigma_db, double reading_sigma_db, NoiseStream& noise) {
    require_non_negative(shadow_sigma_db, "shadowing sigma");
    std::vector<RssReading> out;
    out.reserve(ble_anchors.size());
    for (const Anchor& anchor : ble_anchors) {
        const double value = rss_predict(pos, anchor, pl) + noise.gaussian(shadow_sigma_db);
        out.push_back(RssReading{anchor.id, value, reading_sigma_db});
    }
    return out;
}

std::vector<TdoaReading> simulate_tdoa(const Vec2& pos, std::span<const Anchor> uwb_anchors, double toa_sigma_s,
                                       double reading_sigma_m, NoiseStream& noise) {
    require_non_negative(toa_sigma_s, "TOA sigma");
    if (uwb_anchors.size() < 2) {
        throw InvalidArgument("TDOA needs at least two UWB anchors");
    }
    const std::vector<Anchor> anchors = sorted_by_id({uwb_anchors.begin(), uwb_anchors.end()});

    std::vector<double> toa(anchors.size());
    for (std::size_t i = 0; i < anchors.size(); ++i) {
        toa[i] = (pos - anchors[i].position).norm() / kSpeedOfLight + noise.gaussian(toa_sigma_s);
    }

    std::vector<TdoaReading> out;
    out.reserve(anchors.size() - 1);
    for (std::size_t i = 1; i < anchors.size(); ++i) {
        out.push_back(TdoaReading{anchors[i].id, anchors[0].id, kSpeedOfLight * (toa[i] - toa[0]), reading_sigma_m});
    }
    return out;
}

std::vector<ScheduledEpoch> schedule(double rss_rate_hz, double tdoa_rate_hz, double duration_s) {
    require_positive(rss_rate_hz, "RSS rate");
    require_positive(tdoa_rate_hz, "TDOA rate");
    require_non_negative(duration_s, "duration");

    const auto rss_count = static_cast<std::size_t>(std::floor(duration_s * rss_rate_hz + kTimeTolerance));
    const auto tdoa_count = static_cast<std::size_t>(std::floor(duration_s * tdoa_rate_hz + kTimeTolerance));

    std::vector<ScheduledEpoch> out;
    out.reserve(rss_count + tdoa_count);
    std::size_t i = 1;
    std::size_t j = 1;
    while (i <= rss_count || j <= tdoa_count) {
        const double t_rss = i <= rss_count ? static_cast<double>(i) / rss_rate_hz : INFINITY;
        const double t_tdoa = j <= tdoa_count ? static_cast<double>(j) / tdoa_rate_hz : INFINITY;
        if (std::abs(t_rss - t_tdoa) <= kTimeTolerance) {
            out.push_back({t_rss, true, true});
            ++i;
            ++j;
        } else if (t_rss < t_tdoa) {
            out.push_back({t_rss, true, false});
            ++i;
        } else {
            out.push_back({t_tdoa, false, true});
            ++j;
        }
    }
    return out;
}

GroundTruth scenario_truth(const ScenarioConfig& cfg) {
    return build_trajectory(cfg.waypoints, cfg.speed_mps, 1.0 / cfg.rss_rate_hz, cfg.duration());
}

Feed simulate_feed(const ScenarioConfig& cfg, const GroundTruth& truth) {
    const Deployment deployment(cfg.anchors);
    const std::vector<Anchor> ble = sorted_by_id(deployment.of_tech(Tech::kBle));
    const std::vector<Anchor> uwb = sorted_by_id(deployment.of_tech(Tech::kUwb));
    NoiseStream rss_noise(cfg.seed, kRssStream);
    NoiseStream tdoa_noise(cfg.seed, kTdoaStream);
    const double rss_sigma = quantize_decimal(cfg.rss_reading_sigma());
    const double tdoa_sigma = quantize_decimal(cfg.tdoa_reading_sigma());

    Feed feed;
    for (const ScheduledEpoch& epoch : schedule(cfg.rss_rate_hz, cfg.tdoa_rate_hz, cfg.duration())) {
        MeasurementBatch batch;
        batch.timestamp = quantize_decimal(epoch.t);
        const Vec2 pos = truth.at(epoch.t).position;
        if (epoch.rss && !ble.empty()) {
            batch.rss = simulate_rss(pos, ble, cfg.path_loss, cfg.shadow_sigma_db, rss_sigma, rss_noise);
            for (RssReading& r : batch.rss) {
                r.value = quantize_decimal(r.value);
            }
        }
        if (epoch.tdoa && uwb.size() >= 2) {
            batch.tdoa = simulate_tdoa(pos, uwb, cfg.toa_sigma_s, tdoa_sigma, tdoa_noise);
            for (TdoaReading& r : batch.tdoa) {
                r.value = quantize_decimal(r.value);
            }
        }
        if (!batch.empty()) {
            feed.push_back(std::move(batch));
        }
    }
    return feed;
}

Track filter_feed(const ScenarioConfig& cfg, std::span<const MeasurementBatch> feed, FilterMode mode) {
    const Deployment deployment(cfg.anchors);
    const Feed projected = project_feed(feed, mode);
    InitOptions init;
    init.timestamp = projected.empty() ? 0.0 : projected.front().timestamp;
    return run_filter(projected, deployment, cfg.path_loss, cfg.dwna, init_belief(deployment, init), cfg.filter);
}

ScenarioResult run_scenario(const ScenarioConfig& cfg, FilterMode mode) {
    cfg.validate();
    ScenarioResult result;
    result.truth = scenario_truth(cfg);
    result.feed = simulate_feed(cfg, result.truth);
    result.track = filter_feed(cfg, result.feed, mode);
    return result;
}

}  // namespace hybridloc
