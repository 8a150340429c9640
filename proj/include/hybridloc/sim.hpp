#pragma once

#include "hybridloc/deployment.hpp"
#include "hybridloc/ekf.hpp"
#include "hybridloc/models.hpp"

#include <boost/random/mersenne_twister.hpp>

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace hybridloc {

/// Everything needed to simulate one walk through a deployment and filter it.
struct ScenarioConfig {
    std::vector<Anchor> anchors;
    std::vector<Vec2> waypoints;
    double speed_mps = 1.4;
    double rss_rate_hz = 10.0;
    double tdoa_rate_hz = 0.5;
    double shadow_sigma_db = 3.0;
    double toa_sigma_s = 0.2e-9;
    PathLossParams path_loss;
    DwnaParams dwna;
    std::optional<double> duration_s;  ///< defaults to path length / speed
    std::uint64_t seed = 0;

    /// Noise the filter assumes per reading. Unset means: the simulated level,
    /// or 3 dB / sqrt(2)*c*0.2 ns when the simulated level is zero.
    std::optional<double> filter_rss_sigma_db;
    std::optional<double> filter_tdoa_sigma_m;
    FilterOptions filter;

    double path_length() const;
    double duration() const;
    double rss_reading_sigma() const;
    double tdoa_reading_sigma() const;

    /// Throws InvalidArgument on hard violations; returns human-readable warnings
    /// (fewer than 3 anchors of a technology) otherwise.
    std::vector<std::string> validate() const;
};

/// 10 m x 10 m room: BLE anchors at the wall midpoints, UWB anchors in the corners,
/// rectangular loop 2 m inside the walls.
ScenarioConfig default_scenario();

struct TruthSample {
    double t = 0.0;
    Vec2 position = Vec2::Zero();
    Vec2 velocity = Vec2::Zero();
};

struct GroundTruth {
    std::vector<TruthSample> samples;
    std::vector<Vec2> polyline;
    double speed = 0.0;

    /// Exact state on the polyline at time t; holds the last waypoint after the end.
    TruthSample at(double t) const;
};

/// Constant-speed traversal of the waypoints sampled every `tick`, from t = 0 to
/// `duration` (default: the time to walk the whole path).
GroundTruth build_trajectory(std::span<const Vec2> waypoints, double speed, double tick,
                             std::optional<double> duration = std::nullopt);

/// Seeded Gaussian noise source. Output depends only on the seed and stream id,
/// identically on every platform.
class NoiseStream {
public:
    NoiseStream(std::uint64_t seed, std::uint64_t stream_id);

    double gaussian(double sigma);

private:
    boost::random::mt19937_64 engine_;
};

inline constexpr std::uint64_t kRssStream = 1;
inline constexpr std::uint64_t kTdoaStream = 2;

/// One reading per BLE anchor: modeled power plus N(0, shadow_sigma^2).
std::vector<RssReading> simulate_rss(const Vec2& pos, std::span<const Anchor> ble_anchors, const PathLossParams& pl,
                                     double shadow_sigma_db, double reading_sigma_db, NoiseStream& noise);

/// Noisy times of arrival at every UWB anchor, differenced against the reference
/// anchor (smallest id) and converted to meters.
std::vector<TdoaReading> simulate_tdoa(const Vec2& pos, std::span<const Anchor> uwb_anchors, double toa_sigma_s,
                                       double reading_sigma_m, NoiseStream& noise);

struct ScheduledEpoch {
    double t = 0.0;
    bool rss = false;
    bool tdoa = false;
};

/// Merged RSS (k / rss_rate) and TDOA (k / tdoa_rate) instants in (0, duration], k >= 1.
std::vector<ScheduledEpoch> schedule(double rss_rate_hz, double tdoa_rate_hz, double duration_s);

struct ScenarioResult {
    GroundTruth truth;
    Feed feed;  ///< the full hybrid feed, before any mode projection
    Track track;
};

/// Simulated feed for a config. Values are rounded to CSV precision so a written log
/// replays to the identical feed.
Feed simulate_feed(const ScenarioConfig& cfg, const GroundTruth& truth);

GroundTruth scenario_truth(const ScenarioConfig& cfg);

/// Projects the feed to `mode` and filters it, starting from init_belief at the
/// first remaining batch time.
Track filter_feed(const ScenarioConfig& cfg, std::span<const MeasurementBatch> feed, FilterMode mode);

ScenarioResult run_scenario(const ScenarioConfig& cfg, FilterMode mode = FilterMode::kHybrid);

}  // namespace hybridloc
