#pragma once

#include "hybridloc/ekf.hpp"
#include "hybridloc/metrics.hpp"
#include "hybridloc/sim.hpp"

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace hybridloc {

// Scenario / deployment config (YAML). Keys:
//   anchors: [{id, x, y, tech: BLE|UWB}]     required
//   waypoints: [[x, y], ...]                 required for scenarios
//   speed_mps, rss_rate_hz, tdoa_rate_hz, shadow_sigma_db, toa_sigma_ns,
//   rss0_dbm, d0_m, gamma, sigma_a, seed, duration_s
//   filter_rss_sigma_db, filter_tdoa_sigma_m, correlated_tdoa, innovation_jitter
// Unknown keys are rejected.

ScenarioConfig load_scenario_config(std::string_view text);

/// Same keys, but waypoints are optional; used to replay logs.
ScenarioConfig load_deployment_config(std::string_view text);

std::string write_scenario_config(const ScenarioConfig& cfg);

inline constexpr std::string_view kMeasurementLogHeader = "t,kind,anchor_id,ref_anchor_id,value,sigma";
inline constexpr std::string_view kTrackHeader = "t,x,y,vx,vy,var_x,var_y";
inline constexpr std::string_view kCdfHeader = "error_m,fraction";
inline constexpr std::string_view kSummaryHeader = "metric,value";
inline constexpr std::string_view kErrorsHeader = "t,error_m";
inline constexpr std::string_view kTruthHeader = "t,x,y,vx,vy";

/// Rows sharing a timestamp merge into one batch. Throws ParseError / OrderingError
/// with 1-based line numbers.
Feed read_measurement_log(std::string_view text);
std::string write_measurement_log(std::span<const MeasurementBatch> feed);

std::string write_track(std::span<const Belief> track);
/// Velocity covariance is not stored; the returned beliefs carry zeros there.
Track read_track(std::string_view text);

std::string write_errors(std::span<const ErrorSample> series);
std::string write_cdf(const CdfCurve& curve);
std::string write_summary(const ErrorSummary& summary);

/// Truth samples interleaved with the waypoint vertices (at their arrival times),
/// so the x,y columns trace the exact path.
std::string write_truth(const GroundTruth& truth);

/// Polyline from a CSV with x and y columns (e.g. truth.csv or a plain `x,y` file).
std::vector<Vec2> read_polyline(std::string_view text);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace hybridloc
