#pragma once

#include "hybridloc/deployment.hpp"
#include "hybridloc/models.hpp"

#include <Eigen/Dense>

#include <span>
#include <string>
#include <vector>

namespace hybridloc {

/// Tag state estimate: (x, y, vx, vy) with covariance.
struct Belief {
    Vec4 state = Vec4::Zero();
    Mat4 cov = Mat4::Identity();
    double timestamp = 0.0;

    Vec2 position() const { return state.head<2>(); }
    Vec2 velocity() const { return state.tail<2>(); }

    /// Throws InvalidState on non-finite entries.
    void check_finite() const;
};

using Track = std::vector<Belief>;

struct RssReading {
    std::string anchor_id;
    double value = 0.0;  ///< dBm
    double sigma = 3.0;  ///< dB
};

/// Range difference |tag - anchor| - |tag - ref_anchor| in meters.
struct TdoaReading {
    std::string anchor_id;
    std::string ref_anchor_id;
    double value = 0.0;
    double sigma = 0.0;
};

/// All readings taken at one instant. Readings are stacked RSS first, then TDOA.
struct MeasurementBatch {
    double timestamp = 0.0;
    std::vector<RssReading> rss;
    std::vector<TdoaReading> tdoa;

    std::size_t size() const { return rss.size() + tdoa.size(); }
    bool empty() const { return rss.empty() && tdoa.empty(); }
};

using Feed = std::vector<MeasurementBatch>;

/// Stacked linearized measurement model for one batch.
struct MeasurementSystem {
    Eigen::VectorXd z;
    Eigen::VectorXd h;
    Eigen::Matrix<double, Eigen::Dynamic, 4> jacobian;
    Eigen::MatrixXd r;

    Eigen::VectorXd innovation() const { return z - h; }
};

struct FilterOptions {
    /// Off-diagonal R terms for TDOAs sharing a reference anchor: sigma_i * sigma_j / 2,
    /// the covariance of two differences with one common time-of-arrival term.
    bool correlated_tdoa = false;
    /// Added to the innovation covariance diagonal before factorization.
    double jitter = 0.0;
};

struct InitOptions {
    double sigma_v = 2.0;        ///< m/s
    double sigma_p_floor = 5.0;  ///< m, lower bound on the initial position std dev
    double timestamp = 0.0;
};

Belief predict(const Belief& belief, double dt, const DwnaParams& dwna);

/// Builds z, h(x), H and R for a batch at the belief's state. Anchor distances are
/// clamped rather than rejected so a track survives passing over an anchor.
MeasurementSystem assemble(const Belief& belief, const MeasurementBatch& batch, const Deployment& deployment,
                           const PathLossParams& pl, const FilterOptions& options = {});

struct UpdateResult {
    Belief belief;
    Eigen::VectorXd innovation;
};

UpdateResult update_with_innovation(const Belief& belief, const MeasurementBatch& batch,
                                    const Deployment& deployment, const PathLossParams& pl,
                                    const FilterOptions& options = {});

Belief update(const Belief& belief, const MeasurementBatch& batch, const Deployment& deployment,
              const PathLossParams& pl, const FilterOptions& options = {});

/// Joint Kalman update against an already assembled system. Throws NumericalFailure
/// when H P H^T + R is not positive definite.
Belief kalman_update(const Belief& belief, const MeasurementSystem& system, const FilterOptions& options = {});

/// Position at the anchor centroid, zero velocity, diagonal covariance with
/// sigma_p = max(half the anchor bounding-box diagonal, floor).
Belief init_belief(const Deployment& deployment, const InitOptions& options = {});

/// Predict-then-update over every batch. The returned track starts with `init`
/// followed by one posterior per batch.
Track run_filter(std::span<const MeasurementBatch> feed, const Deployment& deployment, const PathLossParams& pl,
                 const DwnaParams& dwna, const Belief& init, const FilterOptions& options = {});

enum class FilterMode { kHybrid, kRssOnly, kTdoaOnly };

const char* to_string(FilterMode mode);
FilterMode filter_mode_from_string(const std::string& text);

/// Strips readings the mode does not use and drops batches left empty.
Feed project_feed(std::span<const MeasurementBatch> feed, FilterMode mode);

}  // namespace hybridloc
