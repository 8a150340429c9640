#pragma once

#include <Eigen/Dense>

#include <string>

namespace hybridloc {

using Vec2 = Eigen::Vector2d;
using Vec4 = Eigen::Vector4d;
using Mat4 = Eigen::Matrix4d;
using RowVec4 = Eigen::RowVector4d;

/// Speed of light in vacuum [m/s].
inline constexpr double kSpeedOfLight = 299'792'458.0;

/// Distances below this are treated as coincident with an anchor [m].
inline constexpr double kGeometryEpsilon = 1e-6;

enum class Tech { kBle, kUwb };

const char* to_string(Tech tech);
Tech tech_from_string(const std::string& text);

struct Anchor {
    std::string id;
    Vec2 position = Vec2::Zero();
    Tech tech = Tech::kBle;
};

/// Log-distance path-loss model parameters.
struct PathLossParams {
    double rss0_dbm = -40.0;  ///< received power at d0
    double d0_m = 1.0;
    double gamma = 1.9;  ///< path-loss exponent

    void validate() const;
};

/// Discrete white noise acceleration model tuning.
struct DwnaParams {
    double sigma_a = 2.0;  ///< std dev of the white acceleration [m/s^2]

    void validate() const;
};

/// State order is (x, y, vx, vy).
struct StateTransition {
    Mat4 f = Mat4::Identity();
    Mat4 q = Mat4::Zero();
    double dt = 0.0;
};

/// How model functions treat a position within kGeometryEpsilon of an anchor.
enum class DegeneratePolicy {
    kThrow,  ///< raise DegenerateGeometry
    kClamp,  ///< clamp the distance to kGeometryEpsilon (used inside the filter loop)
};

/// Constant-velocity transition matrix for an elapsed time dt >= 0.
Mat4 dwna_transition(double dt);

/// DWNA process noise: per-axis sigma_a^2 * G * G^T with G = [dt^2/2, dt]^T.
Mat4 dwna_process_noise(double dt, const DwnaParams& params);

/// Both halves of the time-update model.
StateTransition dwna_model(double dt, const DwnaParams& params);

double rss_predict(const Vec2& pos, const Anchor& anchor, const PathLossParams& pl,
                   DegeneratePolicy policy = DegeneratePolicy::kThrow);

/// d(RSS)/d(state); velocity entries are zero.
RowVec4 rss_jacobian_row(const Vec2& pos, const Anchor& anchor, const PathLossParams& pl,
                         DegeneratePolicy policy = DegeneratePolicy::kThrow);

/// Range difference |pos - m| - |pos - ref| in meters. Divide by c for seconds.
/// Defined everywhere, including at the anchors themselves.
double tdoa_predict(const Vec2& pos, const Anchor& anchor_m, const Anchor& anchor_ref);

/// Unit vector from anchor_m minus unit vector from anchor_ref; velocity entries are zero.
RowVec4 tdoa_jacobian_row(const Vec2& pos, const Anchor& anchor_m, const Anchor& anchor_ref,
                          DegeneratePolicy policy = DegeneratePolicy::kThrow);

}  // namespace hybridloc
