#include "hybridloc/models.hpp"

#include "hybridloc/errors.hpp"

#include <cmath>
#include <numbers>

namespace hybridloc {

const char* to_string(Tech tech) {
    return tech == Tech::kBle ? "BLE" : "UWB";
}

Tech tech_from_string(const std::string& text) {
    if (text == "BLE" || text == "ble") {
        return Tech::kBle;
    }
    if (text == "UWB" || text == "uwb") {
        return Tech::kUwb;
    }
    throw InvalidArgument("unknown anchor technology '" + text + "' (expected BLE or UWB)");
}

void PathLossParams::validate() const {
    if (!std::isfinite(rss0_dbm)) {
        throw InvalidArgument("rss0 must be finite");
    }
    if (!(d0_m > 0.0) || !std::isfinite(d0_m)) {
        throw InvalidArgument("d0 must be positive");
    }
    if (!(gamma > 0.0) || !std::isfinite(gamma)) {
        throw InvalidArgument("path-loss exponent must be positive");
    }
}

void DwnaParams::validate() const {
    if (!(sigma_a >= 0.0) || !std::isfinite(sigma_a)) {
        throw InvalidArgument("sigma_a must be finite and >= 0");
    }
}

namespace {

void check_dt(double dt) {
    if (!std::isfinite(dt) || dt < 0.0) {
        throw InvalidArgument("dt must be finite and >= 0, got " + std::to_string(dt));
    }
}

// Distance from anchor to pos, with the degenerate case handled per policy.
double guarded_distance(const Vec2& offset, DegeneratePolicy policy, const Anchor& anchor) {
    const double d = offset.norm();
    if (d >= kGeometryEpsilon) {
        return d;
    }
    if (policy == DegeneratePolicy::kThrow) {
        throw DegenerateGeometry("position coincides with anchor '" + anchor.id + "'");
    }
    return kGeometryEpsilon;
}

void check_tdoa_pair(const Anchor& anchor_m, const Anchor& anchor_ref) {
    if (anchor_m.id == anchor_ref.id) {
        throw InvalidArgument("TDOA pair uses the same anchor '" + anchor_m.id + "' twice");
    }
    if (anchor_m.tech != Tech::kUwb || anchor_ref.tech != Tech::kUwb) {
        throw InvalidArgument("TDOA pair (" + anchor_m.id + ", " + anchor_ref.id + ") must be UWB anchors");
    }
}

}  // namespace

Mat4 dwna_transition(double dt) {
    check_dt(dt);
    Mat4 f = Mat4::Identity();
    f(0, 2) = dt;
    f(1, 3) = dt;
    return f;
}

Mat4 dwna_process_noise(double dt, const DwnaParams& params) {
    check_dt(dt);
    params.validate();
    const double var = params.sigma_a * params.sigma_a;
    const double pp = var * dt * dt * dt * dt / 4.0;
    const double pv = var * dt * dt * dt / 2.0;
    const double vv = var * dt * dt;

    Mat4 q = Mat4::Zero();
    for (int axis = 0; axis < 2; ++axis) {
        const int p = axis;
        const int v = axis + 2;
        q(p, p) = pp;
        q(p, v) = pv;
        q(v, p) = pv;
        q(v, v) = vv;
    }
    return q;
}

StateTransition dwna_model(double dt, const DwnaParams& params) {
    return StateTransition{dwna_transition(dt), dwna_process_noise(dt, params), dt};
}

double rss_predict(const Vec2& pos, const Anchor& anchor, const PathLossParams& pl, DegeneratePolicy policy) {
    const double d = guarded_distance(pos - anchor.position, policy, anchor);
    return pl.rss0_dbm - 10.0 * pl.gamma * std::log10(d / pl.d0_m);
}

RowVec4 rss_jacobian_row(const Vec2& pos, const Anchor& anchor, const PathLossParams& pl, DegeneratePolicy policy) {
    const Vec2 offset = pos - anchor.position;
    const double d = guarded_distance(offset, policy, anchor);
    const double scale = -10.0 * pl.gamma / std::numbers::ln10 / (d * d);
    return RowVec4(scale * offset.x(), scale * offset.y(), 0.0, 0.0);
}

double tdoa_predict(const Vec2& pos, const Anchor& anchor_m, const Anchor& anchor_ref) {
    check_tdoa_pair(anchor_m, anchor_ref);
    return (pos - anchor_m.position).norm() - (pos - anchor_ref.position).norm();
}

RowVec4 tdoa_jacobian_row(const Vec2& pos, const Anchor& anchor_m, const Anchor& anchor_ref,
                          DegeneratePolicy policy) {
    check_tdoa_pair(anchor_m, anchor_ref);
    const Vec2 om = pos - anchor_m.position;
    const Vec2 oref = pos - anchor_ref.position;
    const Vec2 grad = om / guarded_distance(om, policy, anchor_m) - oref / guarded_distance(oref, policy, anchor_ref);
    return RowVec4(grad.x(), grad.y(), 0.0, 0.0);
}

}  // namespace hybridloc
