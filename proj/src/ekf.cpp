#include "hybridloc/ekf.hpp"

#include "hybridloc/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace hybridloc {

void Belief::check_finite() const {
    if (!state.allFinite() || !cov.allFinite() || !std::isfinite(timestamp)) {
        throw InvalidState("belief contains non-finite values");
    }
}

namespace {

Mat4 symmetrized(const Mat4& p) {
    return 0.5 * (p + p.transpose());
}

void check_sigma(double sigma, const std::string& anchor_id) {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) {
        throw InvalidArgument("reading for anchor '" + anchor_id + "' needs a positive sigma");
    }
}

const Anchor& uwb_anchor(const Deployment& deployment, const std::string& id) {
    const Anchor& a = deployment.at(id);
    if (a.tech != Tech::kUwb) {
        throw InvalidArgument("TDOA reading references non-UWB anchor '" + id + "'");
    }
    return a;
}

double condition_estimate(const Eigen::MatrixXd& s) {
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(s, Eigen::EigenvaluesOnly);
    if (eig.info() != Eigen::Success) {
        return std::numeric_limits<double>::infinity();
    }
    const auto abs_values = eig.eigenvalues().cwiseAbs();
    const double lo = abs_values.minCoeff();
    return lo > 0.0 ? abs_values.maxCoeff() / lo : std::numeric_limits<double>::infinity();
}

}  // namespace

Belief predict(const Belief& belief, double dt, const DwnaParams& dwna) {
    belief.check_finite();
    const StateTransition model = dwna_model(dt, dwna);
    Belief out;
    out.state = model.f * belief.state;
    out.cov = symmetrized(model.f * belief.cov * model.f.transpose() + model.q);
    out.timestamp = belief.timestamp + dt;
    return out;
}

MeasurementSystem assemble(const Belief& belief, const MeasurementBatch& batch, const Deployment& deployment,
                           const PathLossParams& pl, const FilterOptions& options) {
    if (batch.empty()) {
        throw InvalidArgument("cannot update with an empty measurement batch");
    }
    const auto rows = static_cast<Eigen::Index>(batch.size());
    const Vec2 pos = belief.position();

    MeasurementSystem sys;
    sys.z.resize(rows);
    sys.h.resize(rows);
    sys.jacobian.resize(rows, 4);
    sys.r = Eigen::MatrixXd::Zero(rows, rows);

    Eigen::Index row = 0;
    for (const RssReading& reading : batch.rss) {
        check_sigma(reading.sigma, reading.anchor_id);
        const Anchor& anchor = deployment.at(reading.anchor_id);
        sys.z(row) = reading.value;
        sys.h(row) = rss_predict(pos, anchor, pl, DegeneratePolicy::kClamp);
        sys.jacobian.row(row) = rss_jacobian_row(pos, anchor, pl, DegeneratePolicy::kClamp);
        sys.r(row, row) = reading.sigma * reading.sigma;
        ++row;
    }
    const Eigen::Index tdoa_begin = row;
    for (const TdoaReading& reading : batch.tdoa) {
        check_sigma(reading.sigma, reading.anchor_id);
        const Anchor& anchor = uwb_anchor(deployment, reading.anchor_id);
        const Anchor& ref = uwb_anchor(deployment, reading.ref_anchor_id);
        sys.z(row) = reading.value;
        sys.h(row) = tdoa_predict(pos, anchor, ref);
        sys.jacobian.row(row) = tdoa_jacobian_row(pos, anchor, ref, DegeneratePolicy::kClamp);
        sys.r(row, row) = reading.sigma * reading.sigma;
        ++row;
    }

    if (options.correlated_tdoa) {
        for (std::size_t i = 0; i < batch.tdoa.size(); ++i) {
            for (std::size_t j = i + 1; j < batch.tdoa.size(); ++j) {
                const TdoaReading& a = batch.tdoa[i];
                const TdoaReading& b = batch.tdoa[j];
                if (a.ref_anchor_id != b.ref_anchor_id) {
                    continue;
                }
                const auto ri = tdoa_begin + static_cast<Eigen::Index>(i);
                const auto rj = tdoa_begin + static_cast<Eigen::Index>(j);
                sys.r(ri, rj) = sys.r(rj, ri) = 0.5 * a.sigma * b.sigma;
            }
        }
    }
    return sys;
}

Belief kalman_update(const Belief& belief, const MeasurementSystem& system, const FilterOptions& options) {
    belief.check_finite();
    const auto& hm = system.jacobian;
    Eigen::MatrixXd s = hm * belief.cov * hm.transpose() + system.r;
    s = 0.5 * (s + s.transpose());
    if (options.jitter > 0.0) {
        s.diagonal().array() += options.jitter;
    }

    const Eigen::LLT<Eigen::MatrixXd> llt(s);
    if (llt.info() != Eigen::Success) {
        const double cond = condition_estimate(s);
        std::ostringstream msg;
        msg << "innovation covariance (" << s.rows() << "x" << s.cols()
            << ") is not positive definite; condition estimate " << cond;
        throw NumericalFailure(msg.str(), cond);
    }

    // K = P H^T S^-1, computed as (S^-1 H P)^T since P and S are symmetric.
    const Eigen::Matrix<double, 4, Eigen::Dynamic> gain = llt.solve(hm * belief.cov).transpose();

    Belief out;
    out.state = belief.state + gain * system.innovation();
    out.cov = symmetrized((Mat4::Identity() - gain * hm) * belief.cov);
    out.timestamp = belief.timestamp;
    out.check_finite();
    return out;
}

UpdateResult update_with_innovation(const Belief& belief, const MeasurementBatch& batch,
                                    const Deployment& deployment, const PathLossParams& pl,
                                    const FilterOptions& options) {
    const MeasurementSystem system = assemble(belief, batch, deployment, pl, options);
    return UpdateResult{kalman_update(belief, system, options), system.innovation()};
}

Belief update(const Belief& belief, const MeasurementBatch& batch, const Deployment& deployment,
              const PathLossParams& pl, const FilterOptions& options) {
    return update_with_innovation(belief, batch, deployment, pl, options).belief;
}

Belief init_belief(const Deployment& deployment, const InitOptions& options) {
    if (deployment.empty()) {
        throw InvalidArgument("cannot initialize a belief without anchors");
    }
    Vec2 sum = Vec2::Zero();
    Vec2 lo = Vec2::Constant(std::numeric_limits<double>::infinity());
    Vec2 hi = -lo;
    for (const Anchor& a : deployment.anchors()) {
        sum += a.position;
        lo = lo.cwiseMin(a.position);
        hi = hi.cwiseMax(a.position);
    }
    const Vec2 centroid = sum / static_cast<double>(deployment.size());
    const double sigma_p = std::max(0.5 * (hi - lo).norm(), options.sigma_p_floor);

    Belief b;
    b.state << centroid.x(), centroid.y(), 0.0, 0.0;
    b.cov = Vec4(sigma_p * sigma_p, sigma_p * sigma_p, options.sigma_v * options.sigma_v,
                 options.sigma_v * options.sigma_v)
                .asDiagonal();
    b.timestamp = options.timestamp;
    return b;
}

Track run_filter(std::span<const MeasurementBatch> feed, const Deployment& deployment, const PathLossParams& pl,
                 const DwnaParams& dwna, const Belief& init, const FilterOptions& options) {
    Track track;
    track.reserve(feed.size() + 1);
    track.push_back(init);

    Belief current = init;
    for (std::size_t i = 0; i < feed.size(); ++i) {
        const MeasurementBatch& batch = feed[i];
        const double dt = batch.timestamp - current.timestamp;
        if (!(dt >= 0.0)) {
            std::ostringstream msg;
            msg << "measurement batch " << i << " at t=" << batch.timestamp
                << " precedes the previous timestamp t=" << current.timestamp;
            throw OrderingError(msg.str(), i);
        }
        current = update(predict(current, dt, dwna), batch, deployment, pl, options);
        // Keep the batch time exactly rather than an accumulated sum of dts.
        current.timestamp = batch.timestamp;
        track.push_back(current);
    }
    return track;
}

const char* to_string(FilterMode mode) {
    switch (mode) {
        case FilterMode::kHybrid:
            return "hybrid";
        case FilterMode::kRssOnly:
            return "rss";
        case FilterMode::kTdoaOnly:
            return "tdoa";
    }
    return "hybrid";
}

FilterMode filter_mode_from_string(const std::string& text) {
    if (text == "hybrid") {
        return FilterMode::kHybrid;
    }
    if (text == "rss") {
        return FilterMode::kRssOnly;
    }
    if (text == "tdoa") {
        return FilterMode::kTdoaOnly;
    }
    throw InvalidArgument("unknown filter mode '" + text + "' (expected hybrid, rss or tdoa)");
}

Feed project_feed(std::span<const MeasurementBatch> feed, FilterMode mode) {
    Feed out;
    out.reserve(feed.size());
    for (const MeasurementBatch& batch : feed) {
        MeasurementBatch projected{batch.timestamp, {}, {}};
        if (mode != FilterMode::kTdoaOnly) {
            projected.rss = batch.rss;
        }
        if (mode != FilterMode::kRssOnly) {
            projected.tdoa = batch.tdoa;
        }
        if (!projected.empty()) {
            out.push_back(std::move(projected));
        }
    }
    return out;
}

}  // namespace hybridloc
