#pragma once

// Reference computations that deliberately avoid the library's code paths.

#include "hybridloc/models.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <span>

namespace hybridloc::testkit {

/// Central differences of a scalar field over (x, y); velocity entries left at 0.
inline RowVec4 central_difference(const std::function<double(const Vec2&)>& f, const Vec2& pos, double step = 1e-6) {
    RowVec4 row = RowVec4::Zero();
    for (int axis = 0; axis < 2; ++axis) {
        Vec2 hi = pos;
        Vec2 lo = pos;
        hi(axis) += step;
        lo(axis) -= step;
        row(axis) = (f(hi) - f(lo)) / (2.0 * step);
    }
    return row;
}

/// Textbook linear Kalman filter on (x, y, vx, vy): explicit inverse and Joseph-form
/// covariance update, with its own constant-velocity / white-acceleration model.
class TextbookKalman {
public:
    TextbookKalman(const Vec4& x0, const Mat4& p0, double sigma_a) : x_(x0), p_(p0), sigma_a_(sigma_a) {}

    void predict(double dt) {
        Mat4 f = Mat4::Identity();
        f(0, 2) = f(1, 3) = dt;
        Eigen::Matrix<double, 4, 2> g = Eigen::Matrix<double, 4, 2>::Zero();
        g(0, 0) = g(1, 1) = 0.5 * dt * dt;
        g(2, 0) = g(3, 1) = dt;
        const Mat4 q = sigma_a_ * sigma_a_ * g * g.transpose();
        x_ = f * x_;
        p_ = f * p_ * f.transpose() + q;
    }

    void update(const Eigen::MatrixXd& h, const Eigen::MatrixXd& r, const Eigen::VectorXd& z) {
        const Eigen::MatrixXd s = h * p_ * h.transpose() + r;
        const Eigen::MatrixXd k = p_ * h.transpose() * s.inverse();
        x_ = x_ + k * (z - h * x_);
        const Mat4 a = Mat4::Identity() - k * h;
        p_ = a * p_ * a.transpose() + k * r * k.transpose();
    }

    const Vec4& state() const { return x_; }
    const Mat4& cov() const { return p_; }

private:
    Vec4 x_;
    Mat4 p_;
    double sigma_a_;
};

/// Polyline distance by sampling: 10^4 points per segment, then 10^4 more between the
/// neighbours of the best sample. No projection formula involved.
inline double sampled_polyline_distance(const Vec2& p, std::span<const Vec2> polyline, int samples = 10000) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < polyline.size(); ++i) {
        const Vec2& a = polyline[i - 1];
        const Vec2& b = polyline[i];
        const auto point = [&](double s) { return a + s * (b - a); };
        int best_k = 0;
        double seg_best = std::numeric_limits<double>::infinity();
        for (int k = 0; k <= samples; ++k) {
            const double d = (p - point(static_cast<double>(k) / samples)).norm();
            if (d < seg_best) {
                seg_best = d;
                best_k = k;
            }
        }
        const double lo = static_cast<double>(std::max(best_k - 1, 0)) / samples;
        const double hi = static_cast<double>(std::min(best_k + 1, samples)) / samples;
        for (int k = 0; k <= samples; ++k) {
            seg_best = std::min(seg_best, (p - point(lo + (hi - lo) * k / samples)).norm());
        }
        best = std::min(best, seg_best);
    }
    return best;
}

/// Sample mean and (n-1) standard deviation.
struct Moments {
    double mean = 0.0;
    double stddev = 0.0;
};

inline Moments moments(std::span<const double> values) {
    double mean = 0.0;
    for (double v : values) {
        mean += v;
    }
    mean /= static_cast<double>(values.size());
    double ss = 0.0;
    for (double v : values) {
        ss += (v - mean) * (v - mean);
    }
    return {mean, std::sqrt(ss / static_cast<double>(values.size() - 1))};
}

}  // namespace hybridloc::testkit
