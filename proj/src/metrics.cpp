#include "hybridloc/metrics.hpp"

#include "hybridloc/errors.hpp"
#include "hybridloc/sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace hybridloc {

namespace {

void require_non_empty(std::size_t n, const char* what) {
    if (n == 0) {
        throw InvalidArgument(std::string(what) + " needs at least one value");
    }
}

std::vector<double> sorted_copy(std::span<const double> values) {
    std::vector<double> out(values.begin(), values.end());
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace

double CdfCurve::fraction_at(double x) const {
    const auto it = std::upper_bound(points.begin(), points.end(), x,
                                     [](double value, const CdfPoint& p) { return value < p.error; });
    return it == points.begin() ? 0.0 : std::prev(it)->fraction;
}

double CdfCurve::quantile(double q) const {
    if (points.empty()) {
        throw InvalidArgument("quantile of an empty CDF");
    }
    const auto it = std::find_if(points.begin(), points.end(), [q](const CdfPoint& p) { return p.fraction >= q; });
    return it == points.end() ? points.back().error : it->error;
}

double point_to_segment(const Vec2& p, const Vec2& a, const Vec2& b) {
    const Vec2 ab = b - a;
    const double len2 = ab.squaredNorm();
    if (len2 == 0.0) {
        return (p - a).norm();
    }
    const double s = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
    return (p - (a + s * ab)).norm();
}

double point_to_polyline(const Vec2& p, std::span<const Vec2> polyline) {
    if (polyline.size() < 2) {
        throw InvalidArgument("a polyline needs at least two points");
    }
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < polyline.size(); ++i) {
        best = std::min(best, point_to_segment(p, polyline[i - 1], polyline[i]));
    }
    return best;
}

ErrorSeries trajectory_error_series(std::span<const Belief> track, std::span<const Vec2> polyline) {
    require_non_empty(track.size(), "trajectory error");
    ErrorSeries out;
    out.reserve(track.size());
    for (const Belief& b : track) {
        out.push_back({b.timestamp, point_to_polyline(b.position(), polyline)});
    }
    return out;
}

std::vector<double> error_values(std::span<const ErrorSample> series) {
    std::vector<double> out;
    out.reserve(series.size());
    for (const ErrorSample& s : series) {
        out.push_back(s.error);
    }
    return out;
}

CdfCurve empirical_cdf(std::span<const double> errors) {
    require_non_empty(errors.size(), "empirical CDF");
    const std::vector<double> sorted = sorted_copy(errors);
    const auto n = static_cast<double>(sorted.size());

    CdfCurve curve;
    for (std::size_t k = 0; k < sorted.size(); ++k) {
        // Ties collapse onto the last occurrence.
        if (k + 1 < sorted.size() && sorted[k + 1] == sorted[k]) {
            continue;
        }
        curve.points.push_back({sorted[k], static_cast<double>(k + 1) / n});
    }
    curve.points.back().fraction = 1.0;
    return curve;
}

double lower_quantile(std::span<const double> errors, double q) {
    require_non_empty(errors.size(), "quantile");
    const std::vector<double> sorted = sorted_copy(errors);
    const auto index = static_cast<std::size_t>(std::floor(q * static_cast<double>(sorted.size() - 1)));
    return sorted[std::min(index, sorted.size() - 1)];
}

ErrorSummary summarize(std::span<const double> errors) {
    require_non_empty(errors.size(), "summary");
    const std::vector<double> sorted = sorted_copy(errors);
    const std::size_t n = sorted.size();
    const auto at = [&](double q) { return sorted[static_cast<std::size_t>(std::floor(q * static_cast<double>(n - 1)))]; };

    ErrorSummary s;
    s.count = n;
    s.median = at(0.5);
    s.p90 = at(0.9);
    s.max = sorted.back();
    // Sum in sorted order so the mean does not depend on input order.
    s.mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) / static_cast<double>(n);
    return s;
}

double time_aligned_rmse(std::span<const Belief> track, const GroundTruth& truth) {
    require_non_empty(track.size(), "RMSE");
    double sum = 0.0;
    for (const Belief& b : track) {
        sum += (b.position() - truth.at(b.timestamp).position).squaredNorm();
    }
    return std::sqrt(sum / static_cast<double>(track.size()));
}

}  // namespace hybridloc
