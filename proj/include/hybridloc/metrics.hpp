#pragma once

#include "hybridloc/ekf.hpp"
#include "hybridloc/models.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace hybridloc {

struct GroundTruth;

struct ErrorSample {
    double t = 0.0;
    double error = 0.0;  ///< meters
};

using ErrorSeries = std::vector<ErrorSample>;

struct CdfPoint {
    double error = 0.0;
    double fraction = 0.0;
};

/// Step ECDF with one point per distinct value.
struct CdfCurve {
    std::vector<CdfPoint> points;

    /// Fraction of samples <= x.
    double fraction_at(double x) const;
    /// Smallest sample value whose fraction reaches q.
    double quantile(double q) const;
};

struct ErrorSummary {
    double median = 0.0;
    double mean = 0.0;
    double p90 = 0.0;
    double max = 0.0;
    std::size_t count = 0;
};

double point_to_segment(const Vec2& p, const Vec2& a, const Vec2& b);

/// Distance from p to the nearest point of the polyline.
double point_to_polyline(const Vec2& p, std::span<const Vec2> polyline);

/// Distance of every track position to the path (not to the time-aligned truth).
ErrorSeries trajectory_error_series(std::span<const Belief> track, std::span<const Vec2> polyline);

std::vector<double> error_values(std::span<const ErrorSample> series);

CdfCurve empirical_cdf(std::span<const double> errors);

/// Quantiles use lower interpolation: sorted[floor(q * (n - 1))].
ErrorSummary summarize(std::span<const double> errors);

double lower_quantile(std::span<const double> errors, double q);

/// Root-mean-square distance to the true position at each estimate's timestamp.
/// Penalizes lag, unlike the path distance.
double time_aligned_rmse(std::span<const Belief> track, const GroundTruth& truth);

}  // namespace hybridloc
