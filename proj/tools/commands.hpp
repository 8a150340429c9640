#pragma once

#include "hybridloc/ekf.hpp"
#include "hybridloc/metrics.hpp"
#include "hybridloc/sim.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace hybridloc::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitRuntime = 2;

/// Entry point shared by the executable and the in-process tests. `args` excludes argv[0].
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

struct SweepSpec {
    ScenarioConfig base;
    std::vector<double> tdoa_rates;
    std::size_t runs = 1;
    unsigned jobs = 1;
};

struct SweepRow {
    std::string label;  ///< "rss_only" or the rate
    double rate_hz = 0.0;
    double median_m = 0.0;  ///< mean over runs of the per-run median
    double p90_m = 0.0;     ///< mean over runs of the per-run p90
    std::vector<double> run_medians;
    std::vector<double> pooled_errors;
};

struct SweepResult {
    SweepRow baseline;
    std::vector<SweepRow> rates;
};

/// Run r uses seed base.seed + r. The RSS-only baseline filters the RSS projection of
/// the same feeds, so every row shares the RSS noise realization of its run.
SweepResult run_sweep(const SweepSpec& spec);

std::string write_sweep_summary(const SweepResult& result);

/// File name of the pooled CDF for one rate, e.g. "cdf_tdoa_0.5hz.csv".
std::string sweep_cdf_name(double rate_hz);

}  // namespace hybridloc::cli
