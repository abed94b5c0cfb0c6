#pragma once

// Executes a RunConfig and writes its artifacts:
//
//   g_t<tag>.csv       solution at each query time (x[,y],re,im; matrix: i,j,re,im)
//   plotdata_*.csv     slices and the det₂ trace, one column per series
//   report.json        config echo and per-query diagnostics (deterministic)
//   timing.json        wall-clock times (kept out of report.json)
//
// Every file is written to a temporary name and renamed into place.

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "riccati/run_config.hpp"

namespace riccati {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitPatchBreakdown = 3;
inline constexpr int kExitInstability = 4;
inline constexpr int kExitOracle = 5;

struct QueryRecord {
    double t = 0.0;
    std::optional<double> fredholm_residual;
    std::optional<cplx> det2;
    std::optional<double> qprime_hs;
    std::optional<double> boundary_mass;
    std::optional<double> oracle_error;
    std::optional<double> pde_residual;
    std::optional<double> translation_deviation;
    double wall_seconds = 0.0;
};

struct RunResult {
    int exit_code = kExitOk;
    std::string status = "ok";
    std::string message;
    std::vector<QueryRecord> queries;
    /// Solution at the last completed query (slice, kernel, field or G).
    Eigen::MatrixXcd final_solution;
    /// Extra report entries (breakdown details, det₂ trace).
    nlohmann::json extra = nlohmann::json::object();
    double wall_seconds = 0.0;
};

/// Runs the model and writes artifacts into cfg.output_dir. Never throws for
/// numerical failures; the outcome is in exit_code and status. Config
/// problems found while building the model give kExitConfig and no files.
RunResult run(const RunConfig& cfg, std::ostream& log);

/// Computes without writing anything.
RunResult compute(const RunConfig& cfg);

/// Runs cfg with `parameter` set to each value (see set_parameter) into
/// out_dir/run_<i>, then writes out_dir/convergence.csv with columns
/// value,metric,observed_order,status and out_dir/sweep.json. The metric is
/// the oracle error when the oracle is enabled, otherwise the relative change
/// of the final solution to the next value. A critical-time bracket is
/// reported when a run ends in patch breakdown after a successful one.
/// Returns kExitConfig for an empty list or an invalid parameter, else kExitOk.
int sweep(const RunConfig& cfg, const std::string& parameter, const std::vector<double>& values,
          const std::string& out_dir, std::ostream& log);

/// "0.5" -> "0p5", "1" -> "1", "1e-05" -> "1em05".
std::string time_tag(double t);

/// Writes content to path through a temporary file and a rename.
void write_atomic(const std::string& path, const std::string& content);

}  // namespace riccati
