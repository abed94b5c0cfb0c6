#pragma once

// Run configuration for the command-line driver. A config is a JSON object;
// every section is optional and falls back to the preset of its model.
//
//   {
//     "model": "conv" | "corr" | "burgers" | "matrix",
//     "grid": {"L": 20, "n": 512},
//     "symbol": [1, 0, 1],                      // c_0 + c_1 ∂x + c_2 ∂x² + ...
//     "g0": {"family": "gaussian", ...},
//     "b": {"kind": "gaussian_density", ...},   // corr only
//     "q0": {"family": "one_plus_gaussian", ...},  // burgers only
//     "blocks": {"k": 2, "m": 2, "seed": 1, "scale": 1.0, "G0": [[...]]},  // matrix only
//     "times": {"t_final": 1, "dt": 1e-3, "query": [0.5, 1]},
//     "toggles": {"oracle": false, "general_path": false, "det2_stride": 10},
//     "oracle": {"dt": 1e-3, "tolerance": 1e-3, "scheme": "stencil", "stencil_order": 4},
//     "residual_h": 1e-3,
//     "output_dir": "out"
//   }
//
// Unknown keys, and sections that do not apply to the model, are rejected.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "riccati/errors.hpp"
#include "riccati/matrix_riccati.hpp"
#include "riccati/models.hpp"

namespace riccati {

/// Malformed or inconsistent configuration.
class ConfigError : public InvalidInput {
public:
    using InvalidInput::InvalidInput;
};

enum class ModelKind { Matrix, Conv, Corr, Burgers };

std::string to_string(ModelKind kind);
/// Throws ConfigError on an unknown name.
ModelKind parse_model_kind(const std::string& name);

/// Named analytic family for g0 or q0. Unused parameters keep their defaults.
struct ProfileSpec {
    std::string family;
    double amplitude = 1.0;
    double width = 1.0;
    double center = 0.0;
    double k0 = 0.0;      // single_mode
    double value = 1.0;   // single_mode (mode value), constant
    double epsilon = 0.1; // one_plus_gaussian
    std::string path;     // csv
};

struct CouplingSpec {
    std::string kind = "one";
    double value = 1.0;
    double sigma = 0.01;
    double mean = 0.0;
};

struct BlocksSpec {
    int k = 2;
    int m = 2;
    std::uint64_t seed = 1;
    double scale = 1.0;
    /// Explicit blocks; all four or none.
    std::optional<Eigen::MatrixXd> A, B, C, D;
    /// (m×k); zero when absent.
    std::optional<Eigen::MatrixXd> G0;
};

struct TimesSpec {
    double t_final = 1.0;
    double dt = 1e-3;
    /// Ascending, within [0, t_final]. Defaults to {t_final}.
    std::vector<double> query;
};

struct TogglesSpec {
    bool oracle = false;
    bool general_path = false;
    int det2_stride = 10;
};

struct OracleSpec {
    double dt = 1e-3;
    double tolerance = 1e-3;
    std::string scheme = "stencil";  // conv only: stencil | spectral
    int stencil_order = 4;
};

struct RunConfig {
    ModelKind model = ModelKind::Conv;
    double L = 20.0;
    int n = 512;
    std::vector<double> symbol{1.0, 0.0, 1.0};
    ProfileSpec g0;
    CouplingSpec b;
    ProfileSpec q0;
    BlocksSpec blocks;
    TimesSpec times;
    TogglesSpec toggles;
    OracleSpec oracle;
    double residual_h = 1e-3;
    std::string output_dir = "out";
};

/// Built-in configuration of a model; the named presets of the CLI.
RunConfig preset(ModelKind kind);

/// Overlays the JSON document on the preset of its model and validates.
/// Throws ConfigError.
RunConfig parse_config(const nlohmann::json& doc);
/// Reads and parses a config file. Throws ConfigError.
RunConfig load_config(const std::filesystem::path& path);

/// Full normalized config; parse_config(to_json(c)) reproduces c.
nlohmann::json to_json(const RunConfig& cfg);

/// Semantic checks that do not need any model data. Throws ConfigError.
void validate(const RunConfig& cfg);

/// Sets a numeric field by dotted path ("times.dt", "grid.n", "g0.amplitude").
/// "t" sets t_final and the query list to {value}; "dt" is times.dt.
/// Throws ConfigError for unknown paths.
void set_parameter(RunConfig& cfg, const std::string& path, double value);

// Model construction. Each validates its inputs and throws ConfigError
// (or NonPositiveQ for q0) before any computation.
Grid1D make_grid(const RunConfig& cfg);
ConvModel make_conv_model(const RunConfig& cfg);
CorrModel make_corr_model(const RunConfig& cfg);
BurgersModel make_burgers_model(const RunConfig& cfg);
BlockSystem make_block_system(const RunConfig& cfg);
Eigen::MatrixXcd make_matrix_g0(const RunConfig& cfg);

}  // namespace riccati
