#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "deflect/dynamics.hpp"
#include "deflect/errors.hpp"
#include "deflect/measurement.hpp"
#include "deflect/propagation.hpp"

namespace deflect {

enum class MeasurementKind { Quadrature, Phase };

struct MeasurementSpec {
    MeasurementKind kind = MeasurementKind::Quadrature;
    QuadratureOutcome q1, q2;  // used when kind == Quadrature
    PhaseOutcome p1, p2;       // used when kind == Phase
};

struct TruncationSpec {
    double tail_tolerance = 1e-10;
    int n_max = -1;  // < 0: derive from tail_tolerance
};

enum class OutputKind { Position, Momentum, FarField };
enum class OutputFormat { Csv, Json };

// A complete, self-contained description of one simulation run.
struct ScenarioConfig {
    std::string label;
    AtomSuperposition atom;
    TwoModeCoherent field;
    CouplingField coupling;
    InteractionParams interaction;
    GaussianBeam beam;
    SpatialGrid grid;
    TruncationSpec truncation;
    MeasurementSpec measurement;
    std::vector<OutputKind> outputs;
    std::optional<PropagationParams> propagation;
    Normalization normalization = Normalization::Raw;
    OutputFormat format = OutputFormat::Csv;
};

// Strict parse: unknown keys, missing keys and type mismatches all raise
// ConfigError with the offending path.
ScenarioConfig config_from_json(const nlohmann::json& doc);
ScenarioConfig config_from_file(const std::string& path);

// Canonical serialization (complex values as [re, im]); hashing this gives
// the output directory name for unlabeled configs.
nlohmann::json config_to_json(const ScenarioConfig& config);

// Cross-field checks beyond parsing: normalized atom state, grid covering
// the beam, momentum only with quadrature conditioning, far_field only with
// propagation parameters, and so on.
void validate_config(const ScenarioConfig& config);

// Photon-number cutoff the run will use.
int resolve_n_max(const ScenarioConfig& config);

struct PresetInfo {
    std::string name;
    std::string description;
};

std::vector<PresetInfo> list_presets();
ScenarioConfig preset_config(const std::string& name);

struct RunResult {
    std::string out_dir;
    std::vector<std::string> files;
    int n_max = 0;
    double retained_mass = 0.0;
};

// Validates, simulates, measures and writes every requested output plus a
// manifest into <out_root>/<label-or-config-hash>/.  Re-runs are
// byte-identical for identical configs.
RunResult run_scenario(const ScenarioConfig& config,
                       const std::string& out_root);

}  // namespace deflect
