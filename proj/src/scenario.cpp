#include "deflect/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <set>
#include <utility>

#include "deflect/io.hpp"
#include "deflect/version.hpp"

namespace deflect {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Escalation threshold for the measurement-weighted truncation tail; the
// measurement layer warns, a scenario run refuses to emit biased data.
constexpr double kTailRatioLimit = 1e-8;

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
    throw ConfigError("config error at '" + path + "': " + msg);
}

// Strict object view: every key must be consumed, leftovers are errors.
class ObjectReader {
public:
    ObjectReader(const json& j, std::string path)
        : obj_(j), path_(std::move(path)) {
        if (!j.is_object()) fail(path_, "expected an object");
    }

    bool has(const std::string& key) const { return obj_.contains(key); }

    const json& require(const std::string& key) {
        if (!obj_.contains(key)) fail(path_, "missing key '" + key + "'");
        seen_.insert(key);
        return obj_.at(key);
    }

    const json* optional(const std::string& key) {
        if (!obj_.contains(key)) return nullptr;
        seen_.insert(key);
        return &obj_.at(key);
    }

    double number(const std::string& key) {
        const json& v = require(key);
        if (!v.is_number()) fail(path_ + "." + key, "expected a number");
        return v.get<double>();
    }

    int integer(const std::string& key) {
        const json& v = require(key);
        if (!v.is_number_integer()) fail(path_ + "." + key, "expected an integer");
        return v.get<int>();
    }

    std::string text(const std::string& key) {
        const json& v = require(key);
        if (!v.is_string()) fail(path_ + "." + key, "expected a string");
        return v.get<std::string>();
    }

    cdouble complex_number(const std::string& key) {
        const json& v = require(key);
        if (v.is_number()) return {v.get<double>(), 0.0};
        if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number())
            return {v[0].get<double>(), v[1].get<double>()};
        fail(path_ + "." + key, "expected a number or [re, im]");
    }

    void finish() {
        for (const auto& item : obj_.items())
            if (!seen_.contains(item.key()))
                fail(path_ + "." + item.key(), "unknown key");
    }

    const std::string& path() const { return path_; }

private:
    const json& obj_;
    std::string path_;
    std::set<std::string> seen_;
};

json complex_to_json(cdouble z) { return json::array({z.real(), z.imag()}); }

std::string output_kind_name(OutputKind kind) {
    switch (kind) {
        case OutputKind::Position: return "position";
        case OutputKind::Momentum: return "momentum";
        case OutputKind::FarField: return "far_field";
    }
    return "?";
}

}  // namespace

ScenarioConfig config_from_json(const json& doc) {
    ScenarioConfig c;
    ObjectReader root(doc, "config");

    if (const json* label = root.optional("label")) {
        if (!label->is_string()) fail("config.label", "expected a string");
        c.label = label->get<std::string>();
    }

    {
        ObjectReader r(root.require("atom"), "config.atom");
        c.atom.a = r.complex_number("a");
        c.atom.b = r.complex_number("b");
        r.finish();
    }
    {
        ObjectReader r(root.require("field"), "config.field");
        c.field.alpha1 = r.complex_number("alpha1");
        c.field.alpha2 = r.complex_number("alpha2");
        r.finish();
    }
    {
        ObjectReader r(root.require("coupling"), "config.coupling");
        c.coupling.g01 = r.number("g01");
        c.coupling.g02 = r.number("g02");
        c.coupling.k1 = r.number("k1");
        c.coupling.k2 = r.number("k2");
        r.finish();
    }
    {
        ObjectReader r(root.require("interaction"), "config.interaction");
        const std::string regime = r.text("regime");
        c.interaction.tau = r.number("tau");
        if (regime == "raman") {
            c.interaction.regime = InteractionRegime::Raman;
            c.interaction.delta = r.number("delta");
        } else if (regime == "off_resonant") {
            c.interaction.regime = InteractionRegime::OffResonant;
            c.interaction.delta1 = r.number("delta1");
            c.interaction.delta2 = r.number("delta2");
        } else {
            fail("config.interaction.regime",
                 "expected \"raman\" or \"off_resonant\"");
        }
        r.finish();
    }
    {
        ObjectReader r(root.require("beam"), "config.beam");
        c.beam.sigma_x = r.number("sigma_x");
        c.beam.sigma_y = r.number("sigma_y");
        c.beam.center_x = r.number("center_x");
        c.beam.center_y = r.number("center_y");
        r.finish();
    }
    {
        ObjectReader r(root.require("grid"), "config.grid");
        c.grid.nx = r.integer("nx");
        c.grid.ny = r.integer("ny");
        c.grid.x_min = r.number("x_min");
        c.grid.x_max = r.number("x_max");
        c.grid.y_min = r.number("y_min");
        c.grid.y_max = r.number("y_max");
        r.finish();
    }
    if (const json* t = root.optional("truncation")) {
        ObjectReader r(*t, "config.truncation");
        if (r.has("tail_tolerance")) c.truncation.tail_tolerance = r.number("tail_tolerance");
        if (r.has("n_max")) c.truncation.n_max = r.integer("n_max");
        r.finish();
    }
    {
        ObjectReader r(root.require("measurement"), "config.measurement");
        const std::string kind = r.text("kind");
        if (kind == "quadrature") {
            c.measurement.kind = MeasurementKind::Quadrature;
            c.measurement.q1 = {r.number("theta1"), r.number("chi1")};
            c.measurement.q2 = {r.number("theta2"), r.number("chi2")};
        } else if (kind == "phase") {
            c.measurement.kind = MeasurementKind::Phase;
            c.measurement.p1 = {r.number("phi1")};
            c.measurement.p2 = {r.number("phi2")};
        } else {
            fail("config.measurement.kind", "expected \"quadrature\" or \"phase\"");
        }
        r.finish();
    }
    {
        const json& outs = root.require("outputs");
        if (!outs.is_array() || outs.empty())
            fail("config.outputs", "expected a non-empty array");
        for (const json& o : outs) {
            if (!o.is_string()) fail("config.outputs", "entries must be strings");
            const std::string name = o.get<std::string>();
            if (name == "position") c.outputs.push_back(OutputKind::Position);
            else if (name == "momentum") c.outputs.push_back(OutputKind::Momentum);
            else if (name == "far_field") c.outputs.push_back(OutputKind::FarField);
            else fail("config.outputs", "unknown output '" + name + "'");
        }
    }
    if (const json* p = root.optional("propagation")) {
        ObjectReader r(*p, "config.propagation");
        c.propagation = PropagationParams{r.number("fresnel_scale")};
        r.finish();
    }
    if (const json* n = root.optional("normalization")) {
        const std::string name = n->is_string() ? n->get<std::string>() : "";
        if (name == "raw") c.normalization = Normalization::Raw;
        else if (name == "unit") c.normalization = Normalization::UnitMass;
        else fail("config.normalization", "expected \"raw\" or \"unit\"");
    }
    if (const json* f = root.optional("format")) {
        const std::string name = f->is_string() ? f->get<std::string>() : "";
        if (name == "csv") c.format = OutputFormat::Csv;
        else if (name == "json") c.format = OutputFormat::Json;
        else fail("config.format", "expected \"csv\" or \"json\"");
    }
    root.finish();
    return c;
}

ScenarioConfig config_from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path);
    json doc;
    try {
        in >> doc;
    } catch (const json::parse_error& e) {
        throw ConfigError("config file " + path + " is not valid JSON: " +
                          e.what());
    }
    return config_from_json(doc);
}

json config_to_json(const ScenarioConfig& c) {
    json doc;
    if (!c.label.empty()) doc["label"] = c.label;
    doc["atom"] = {{"a", complex_to_json(c.atom.a)},
                   {"b", complex_to_json(c.atom.b)}};
    doc["field"] = {{"alpha1", complex_to_json(c.field.alpha1)},
                    {"alpha2", complex_to_json(c.field.alpha2)}};
    doc["coupling"] = {{"g01", c.coupling.g01},
                       {"g02", c.coupling.g02},
                       {"k1", c.coupling.k1},
                       {"k2", c.coupling.k2}};
    json inter;
    inter["tau"] = c.interaction.tau;
    if (c.interaction.regime == InteractionRegime::Raman) {
        inter["regime"] = "raman";
        inter["delta"] = c.interaction.delta;
    } else {
        inter["regime"] = "off_resonant";
        inter["delta1"] = c.interaction.delta1;
        inter["delta2"] = c.interaction.delta2;
    }
    doc["interaction"] = inter;
    doc["beam"] = {{"sigma_x", c.beam.sigma_x},
                   {"sigma_y", c.beam.sigma_y},
                   {"center_x", c.beam.center_x},
                   {"center_y", c.beam.center_y}};
    doc["grid"] = {{"nx", c.grid.nx},     {"ny", c.grid.ny},
                   {"x_min", c.grid.x_min}, {"x_max", c.grid.x_max},
                   {"y_min", c.grid.y_min}, {"y_max", c.grid.y_max}};
    json trunc;
    trunc["tail_tolerance"] = c.truncation.tail_tolerance;
    if (c.truncation.n_max >= 0) trunc["n_max"] = c.truncation.n_max;
    doc["truncation"] = trunc;
    json meas;
    if (c.measurement.kind == MeasurementKind::Quadrature) {
        meas["kind"] = "quadrature";
        meas["theta1"] = c.measurement.q1.theta;
        meas["chi1"] = c.measurement.q1.chi;
        meas["theta2"] = c.measurement.q2.theta;
        meas["chi2"] = c.measurement.q2.chi;
    } else {
        meas["kind"] = "phase";
        meas["phi1"] = c.measurement.p1.phi;
        meas["phi2"] = c.measurement.p2.phi;
    }
    doc["measurement"] = meas;
    json outs = json::array();
    for (OutputKind kind : c.outputs) outs.push_back(output_kind_name(kind));
    doc["outputs"] = outs;
    if (c.propagation)
        doc["propagation"] = {{"fresnel_scale", c.propagation->fresnel_scale}};
    doc["normalization"] =
        c.normalization == Normalization::UnitMass ? "unit" : "raw";
    doc["format"] = c.format == OutputFormat::Json ? "json" : "csv";
    return doc;
}

void validate_config(const ScenarioConfig& c) {
    try {
        c.atom.validate();
        c.coupling.validate();
        c.interaction.validate();
        c.beam.validate();
        c.grid.validate();
        if (c.propagation) c.propagation->validate();
    } catch (const std::domain_error& e) {
        throw ConfigError(e.what());
    }
    if (!(c.truncation.tail_tolerance > 0.0) ||
        !(c.truncation.tail_tolerance < 1.0))
        throw ConfigError("truncation.tail_tolerance must lie in (0, 1)");
    if (c.outputs.empty()) throw ConfigError("outputs must not be empty");
    std::set<OutputKind> seen;
    for (OutputKind kind : c.outputs) {
        if (!seen.insert(kind).second)
            throw ConfigError("duplicate output '" + output_kind_name(kind) + "'");
        if (kind == OutputKind::FarField && !c.propagation)
            throw ConfigError(
                "far_field output needs propagation.fresnel_scale");
        if (kind == OutputKind::Momentum &&
            c.measurement.kind != MeasurementKind::Quadrature)
            throw ConfigError(
                "momentum output is defined for quadrature conditioning only");
    }
    if (c.measurement.kind == MeasurementKind::Quadrature) {
        for (const QuadratureOutcome& q : {c.measurement.q1, c.measurement.q2}) {
            if (!std::isfinite(q.chi))
                throw ConfigError("quadrature outcome chi must be finite");
            if (!(q.theta >= 0.0) || !(q.theta < 2.0 * std::numbers::pi))
                throw ConfigError(
                    "quadrature angle theta must lie in [0, 2 pi)");
        }
    } else {
        if (!std::isfinite(c.measurement.p1.phi) ||
            !std::isfinite(c.measurement.p2.phi))
            throw ConfigError("phase outcome must be finite");
    }
    if (!c.beam.grid_covers(c.grid))
        throw ConfigError(
            "grid must cover the beam to +-4 sigma on both axes");
}

int resolve_n_max(const ScenarioConfig& c) {
    if (c.truncation.n_max >= 0) return c.truncation.n_max;
    try {
        const int n1 =
            truncation_for(c.field.alpha1, c.truncation.tail_tolerance).n_max;
        const int n2 =
            truncation_for(c.field.alpha2, c.truncation.tail_tolerance).n_max;
        return std::max(n1, n2);
    } catch (const std::domain_error& e) {
        throw ConfigError(e.what());
    }
}

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
const double kInvSqrt2 = 1.0 / std::numbers::sqrt2;

ScenarioConfig quadrature_base() {
    ScenarioConfig c;
    c.field = {cdouble{2.0, 0.0}, cdouble{2.0, 0.0}};
    c.coupling = {1.0, 1.0, kTwoPi, kTwoPi};
    c.interaction.regime = InteractionRegime::Raman;
    c.interaction.delta = 1.0;
    c.interaction.tau = 1.0;
    c.beam = {0.2, 0.2, 0.0, 0.0};
    c.grid = {201, 201, -1.25, 1.25, -1.25, 1.25};
    c.measurement.kind = MeasurementKind::Quadrature;
    c.measurement.q1 = {0.0, 4.0};
    c.measurement.q2 = {0.0, 4.0};
    c.outputs = {OutputKind::Position};
    return c;
}

ScenarioConfig phase_base(InteractionRegime regime) {
    ScenarioConfig c;
    c.field = {cdouble{2.0, 0.0}, cdouble{2.0, 0.0}};
    c.coupling = {1.0, 1.0, kTwoPi, kTwoPi};
    c.interaction.regime = regime;
    c.interaction.tau = 1.0;
    if (regime == InteractionRegime::Raman) {
        c.interaction.delta = 1.0;
    } else {
        // Distinct detunings: the point of the dispersive variant.
        c.interaction.delta1 = 1.0;
        c.interaction.delta2 = 1.25;
    }
    c.beam = {0.3, 0.3, 0.0, 0.0};
    c.grid = {201, 201, -1.6, 1.6, -1.6, 1.6};
    c.measurement.kind = MeasurementKind::Phase;
    c.measurement.p1 = {0.0};
    c.measurement.p2 = {0.0};
    c.outputs = {OutputKind::Position};
    return c;
}

struct PresetEntry {
    const char* name;
    const char* description;
    ScenarioConfig (*make)();
};

// sqrt(0.96): the printed 0.98 companion of 0.2 is not normalized; this is
// the nearest state that is.
double b96() { return std::sqrt(0.96); }

const PresetEntry kPresets[] = {
    {"fig2a", "position pattern, atom in -|1>, quadrature outcome chi=4",
     [] { auto c = quadrature_base(); c.atom = {{-1.0, 0.0}, {0.0, 0.0}}; c.label = "fig2a"; return c; }},
    {"fig2b", "position pattern, atom in (-|1>+|2>)/sqrt2, quadrature chi=4",
     [] { auto c = quadrature_base(); c.atom = {{-kInvSqrt2, 0.0}, {kInvSqrt2, 0.0}}; c.label = "fig2b"; return c; }},
    {"fig2c", "position pattern, atom in -0.2|1>+sqrt(.96)|2>, quadrature chi=4",
     [] { auto c = quadrature_base(); c.atom = {{-0.2, 0.0}, {b96(), 0.0}}; c.label = "fig2c"; return c; }},
    {"fig2d", "position pattern, atom in 0.2|1>+sqrt(.96)|2>, quadrature chi=4",
     [] { auto c = quadrature_base(); c.atom = {{0.2, 0.0}, {b96(), 0.0}}; c.label = "fig2d"; return c; }},
    {"fig2e", "position pattern, atom in (|1>+|2>)/sqrt2, quadrature chi=4",
     [] { auto c = quadrature_base(); c.atom = {{kInvSqrt2, 0.0}, {kInvSqrt2, 0.0}}; c.label = "fig2e"; return c; }},
    {"fig2f", "position pattern, atom in |1>, quadrature outcome chi=4",
     [] { auto c = quadrature_base(); c.atom = {{1.0, 0.0}, {0.0, 0.0}}; c.label = "fig2f"; return c; }},
    {"fig3a", "near-field position pattern at the cavity exit, atom in |1>",
     [] { auto c = quadrature_base(); c.atom = {{1.0, 0.0}, {0.0, 0.0}}; c.label = "fig3a"; return c; }},
    {"fig3b", "position pattern after free flight past the cavity, atom in |1>",
     [] {
         auto c = quadrature_base();
         c.atom = {{1.0, 0.0}, {0.0, 0.0}};
         c.outputs = {OutputKind::FarField};
         c.propagation = PropagationParams{0.002};
         c.label = "fig3b";
         return c;
     }},
    {"fig4a", "momentum pattern, atom in (-|1>+|2>)/sqrt2, quadrature chi=4",
     [] {
         auto c = quadrature_base();
         c.atom = {{-kInvSqrt2, 0.0}, {kInvSqrt2, 0.0}};
         c.outputs = {OutputKind::Momentum};
         c.label = "fig4a";
         return c;
     }},
    {"fig4b", "momentum pattern, atom in (|1>+|2>)/sqrt2, quadrature chi=4",
     [] {
         auto c = quadrature_base();
         c.atom = {{kInvSqrt2, 0.0}, {kInvSqrt2, 0.0}};
         c.outputs = {OutputKind::Momentum};
         c.label = "fig4b";
         return c;
     }},
    {"fig5a", "dispersive regime, atom in |1>, phase-state conditioning phi=0",
     [] { auto c = phase_base(InteractionRegime::OffResonant); c.atom = {{1.0, 0.0}, {0.0, 0.0}}; c.label = "fig5a"; return c; }},
    {"fig5b", "dispersive regime, atom in (|1>+|2>)/sqrt2, phase conditioning",
     [] { auto c = phase_base(InteractionRegime::OffResonant); c.atom = {{kInvSqrt2, 0.0}, {kInvSqrt2, 0.0}}; c.label = "fig5b"; return c; }},
    {"fig6a", "Raman resonance, atom in |1>, phase-state conditioning phi=0",
     [] { auto c = phase_base(InteractionRegime::Raman); c.atom = {{1.0, 0.0}, {0.0, 0.0}}; c.label = "fig6a"; return c; }},
    {"fig6b", "Raman resonance, atom in (|1>+|2>)/sqrt2, phase conditioning",
     [] { auto c = phase_base(InteractionRegime::Raman); c.atom = {{kInvSqrt2, 0.0}, {kInvSqrt2, 0.0}}; c.label = "fig6b"; return c; }},
};

}  // namespace

std::vector<PresetInfo> list_presets() {
    std::vector<PresetInfo> out;
    for (const PresetEntry& p : kPresets) out.push_back({p.name, p.description});
    return out;
}

ScenarioConfig preset_config(const std::string& name) {
    for (const PresetEntry& p : kPresets)
        if (name == p.name) return p.make();
    throw ConfigError("unknown preset '" + name + "'; see `deflect presets`");
}

namespace {

std::vector<cdouble> mode_weights(const MeasurementSpec& m, bool first_mode,
                                  int count) {
    if (m.kind == MeasurementKind::Quadrature)
        return quadrature_weights(first_mode ? m.q1 : m.q2, count);
    return phase_weights(first_mode ? m.p1 : m.p2, count);
}

}  // namespace

RunResult run_scenario(const ScenarioConfig& config,
                       const std::string& out_root) {
    validate_config(config);
    const int n_max = resolve_n_max(config);
    const FockTruncation trunc{n_max, config.truncation.tail_tolerance};

    const AmplitudeField field =
        config.interaction.regime == InteractionRegime::Raman
            ? amplitudes_raman(config.atom, config.field, config.coupling,
                               config.interaction, config.beam, config.grid,
                               trunc)
            : amplitudes_offresonant(config.atom, config.field,
                                     config.coupling, config.interaction,
                                     config.beam, config.grid, trunc);

    const json canonical = config_to_json(config);
    const std::string dir_name =
        config.label.empty() ? fnv1a64_hex(canonical.dump()) : config.label;
    const fs::path dir = fs::path(out_root) / dir_name;
    fs::create_directories(dir);

    RunResult result;
    result.out_dir = dir.string();
    result.n_max = n_max;
    result.retained_mass = field.retained_mass();

    auto emit = [&](DistributionGrid dist, const std::string& stem) {
        if (dist.truncation_tail_ratio > kTailRatioLimit)
            throw NumericalGuardError(
                "photon-number cutoff biases '" + stem + "' by " +
                std::to_string(dist.truncation_tail_ratio) +
                " of the measured mass; raise n_max");
        if (config.normalization == Normalization::UnitMass)
            normalize_unit_mass(dist);
        const bool csv = config.format == OutputFormat::Csv;
        const fs::path data = dir / (stem + (csv ? ".csv" : ".json"));
        if (csv)
            write_csv(dist, data.string());
        else
            write_json(distribution_to_json(dist), data.string());
        result.files.push_back(data.string());
        const fs::path image = dir / (stem + ".png");
        write_png(dist, image.string());
        result.files.push_back(image.string());
    };

    for (OutputKind kind : config.outputs) {
        switch (kind) {
            case OutputKind::Position: {
                emit(config.measurement.kind == MeasurementKind::Quadrature
                         ? position_distribution_quadrature(
                               field, config.measurement.q1,
                               config.measurement.q2)
                         : position_distribution_phase(field,
                                                       config.measurement.p1,
                                                       config.measurement.p2),
                     "position");
                break;
            }
            case OutputKind::Momentum: {
                emit(momentum_distribution(field, config.measurement.q1,
                                           config.measurement.q2),
                     "momentum");
                break;
            }
            case OutputKind::FarField: {
                // Conditioning commutes with free flight (both are linear),
                // so propagate the two conditioned channel amplitudes
                // instead of every (n, m) plane.
                const auto w1 = mode_weights(config.measurement, true,
                                             field.n_size());
                const auto w2 = mode_weights(config.measurement, false,
                                             field.m_size());
                const auto sums = conditioned_channel_sums(field, w1, w2);
                const double beta = config.propagation->fresnel_scale;
                DistributionGrid dist;
                if (beta == 0.0) {
                    dist = density_from_channels(field.grid(), sums[0],
                                                 sums[1], AxisKind::Position);
                } else {
                    const SpatialGrid out_grid = far_field_grid(field.grid());
                    std::vector<cdouble> a1(out_grid.npoints());
                    std::vector<cdouble> a2(out_grid.npoints());
                    propagate_plane(field.grid(), sums[0], beta, a1);
                    propagate_plane(field.grid(), sums[1], beta, a2);
                    dist = density_from_channels(out_grid, a1, a2,
                                                 AxisKind::Position);
                }
                dist.truncation_tail_ratio =
                    measurement_tail_ratio(field, w1, w2);
                emit(std::move(dist), "far_field");
                break;
            }
        }
    }

    json manifest;
    manifest["version"] = kVersion;
    manifest["config"] = canonical;
    json resolved;
    resolved["n_max"] = n_max;
    resolved["retained_mass"] = result.retained_mass;
    json files = json::array();
    for (const std::string& f : result.files)
        files.push_back(fs::path(f).filename().string());
    resolved["files"] = files;
    manifest["resolved"] = resolved;
    const fs::path manifest_path = dir / "manifest.json";
    write_json(manifest, manifest_path.string());
    result.files.push_back(manifest_path.string());
    return result;
}

}  // namespace deflect
