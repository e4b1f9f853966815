#pragma once

#include <optional>
#include <string>

#include "oamspdc/biphoton.hpp"
#include "oamspdc/counting.hpp"

namespace oamspdc {

enum class Experiment { Scan, Triple, Analyze, Full };

/// Experiment configuration. Parsed from a flat key = value file where every
/// dimensioned key carries an explicit unit suffix; unset keys fall back to
/// the defaults below, which reproduce the reference bench (351.1 nm pump on
/// a 2 mm type-I crystal, ring radius 3.7 cm, gated counting). Derived
/// quantities (waist, pump index, detector distance, gate window, split-spot
/// detector positions) are filled by finalize() and echoed in the defaults
/// dump of every run.
struct RunConfig {
    std::optional<Experiment> experiment;
    std::uint64_t seed = 1;
    int workers = 0; // 0 = hardware concurrency
    std::string out_dir = "out";

    int pump_l = 4;
    int pump_p = 0;
    double pump_wavelength_cm = 351.1e-7;
    std::optional<double> pump_zr_cm;   // in-crystal Rayleigh range
    std::optional<double> pump_w0_cm;   // alternative parametrization
    double k_pump = 2.9719e5;           // 1/cm
    double k_signal = 1.4897e5;         // 1/cm

    double crystal_length_cm = 0.2;
    double n_signal = 1.6648;
    std::optional<double> n_pump;       // default k_P lambda_P / (2 pi)
    double cut_theta_rad = 35.2 * 3.14159265358979323846 / 180.0;
    double cut_phi_rad = 0.5 * 3.14159265358979323846;

    double ring_radius_cm = 3.7;
    std::optional<double> detector_distance_cm; // default from ring radius

    double fixed_x_cm = -3.7;
    double fixed_y_cm = 0.0;
    double aperture_cm = 175e-4;
    double efficiency = 1.0;
    double dark_rate_hz = 0.0;

    double grid_xmin_cm = 3.25;
    double grid_xmax_cm = 4.09;
    double grid_ymin_cm = -0.90;
    double grid_ymax_cm = 0.90;
    double grid_step_cm = 0.03;
    double grid_dwell_s = 10.0;
    double pair_rate_hz = 2.0e4;

    double gate_trigger_s = 5e-9;
    double gate_pulse_s = 38e-9;
    std::optional<double> gate_window_s; // default 2 x pulse

    PairModel triple_model = PairModel::Quantum;
    double triple_duration_s = 1e4;
    double triple_pair_rate_hz = 564.0;
    double triple_p_top = 4.1 / 564.0;
    double triple_p_bot = 2.7 / 564.0;
    double triple_bg_top_hz = 21474.9;
    double triple_bg_bot_hz = 22483.3;
    double triple_bg_trig_hz = 0.0;
    double triple_aperture_cm = 0.5;
    std::optional<double> triple_top_x_cm, triple_top_y_cm;
    std::optional<double> triple_bot_x_cm, triple_bot_y_cm;

    std::optional<std::string> analyze_input;
    std::optional<double> analyze_radius_cm; // default ring radius
    std::optional<double> analyze_theta_rad; // default ring cone angle

    /// Fills derived defaults and validates ranges. Throws ValidationError.
    void finalize();

    /// Effective-configuration dump, one key = value per line.
    std::string dump() const;
};

/// Strict parse of a flat key-value config file: `#` comments, explicit unit
/// suffixes on dimensioned keys, unknown or duplicate keys are errors (with
/// line numbers). The returned config is finalized.
RunConfig parse_config(const std::string& path);

/// Same parser over an in-memory string (used by tests).
RunConfig parse_config_text(const std::string& text);

/// Builds the simulation scene from a finalized config.
Scene build_scene(const RunConfig& config);

} // namespace oamspdc
