#pragma once

#include "pvdrem/drem.hpp"
#include "pvdrem/mpp.hpp"
#include "pvdrem/plant.hpp"
#include "pvdrem/pv_model.hpp"
#include "pvdrem/recovery.hpp"
#include "pvdrem/regressor.hpp"

#include <array>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace pvdrem {

/// Linear environment ramp: both quantities start at their t = 0 values and
/// move by the configured deltas over ramp_duration, then stay.
struct EnvironmentProfile {
    double temperature0 = 308.82;    // [K]
    double irradiance0 = 967.71;     // [W/m^2]
    double delta_temperature = 0.0;  // [K]
    double delta_irradiance = 0.0;   // [W/m^2]
    double ramp_duration = 0.0;      // [s]; 0 means constant

    EnvironmentState at(double t) const;
};

/// Where the simulated array's true parameters come from: the fixed reference
/// vector, or the environment formulas evaluated along the profile.
enum class GroundTruthMode { ReferenceVector, EnvironmentFormulas };

/// How the exponential components a1, a2 are recovered online.
///  - Direct: the closed-form mapping at the smoothed instantaneous pair.
///  - DiodeScale: b2 refit against the measured sweep, b1/b3 from theta.
///  - Amplitudes: (b2, b3) refit against the sweep, b1 from theta.
enum class RecoveryFitMode { Direct, DiodeScale, Amplitudes };

struct ScenarioConfig {
    PlantParams plant;
    ReferenceParams reference;
    EnvironmentProfile environment;
    ControlLaw control = ControlLaw::paper_sec8();
    DremConfig drem;

    double dt = 1e-4;          // integration step [s]
    double horizon = 20.0;     // [s]
    double lambda = 100.0;     // regression filter pole [1/s]
    double gamma_v = 0.5;      // observer gain
    std::array<double, 4> theta0 = {0.01, 0.006, 0.009, 0.001};
    double v_hat0 = 0.0;
    GroundTruthMode truth_mode = GroundTruthMode::ReferenceVector;
    BandgapModel bandgap = BandgapModel::Linear;
    double smoother_pole = 0.0;   // > 0 smooths the recovery measurement pair
    double recovery_pole = 0.5;   // forgetting pole of the diode-scale fit [1/s]
    double observer_params_pole = 0.0;   // > 0 smooths the parameters fed to the
                                         // gradient observer
    RecoveryFitMode recovery_fit = RecoveryFitMode::Direct;
    double log_period = 1e-3;  // [s] between logged rows; log_full logs every step
    bool log_full = false;
    std::string out_dir;       // empty: keep series in memory only
    std::string label = "run";
    double param_error_threshold = 0.01;  // relative, for the time-to metric
    double vstar_band = 0.5;              // [V], for the settle metric

    /// The constant-environment reference scenario.
    static ScenarioConfig paper_sec8();

    /// Temperature ramp: +4 K over 100 s from reference conditions.
    static ScenarioConfig ramp_t4();

    /// Combined ramp: +6 K and +5 W/m^2 over 100 s from reference conditions.
    static ScenarioConfig ramp_t6g5();

    void validate() const;

    /// True lumped parameters at time t for the configured truth mode.
    IVParams truth_at(double t) const;
};

struct SignalRange {
    double min = std::numeric_limits<double>::infinity();
    double max = -std::numeric_limits<double>::infinity();

    void update(double v) {
        if (v < min) min = v;
        if (v > max) max = v;
    }
};

struct RunMetrics {
    std::string label;
    bool success = false;
    std::string diagnostic;

    double final_param_error_abs = 0.0;
    double final_param_error_rel = 0.0;
    double final_vstar_error = 0.0;
    double time_to_param_threshold = -1.0;   // [s]; < 0 means never reached
    double time_to_vstar_band = -1.0;        // [s]; < 0 means never reached
    ExcitationVerdict verdict = ExcitationVerdict::Unexcited;

    SignalRange v_c, current, voltage, control_signal, v_hat;
};

/// One logged row of the closed-loop run.
struct LogRow {
    double t = 0.0;
    double v_c = 0.0, current = 0.0, voltage = 0.0, u = 0.0;
    double y = 0.0;
    std::array<double, 5> omega{};
    double delta = 0.0, excitation_integral = 0.0;
    std::array<double, 5> theta_hat{};
    std::array<double, 5> a_hat{};
    bool a_hat_valid = false;
    double param_error_rel = std::numeric_limits<double>::quiet_NaN();
    double v_hat = 0.0;
    double v_star_true = 0.0;
    double gradient_at_v_hat = 0.0;
};

struct RunArtifacts {
    std::vector<LogRow> rows;
};

/// Integrates plant states and regression filters as one RK4 system so the
/// emitted samples are phase-coherent with the plant.
class CoupledStepper {
public:
    CoupledStepper(const ScenarioConfig& config);

    void advance();   // one dt step

    double time() const { return state_.time; }
    const PlantState& plant_state() const { return state_; }
    const FilterBank& filter_bank() const { return bank_; }
    double control_value() const;
    double current_dot() const;
    RegressionSample sample() const;

private:
    struct StateVector {
        double v_c, current;
        std::array<double, 6> filters;   // xi1..xi5, chi
    };

    StateVector derivatives(double t, const StateVector& x, double* v_hint) const;

    const ScenarioConfig* config_;
    PlantState state_;
    FilterBank bank_;
    IVParams a_now_;
};

/// Runs one scenario; returns metrics and, when artifacts != nullptr, the
/// logged series. Writes CSV logs plus a metrics summary when
/// config.out_dir is set.
RunMetrics run(const ScenarioConfig& config, RunArtifacts* artifacts = nullptr);

/// Runs each configuration in turn and returns the per-run metrics.
std::vector<RunMetrics> sweep(const std::vector<ScenarioConfig>& configs);

/// Renders metrics as an aligned text comparison table.
std::string format_metrics_table(const std::vector<RunMetrics>& metrics);

/// Flat dotted-key config file support. Unknown keys throw domain_error.
ScenarioConfig parse_config_file(const std::string& path);
void apply_override(ScenarioConfig& config, const std::string& key,
                    const std::string& value);

/// Writes the metrics summary as a small JSON file.
void write_metrics_json(const RunMetrics& metrics, const std::string& path);

} // namespace pvdrem
