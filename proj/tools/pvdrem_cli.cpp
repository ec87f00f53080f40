#include "pvdrem/errors.hpp"
#include "pvdrem/harness.hpp"
#include "pvdrem/mpp.hpp"
#include "pvdrem/pv_model.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

namespace {

pvdrem::ScenarioConfig load_config(const std::string& config_path,
                                   const std::string& preset,
                                   const std::vector<std::string>& overrides) {
    pvdrem::ScenarioConfig cfg;
    if (!config_path.empty()) {
        cfg = pvdrem::parse_config_file(config_path);
    } else if (preset == "paper-sec8") {
        cfg = pvdrem::ScenarioConfig::paper_sec8();
    } else if (preset == "ramp-t4") {
        cfg = pvdrem::ScenarioConfig::ramp_t4();
    } else if (preset == "ramp-t6g5") {
        cfg = pvdrem::ScenarioConfig::ramp_t6g5();
    } else if (!preset.empty()) {
        throw pvdrem::domain_error("unknown preset: " + preset);
    } else {
        cfg = pvdrem::ScenarioConfig::paper_sec8();
    }
    for (const auto& kv : overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) {
            throw pvdrem::domain_error("--set wants key=value, got: " + kv);
        }
        pvdrem::apply_override(cfg, kv.substr(0, eq), kv.substr(eq + 1));
    }
    return cfg;
}

void print_metrics(const pvdrem::RunMetrics& m) {
    std::printf("run %s: %s\n", m.label.c_str(), m.success ? "ok" : "FAILED");
    if (!m.diagnostic.empty()) std::printf("  diagnostic: %s\n", m.diagnostic.c_str());
    std::printf("  final |a - a_hat| / |a|  = %.6g\n", m.final_param_error_rel);
    std::printf("  final |V* - V_hat|       = %.6g V\n", m.final_vstar_error);
    std::printf("  time to %s%% param error  = %.3f s\n", "1",
                m.time_to_param_threshold);
    std::printf("  V* settle time           = %.3f s\n", m.time_to_vstar_band);
    std::printf("  excitation verdict       = %s\n", pvdrem::to_string(m.verdict));
    std::printf("  ranges: v_C [%.4g, %.4g]  I [%.4g, %.4g]  V [%.4g, %.4g]  u "
                "[%.4g, %.4g]\n",
                m.v_c.min, m.v_c.max, m.current.min, m.current.max, m.voltage.min,
                m.voltage.max, m.control_signal.min, m.control_signal.max);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"PV array parameter identification and maximum-power tracking"};
    app.require_subcommand(1);

    std::string config_path;
    std::string preset;
    std::string out_dir;
    std::vector<std::string> overrides;
    bool log_full = false;
    unsigned seed = 0;   // reserved; simulation is deterministic

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "flat key=value config file");
        cmd->add_option("--preset", preset,
                        "named preset (paper-sec8, ramp-t4, ramp-t6g5)");
        cmd->add_option("--out", out_dir, "output directory for CSV logs");
        cmd->add_option("--set", overrides, "config override key=value")
            ->take_all();
        cmd->add_flag("--log-full", log_full, "log every integration step");
        cmd->add_option("--seed", seed, "reserved; runs are deterministic");
    };

    auto* cmd_run = app.add_subcommand("run", "simulate one scenario");
    add_common(cmd_run);

    auto* cmd_sweep = app.add_subcommand("sweep", "run a gain sweep");
    add_common(cmd_sweep);
    std::string vary_key = "drem.gain";
    std::vector<double> vary_values;
    cmd_sweep->add_option("--vary", vary_key, "config key to sweep");
    cmd_sweep->add_option("--values", vary_values, "values for the swept key")
        ->required();

    auto* cmd_curve = app.add_subcommand("iv-curve", "tabulate the IV curve");
    add_common(cmd_curve);
    double v_max = 0.0;
    int points = 501;
    std::string curve_out = "iv_curve.csv";
    cmd_curve->add_option("--vmax", v_max, "sweep end (default: open circuit)");
    cmd_curve->add_option("--points", points, "number of grid points");
    cmd_curve->add_option("--file", curve_out, "output CSV path");

    auto* cmd_oracle = app.add_subcommand("mpp-oracle",
                                          "locate the maximum power point");
    add_common(cmd_oracle);

    CLI11_PARSE(app, argc, argv);

    try {
        if (cmd_run->parsed()) {
            auto cfg = load_config(config_path, preset, overrides);
            if (!out_dir.empty()) cfg.out_dir = out_dir;
            cfg.log_full = cfg.log_full || log_full;
            print_metrics(pvdrem::run(cfg));
        } else if (cmd_sweep->parsed()) {
            auto base = load_config(config_path, preset, overrides);
            if (!out_dir.empty()) base.out_dir = out_dir;
            std::vector<pvdrem::ScenarioConfig> configs;
            for (const double v : vary_values) {
                auto cfg = base;
                char value[32];
                std::snprintf(value, sizeof(value), "%g", v);
                pvdrem::apply_override(cfg, vary_key, value);
                cfg.label = base.label + "_" + vary_key + "=" + value;
                configs.push_back(cfg);
            }
            const auto table = pvdrem::sweep(configs);
            std::cout << pvdrem::format_metrics_table(table);
        } else if (cmd_curve->parsed()) {
            const auto cfg = load_config(config_path, preset, overrides);
            const auto a = cfg.truth_at(0.0);
            const double vm = v_max > 0.0 ? v_max : pvdrem::open_circuit_voltage(a);
            std::vector<double> grid(points);
            for (int i = 0; i < points; ++i) {
                grid[i] = vm * static_cast<double>(i) / (points - 1);
            }
            const auto curve = pvdrem::iv_curve(a, grid);
            std::ofstream out(curve_out, std::ios::binary);
            if (!out) throw pvdrem::domain_error("cannot open " + curve_out);
            out << "voltage,current,power\r\n";
            char buf[128];
            for (const auto& pt : curve) {
                std::snprintf(buf, sizeof(buf), "%.12g,%.12g,%.12g\r\n", pt.voltage,
                              pt.current, pt.power);
                out << buf;
            }
            std::printf("wrote %zu points to %s\n", curve.size(), curve_out.c_str());
        } else if (cmd_oracle->parsed()) {
            const auto cfg = load_config(config_path, preset, overrides);
            const auto a = cfg.truth_at(0.0);
            const auto mpp = pvdrem::locate_mpp(a);
            const auto peak = pvdrem::argmax_power(a);
            const auto grad =
                pvdrem::mpp_gradient(pvdrem::MppParams::from_iv(a), mpp.voltage);
            std::printf("gradient root : V* = %.4f V, I* = %.4f A, P* = %.2f W\n",
                        mpp.voltage, mpp.current, mpp.power);
            std::printf("|H(V*)|       = %.3g\n", std::abs(grad.value));
            std::printf("power argmax  : V = %.4f V, P = %.2f W  (surrogate bias "
                        "%.3f V)\n",
                        peak.voltage, peak.power, peak.voltage - mpp.voltage);
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
