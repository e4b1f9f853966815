#include "oamspdc/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include "oamspdc/phasematch.hpp"

namespace oamspdc {

namespace {

constexpr double kPi = std::numbers::pi;

enum class Kind { Plain, Integer, Length, InverseLength, Time, Rate, Angle, Word };

const std::map<std::string, double>& unit_table(Kind kind) {
    static const std::map<std::string, double> length{
        {"nm", 1e-7}, {"um", 1e-4}, {"mm", 0.1}, {"cm", 1.0}, {"m", 100.0}};
    static const std::map<std::string, double> inv_length{
        {"/um", 1e4}, {"/mm", 10.0}, {"/cm", 1.0}, {"/m", 0.01}};
    static const std::map<std::string, double> time{
        {"ns", 1e-9}, {"us", 1e-6}, {"ms", 1e-3}, {"s", 1.0}};
    static const std::map<std::string, double> rate{{"/s", 1.0}};
    static const std::map<std::string, double> angle{
        {"rad", 1.0}, {"mrad", 1e-3}, {"deg", kPi / 180.0}};
    static const std::map<std::string, double> none{};
    switch (kind) {
        case Kind::Length: return length;
        case Kind::InverseLength: return inv_length;
        case Kind::Time: return time;
        case Kind::Rate: return rate;
        case Kind::Angle: return angle;
        default: return none;
    }
}

struct KeyEntry {
    Kind kind;
    std::function<void(RunConfig&, double)> set_number;
    std::function<void(RunConfig&, const std::string&, int)> set_word;
};

KeyEntry num_key(Kind kind, std::function<void(RunConfig&, double)> set) {
    return {kind, std::move(set), nullptr};
}

const std::map<std::string, KeyEntry>& key_registry() {
    static const std::map<std::string, KeyEntry> registry = [] {
        std::map<std::string, KeyEntry> r;
        r["experiment"] = {Kind::Word, nullptr, [](RunConfig& c, const std::string& v, int line) {
            if (v == "scan") c.experiment = Experiment::Scan;
            else if (v == "triple") c.experiment = Experiment::Triple;
            else if (v == "analyze") c.experiment = Experiment::Analyze;
            else if (v == "full") c.experiment = Experiment::Full;
            else throw ConfigError("experiment must be scan|triple|analyze|full, got '" + v + "'", line);
        }};
        r["seed"] = num_key(Kind::Integer, [](RunConfig& c, double v) {
            c.seed = static_cast<std::uint64_t>(v);
        });
        r["workers"] = num_key(Kind::Integer, [](RunConfig& c, double v) {
            c.workers = static_cast<int>(v);
        });
        r["out"] = {Kind::Word, nullptr, [](RunConfig& c, const std::string& v, int) {
            c.out_dir = v;
        }};
        r["pump.l"] = num_key(Kind::Integer, [](RunConfig& c, double v) {
            c.pump_l = static_cast<int>(v);
        });
        r["pump.p"] = num_key(Kind::Integer, [](RunConfig& c, double v) {
            c.pump_p = static_cast<int>(v);
        });
        r["pump.wavelength"] = num_key(Kind::Length, [](RunConfig& c, double v) {
            c.pump_wavelength_cm = v;
        });
        r["pump.zr"] = num_key(Kind::Length, [](RunConfig& c, double v) { c.pump_zr_cm = v; });
        r["pump.w0"] = num_key(Kind::Length, [](RunConfig& c, double v) { c.pump_w0_cm = v; });
        r["kp"] = num_key(Kind::InverseLength, [](RunConfig& c, double v) { c.k_pump = v; });
        r["ks"] = num_key(Kind::InverseLength, [](RunConfig& c, double v) { c.k_signal = v; });
        r["crystal.length"] = num_key(Kind::Length, [](RunConfig& c, double v) {
            c.crystal_length_cm = v;
        });
        r["crystal.ns"] = num_key(Kind::Plain, [](RunConfig& c, double v) { c.n_signal = v; });
        r["crystal.np"] = num_key(Kind::Plain, [](RunConfig& c, double v) { c.n_pump = v; });
        r["crystal.cut_theta"] = num_key(Kind::Angle, [](RunConfig& c, double v) {
            c.cut_theta_rad = v;
        });
        r["crystal.cut_phi"] = num_key(Kind::Angle, [](RunConfig& c, double v) {
            c.cut_phi_rad = v;
        });
        r["ring.radius"] = num_key(Kind::Length, [](RunConfig& c, double v) {
            c.ring_radius_cm = v;
        });
        r["detector.distance"] = num_key(Kind::Length, [](RunConfig& c, double v) {
            c.detector_distance_cm = v;
        });
        r["fixed.x"] = num_key(Kind::Length, [](RunConfig& c, double v) { c.fixed_x_cm = v; });
        r["fixed.y"] = num_key(Kind::Length, [](RunConfig& c, double v) { c.fixed_y_cm = v; });
        r["detector.aperture"] = num_key(Kind::Length, [](RunConfig& c, double v) {
            c.aperture_cm = v;
        });
        r["detector.efficiency"] = num_key(Kind::Plain, [](RunConfig& c, double v) {
            c.efficiency = v;
        });
        r["detector.dark"] = num_key(Kind::Rate, [](RunConfig& c, double v) {
            c.dark_rate_hz = v;
        });
        r["grid.xmin"] = num_key(Kind::Length, [](RunConfig& c, double v) { c.grid_xmin_cm = v; });
        r["grid.xmax"] = num_key(Kind::Length, [](RunConfig& c, double v) { c.grid_xmax_cm = v; });
        r["grid.ymin"] = num_key(Kind::Length, [](RunConfig& c, double v) { c.grid_ymin_cm = v; });
        r["grid.ymax"] = num_key(Kind::Length, [](RunConfig& c, double v) { c.grid_ymax_cm = v; });
        r["grid.step"] = num_key(Kind::Length, [](RunConfig& c, double v) { c.grid_step_cm = v; });
        r["grid.dwell"] = num_key(Kind::Time, [](RunConfig& c, double v) { c.grid_dwell_s = v; });
        r["rates.pair"] = num_key(Kind::Rate, [](RunConfig& c, double v) { c.pair_rate_hz = v; });
        r["gates.trigger"] = num_key(Kind::Time, [](RunConfig& c, double v) {
            c.gate_trigger_s = v;
        });
        r["gates.pulse"] = num_key(Kind::Time, [](RunConfig& c, double v) { c.gate_pulse_s = v; });
        r["gates.window"] = num_key(Kind::Time, [](RunConfig& c, double v) {
            c.gate_window_s = v;
        });
        r["triple.model"] = {Kind::Word, nullptr, [](RunConfig& c, const std::string& v, int line) {
            if (v == "quantum") c.triple_model = PairModel::Quantum;
            else if (v == "semiclassical") c.triple_model = PairModel::Semiclassical;
            else throw ConfigError("triple.model must be quantum|semiclassical, got '" + v + "'", line);
        }};
        r["triple.duration"] = num_key(Kind::Time, [](RunConfig& c, double v) {
            c.triple_duration_s = v;
        });
        r["triple.pair_rate"] = num_key(Kind::Rate, [](RunConfig& c, double v) {
            c.triple_pair_rate_hz = v;
        });
        r["triple.p_top"] = num_key(Kind::Plain, [](RunConfig& c, double v) {
            c.triple_p_top = v;
        });
        r["triple.p_bot"] = num_key(Kind::Plain, [](RunConfig& c, double v) {
            c.triple_p_bot = v;
        });
        r["triple.bg_top"] = num_key(Kind::Rate, [](RunConfig& c, double v) {
            c.triple_bg_top_hz = v;
        });
        r["triple.bg_bot"] = num_key(Kind::Rate, [](RunConfig& c, double v) {
            c.triple_bg_bot_hz = v;
        });
        r["triple.bg_trig"] = num_key(Kind::Rate, [](RunConfig& c, double v) {
            c.triple_bg_trig_hz = v;
        });
        r["triple.aperture"] = num_key(Kind::Length, [](RunConfig& c, double v) {
            c.triple_aperture_cm = v;
        });
        r["triple.top.x"] = num_key(Kind::Length, [](RunConfig& c, double v) {
            c.triple_top_x_cm = v;
        });
        r["triple.top.y"] = num_key(Kind::Length, [](RunConfig& c, double v) {
            c.triple_top_y_cm = v;
        });
        r["triple.bot.x"] = num_key(Kind::Length, [](RunConfig& c, double v) {
            c.triple_bot_x_cm = v;
        });
        r["triple.bot.y"] = num_key(Kind::Length, [](RunConfig& c, double v) {
            c.triple_bot_y_cm = v;
        });
        r["analyze.input"] = {Kind::Word, nullptr, [](RunConfig& c, const std::string& v, int) {
            c.analyze_input = v;
        }};
        r["analyze.radius"] = num_key(Kind::Length, [](RunConfig& c, double v) {
            c.analyze_radius_cm = v;
        });
        r["analyze.theta"] = num_key(Kind::Angle, [](RunConfig& c, double v) {
            c.analyze_theta_rad = v;
        });
        return r;
    }();
    return registry;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

void require(bool cond, const std::string& msg) {
    if (!cond) throw ValidationError(msg);
}

std::string format_number(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

} // namespace

RunConfig parse_config_text(const std::string& text) {
    RunConfig config;
    std::set<std::string> seen;
    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const auto hash = raw.find('#');
        if (hash != std::string::npos) raw.erase(hash);
        const std::string line = trim(raw);
        if (line.empty()) continue;

        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("expected 'key = value', got '" + line + "'", line_no);
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError("empty key", line_no);
        if (value.empty()) throw ConfigError("empty value for key '" + key + "'", line_no);

        const auto it = key_registry().find(key);
        if (it == key_registry().end())
            throw ConfigError("unknown key '" + key + "'", line_no);
        if (!seen.insert(key).second)
            throw ConfigError("duplicate key '" + key + "'", line_no);
        const KeyEntry& entry = it->second;

        if (entry.kind == Kind::Word) {
            entry.set_word(config, value, line_no);
            continue;
        }

        std::istringstream vs(value);
        std::string num_tok, unit_tok, extra_tok;
        vs >> num_tok >> unit_tok;
        if (vs >> extra_tok)
            throw ConfigError("trailing tokens after value for key '" + key + "'", line_no);

        double number = 0.0;
        try {
            std::size_t pos = 0;
            number = std::stod(num_tok, &pos);
            if (pos != num_tok.size()) throw std::invalid_argument("");
        } catch (const std::exception&) {
            throw ConfigError("key '" + key + "': cannot parse number '" + num_tok + "'",
                              line_no);
        }

        if (entry.kind == Kind::Plain || entry.kind == Kind::Integer) {
            if (!unit_tok.empty())
                throw ConfigError("key '" + key + "' is dimensionless; drop the unit '" +
                                      unit_tok + "'",
                                  line_no);
            if (entry.kind == Kind::Integer && number != std::floor(number))
                throw ConfigError("key '" + key + "' must be an integer", line_no);
        } else {
            const auto& units = unit_table(entry.kind);
            if (unit_tok.empty())
                throw ConfigError("key '" + key + "' needs a unit suffix", line_no);
            const auto u = units.find(unit_tok);
            if (u == units.end())
                throw ConfigError("key '" + key + "': unknown unit '" + unit_tok + "'",
                                  line_no);
            number *= u->second;
        }
        entry.set_number(config, number);
    }
    config.finalize();
    if (!config.experiment)
        throw ValidationError("experiment selector required (experiment = scan|triple|analyze|full)");
    return config;
}

RunConfig parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigIoError("cannot open config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

void RunConfig::finalize() {
    require(pump_l >= 0, "pump.l must be >= 0");
    require(pump_p >= 0 && pump_p <= 2, "pump.p must lie in 0..2");
    require(pump_wavelength_cm > 0, "pump.wavelength must be > 0");
    require(k_pump > 0 && k_signal > 0, "kp and ks must be > 0");
    require(k_pump < 2.0 * k_signal, "kp must be below 2 ks for a degenerate cone");
    require(crystal_length_cm > 0, "crystal.length must be > 0");
    require(n_signal >= 1.0, "crystal.ns must be >= 1");
    require(ring_radius_cm > 0, "ring.radius must be > 0");
    require(aperture_cm > 0, "detector.aperture must be > 0");
    require(efficiency > 0.0 && efficiency <= 1.0, "detector.efficiency must lie in (0, 1]");
    require(dark_rate_hz >= 0, "detector.dark must be >= 0");
    require(grid_step_cm > 0, "grid.step must be > 0");
    require(grid_xmax_cm >= grid_xmin_cm && grid_ymax_cm >= grid_ymin_cm,
            "grid bounds are empty");
    require(grid_dwell_s >= 0, "grid.dwell must be >= 0");
    require(pair_rate_hz >= 0, "rates.pair must be >= 0");
    require(gate_trigger_s > 0 && gate_pulse_s > 0, "gate times must be > 0");
    require(triple_duration_s >= 0, "triple.duration must be >= 0");
    require(triple_pair_rate_hz >= 0, "triple.pair_rate must be >= 0");
    require(triple_p_top >= 0 && triple_p_top <= 0.5, "triple.p_top must lie in [0, 0.5]");
    require(triple_p_bot >= 0 && triple_p_bot <= 0.5, "triple.p_bot must lie in [0, 0.5]");
    require(triple_bg_top_hz >= 0 && triple_bg_bot_hz >= 0 && triple_bg_trig_hz >= 0,
            "triple background rates must be >= 0");
    require(triple_aperture_cm > 0, "triple.aperture must be > 0");

    if (pump_w0_cm && pump_zr_cm)
        throw ValidationError("give either pump.w0 or pump.zr, not both");
    if (!pump_w0_cm && !pump_zr_cm) pump_zr_cm = 0.5;
    if (pump_w0_cm) {
        require(*pump_w0_cm > 0, "pump.w0 must be > 0");
        pump_zr_cm = 0.5 * k_pump * (*pump_w0_cm) * (*pump_w0_cm);
    } else {
        require(*pump_zr_cm > 0, "pump.zr must be > 0");
        pump_w0_cm = std::sqrt(2.0 * (*pump_zr_cm) / k_pump);
    }

    if (!(crystal_length_cm < *pump_zr_cm))
        throw ValidationError("thin-crystal condition violated: crystal.length = " +
                              format_number(crystal_length_cm) + " cm must be below pump.zr = " +
                              format_number(*pump_zr_cm) + " cm");

    if (!n_pump) n_pump = k_pump * pump_wavelength_cm / (2.0 * kPi);
    require(*n_pump >= 1.0, "crystal.np must be >= 1");

    const double theta0 = std::acos(k_pump / (2.0 * k_signal));
    if (!detector_distance_cm) {
        const double s_ext = n_signal * std::sin(theta0);
        if (s_ext >= 1.0)
            throw ValidationError("ring is totally internally reflected; no detector distance");
        detector_distance_cm = ring_radius_cm / std::tan(std::asin(s_ext));
    }
    require(*detector_distance_cm > 0, "detector.distance must be > 0");

    if (!gate_window_s) gate_window_s = 2.0 * gate_pulse_s;
    require(*gate_window_s > 0, "gates.window must be > 0");

    // Split-spot detector positions on the ring, pushed apart when the
    // geometric split is narrower than the apertures.
    if (!triple_top_x_cm || !triple_top_y_cm || !triple_bot_x_cm || !triple_bot_y_cm) {
        double y_off = 0.6 * triple_aperture_cm;
        if (pump_l > 0) {
            try {
                const double dphi = split_spot_aperture(pump_l, theta0, k_pump, k_signal,
                                                        *pump_zr_cm);
                y_off = std::max(y_off, ring_radius_cm * std::sin(kPi - dphi));
            } catch (const NoSplitSolution&) {
                // fall back to the aperture-separated default
            }
        }
        y_off = std::min(y_off, 0.95 * ring_radius_cm);
        const double x_off =
            std::sqrt(std::max(ring_radius_cm * ring_radius_cm - y_off * y_off, 0.0));
        if (!triple_top_x_cm) triple_top_x_cm = x_off;
        if (!triple_top_y_cm) triple_top_y_cm = y_off;
        if (!triple_bot_x_cm) triple_bot_x_cm = x_off;
        if (!triple_bot_y_cm) triple_bot_y_cm = -y_off;
    }

    if (!analyze_radius_cm) analyze_radius_cm = ring_radius_cm;
    if (!analyze_theta_rad) analyze_theta_rad = theta0;
}

std::string RunConfig::dump() const {
    std::ostringstream out;
    auto put = [&out](const std::string& key, const std::string& value) {
        out << key << " = " << value << "\n";
    };
    auto num = [&put](const std::string& key, double v, const char* unit = nullptr) {
        put(key, format_number(v) + (unit ? std::string(" ") + unit : std::string()));
    };

    out << "# effective configuration\n";
    if (experiment) {
        const char* names[] = {"scan", "triple", "analyze", "full"};
        put("experiment", names[static_cast<int>(*experiment)]);
    }
    num("seed", static_cast<double>(seed));
    num("workers", workers);
    put("out", out_dir);
    num("pump.l", pump_l);
    num("pump.p", pump_p);
    num("pump.wavelength", pump_wavelength_cm / 1e-7, "nm");
    num("pump.zr", pump_zr_cm.value_or(0.0), "cm");
    num("pump.w0", pump_w0_cm.value_or(0.0) / 1e-4, "um");
    num("kp", k_pump, "/cm");
    num("ks", k_signal, "/cm");
    num("crystal.length", crystal_length_cm / 0.1, "mm");
    num("crystal.ns", n_signal);
    num("crystal.np", n_pump.value_or(0.0));
    num("crystal.cut_theta", cut_theta_rad / (kPi / 180.0), "deg");
    num("crystal.cut_phi", cut_phi_rad / (kPi / 180.0), "deg");
    num("ring.radius", ring_radius_cm, "cm");
    num("detector.distance", detector_distance_cm.value_or(0.0), "cm");
    num("fixed.x", fixed_x_cm, "cm");
    num("fixed.y", fixed_y_cm, "cm");
    num("detector.aperture", aperture_cm / 1e-4, "um");
    num("detector.efficiency", efficiency);
    num("detector.dark", dark_rate_hz, "/s");
    num("grid.xmin", grid_xmin_cm, "cm");
    num("grid.xmax", grid_xmax_cm, "cm");
    num("grid.ymin", grid_ymin_cm, "cm");
    num("grid.ymax", grid_ymax_cm, "cm");
    num("grid.step", grid_step_cm / 1e-4, "um");
    num("grid.dwell", grid_dwell_s, "s");
    num("rates.pair", pair_rate_hz, "/s");
    num("gates.trigger", gate_trigger_s / 1e-9, "ns");
    num("gates.pulse", gate_pulse_s / 1e-9, "ns");
    num("gates.window", gate_window_s.value_or(0.0) / 1e-9, "ns");
    put("triple.model", triple_model == PairModel::Quantum ? "quantum" : "semiclassical");
    num("triple.duration", triple_duration_s, "s");
    num("triple.pair_rate", triple_pair_rate_hz, "/s");
    num("triple.p_top", triple_p_top);
    num("triple.p_bot", triple_p_bot);
    num("triple.bg_top", triple_bg_top_hz, "/s");
    num("triple.bg_bot", triple_bg_bot_hz, "/s");
    num("triple.bg_trig", triple_bg_trig_hz, "/s");
    num("triple.aperture", triple_aperture_cm, "cm");
    num("triple.top.x", triple_top_x_cm.value_or(0.0), "cm");
    num("triple.top.y", triple_top_y_cm.value_or(0.0), "cm");
    num("triple.bot.x", triple_bot_x_cm.value_or(0.0), "cm");
    num("triple.bot.y", triple_bot_y_cm.value_or(0.0), "cm");
    if (analyze_input) put("analyze.input", *analyze_input);
    num("analyze.radius", analyze_radius_cm.value_or(0.0), "cm");
    num("analyze.theta", analyze_theta_rad.value_or(0.0), "rad");
    return out.str();
}

Scene build_scene(const RunConfig& config) {
    const double lambda_medium = 2.0 * kPi / config.k_pump;
    SceneParams params{
        LaguerreGaussianMode::from_waist(config.pump_l, config.pump_p,
                                         config.pump_w0_cm.value(), lambda_medium),
        Crystal{config.crystal_length_cm, config.n_signal, config.n_pump.value(),
                config.cut_theta_rad, config.cut_phi_rad},
        config.k_pump,
        config.k_signal,
        config.pump_wavelength_cm,
        config.detector_distance_cm.value(),
    };
    return Scene(std::move(params));
}

} // namespace oamspdc
