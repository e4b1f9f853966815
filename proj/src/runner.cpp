#include "oamspdc/runner.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace oamspdc {

namespace fs = std::filesystem;

namespace {

std::string fmt6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

void write_atomic(const fs::path& path, const std::string& body) {
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write '" + tmp.string() + "'");
        out << body;
        if (!out) throw IoError("write failed for '" + tmp.string() + "'");
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) throw IoError("cannot rename '" + tmp.string() + "' to '" + path.string() + "'");
}

} // namespace

std::string map_to_csv(const MapGrid& map) {
    std::ostringstream out;
    out << "x_cm,y_cm,value\n";
    for (std::size_t iy = 0; iy < map.ny(); ++iy)
        for (std::size_t ix = 0; ix < map.nx(); ++ix)
            out << fmt6(map.x[ix]) << ',' << fmt6(map.y[iy]) << ',' << fmt6(map.at(ix, iy))
                << '\n';
    return out.str();
}

MapGrid map_from_csv_text(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != "x_cm,y_cm,value")
        throw IoError("map CSV must start with header 'x_cm,y_cm,value'");

    std::vector<double> xs, ys, vs;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        double x, y, v;
        if (std::sscanf(line.c_str(), "%lf,%lf,%lf", &x, &y, &v) != 3)
            throw IoError("map CSV parse error at line " + std::to_string(line_no));
        xs.push_back(x);
        ys.push_back(y);
        vs.push_back(v);
    }
    if (vs.empty()) throw IoError("map CSV has no data rows");

    MapGrid map;
    // row-major with x fastest: the x axis repeats within each y row
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (!map.x.empty() && xs[i] == map.x.front() && i > 0) break;
        map.x.push_back(xs[i]);
    }
    const std::size_t nx = map.x.size();
    if (nx == 0 || xs.size() % nx != 0)
        throw IoError("map CSV is not a rectangular grid");
    const std::size_t ny = xs.size() / nx;
    for (std::size_t iy = 0; iy < ny; ++iy) {
        map.y.push_back(ys[iy * nx]);
        for (std::size_t ix = 0; ix < nx; ++ix) {
            if (xs[iy * nx + ix] != map.x[ix] || ys[iy * nx + ix] != map.y[iy])
                throw IoError("map CSV is not a rectangular grid");
        }
    }
    map.v = std::move(vs);
    return map;
}

MapGrid map_from_csv(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open map CSV '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return map_from_csv_text(buf.str());
}

MapGrid scan_to_map(const ScanResult& scan, int which) {
    MapGrid map;
    const std::size_t nx = scan.grid.nx();
    const std::size_t ny = scan.grid.ny();
    map.x.resize(nx);
    map.y.resize(ny);
    for (std::size_t ix = 0; ix < nx; ++ix) map.x[ix] = scan.grid.x_at(ix);
    for (std::size_t iy = 0; iy < ny; ++iy) map.y[iy] = scan.grid.y_at(iy);
    map.v.resize(nx * ny);
    for (std::size_t i = 0; i < map.v.size(); ++i)
        map.v[i] = static_cast<double>(which == 0 ? scan.records[i].ctop
                                                  : scan.records[i].top);
    return map;
}

std::string rates_report(const RateSummary& s) {
    std::ostringstream out;
    auto put = [&out](const char* key, double v) { out << key << " = " << fmt6(v) << "\n"; };
    put("r_trig", s.r_trig);
    put("r_ctop", s.r_ctop);
    put("r_cbot", s.r_cbot);
    put("r_triple_measured", s.r_triple_measured);
    put("r_top", s.r_top);
    put("r_bot", s.r_bot);
    put("r_acc", s.r_acc);
    put("r_triple_true", s.r_triple_true);
    put("r_triple_semiclassical", s.r_triple_semiclassical);
    out << "true_rate_negative = " << (s.true_rate_negative ? "yes" : "no") << "\n";
    if (s.ratio_defined)
        put("ratio_semiclassical_to_true", s.ratio_semiclassical_to_true);
    else
        out << "ratio_semiclassical_to_true = undefined\n";
    return out.str();
}

std::string fit_report(const TwoSpotFit& fit, double inferred_l) {
    std::ostringstream out;
    for (int i = 0; i < 2; ++i) {
        const GaussianSpot& s = fit.spots[i];
        const std::string p = "spot" + std::to_string(i + 1) + ".";
        out << p << "amplitude = " << fmt6(s.amplitude) << "\n";
        out << p << "x = " << fmt6(s.x) << "\n";
        out << p << "y = " << fmt6(s.y) << "\n";
        out << p << "sigma_x = " << fmt6(s.sigma_x) << "\n";
        out << p << "sigma_y = " << fmt6(s.sigma_y) << "\n";
    }
    out << "offset = " << fmt6(fit.offset) << "\n";
    out << "residual_ss = " << fmt6(fit.residual_ss) << "\n";
    out << "iterations = " << fit.iterations << "\n";
    out << "delta_y0 = " << fmt6(fit.delta_y0) << "\n";
    out << "l_inferred = " << fmt6(inferred_l) << "\n";
    out << "l_rounded = " << fmt6(std::round(inferred_l)) << "\n";
    return out.str();
}

namespace {

void run_analyze(const RunConfig& config, const fs::path& out_dir, const fs::path& map_path,
                 RunArtifacts& artifacts) {
    const MapGrid map = map_from_csv(map_path);
    const TwoSpotFit fit = fit_two_spots(map);
    const double l = infer_l(fit.delta_y0, config.analyze_radius_cm.value(),
                             config.analyze_theta_rad.value(), config.k_signal, config.k_pump,
                             config.pump_zr_cm.value());
    write_atomic(out_dir / "fit.txt", fit_report(fit, l));
    artifacts.files.push_back("fit.txt");
}

} // namespace

RunArtifacts run(const RunConfig& config) {
    if (!config.experiment) throw ValidationError("experiment selector required");
    RunArtifacts artifacts;
    const fs::path out_dir(config.out_dir);
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create output directory '" + out_dir.string() + "'");

    write_atomic(out_dir / "defaults.txt", config.dump());
    artifacts.files.push_back("defaults.txt");

    const Experiment mode = *config.experiment;
    const bool wants_scan = mode == Experiment::Scan || mode == Experiment::Full;
    const bool wants_triple = mode == Experiment::Triple || mode == Experiment::Full;
    const bool wants_analyze = mode == Experiment::Analyze || mode == Experiment::Full;

    if (wants_scan) {
        const Scene scene = build_scene(config);
        const Detector fixed{{config.fixed_x_cm, config.fixed_y_cm}, config.aperture_cm,
                             config.efficiency, config.dark_rate_hz};
        const ScanGrid grid{config.grid_xmin_cm, config.grid_xmax_cm, config.grid_ymin_cm,
                            config.grid_ymax_cm, config.grid_step_cm, config.grid_dwell_s};
        ScanResult scan = simulate_scan(scene, fixed, grid, config.pair_rate_hz,
                                        {config.gate_trigger_s, config.gate_pulse_s,
                                         config.gate_window_s.value()},
                                        config.seed, config.workers);
        artifacts.warnings.insert(artifacts.warnings.end(), scan.warnings.begin(),
                                  scan.warnings.end());
        write_atomic(out_dir / "coincidence_map.csv", map_to_csv(scan_to_map(scan, 0)));
        write_atomic(out_dir / "singles_map.csv", map_to_csv(scan_to_map(scan, 1)));
        artifacts.files.push_back("coincidence_map.csv");
        artifacts.files.push_back("singles_map.csv");
    }

    if (wants_analyze) {
        fs::path map_path;
        if (mode == Experiment::Full) {
            map_path = out_dir / "coincidence_map.csv";
        } else if (config.analyze_input) {
            map_path = *config.analyze_input;
        } else {
            map_path = out_dir / "coincidence_map.csv";
        }
        run_analyze(config, out_dir, map_path, artifacts);
    }

    if (wants_triple) {
        const Scene scene = build_scene(config);
        const GateConfig gates{config.gate_trigger_s, config.gate_pulse_s,
                               config.gate_window_s.value()};
        const Detector trig{{config.fixed_x_cm, config.fixed_y_cm}, config.aperture_cm,
                            config.efficiency, config.triple_bg_trig_hz};
        const Detector top{{config.triple_top_x_cm.value(), config.triple_top_y_cm.value()},
                           config.triple_aperture_cm,
                           std::max(2.0 * config.triple_p_top, 1e-12),
                           config.triple_bg_top_hz};
        const Detector bot{{config.triple_bot_x_cm.value(), config.triple_bot_y_cm.value()},
                           config.triple_aperture_cm,
                           std::max(2.0 * config.triple_p_bot, 1e-12),
                           config.triple_bg_bot_hz};
        const CountRecord record =
            simulate_triple(config.triple_model, scene, trig, top, bot,
                            config.triple_pair_rate_hz, gates, config.triple_duration_s,
                            config.seed);
        const RateSummary summary = summarize_rates(record, config.gate_window_s.value());
        write_atomic(out_dir / "rates.txt", rates_report(summary));
        artifacts.files.push_back("rates.txt");
    }

    return artifacts;
}

} // namespace oamspdc
