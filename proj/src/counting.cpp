#include "oamspdc/counting.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numbers>
#include <thread>

namespace oamspdc {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kMinAcceptance = 1e-4;
constexpr std::uint64_t kAcceptanceProbe = 200000;

double sq(double v) { return v * v; }

// Spacing, in detection-plane radius, between the ring center and the first
// null of the longitudinal weight when only the idler polar angle varies.
double ring_null_spacing(const Scene& scene) {
    const double theta0 = scene.cone_polar();
    const double dkz_null = 2.0 * kPi / scene.crystal().length_cm;
    const double dtheta = dkz_null / (scene.k_signal() * std::sin(theta0));
    const double h = 1e-5;
    const double ns = scene.crystal().n_signal;
    const double d = scene.detector_distance();
    const double dr_dtheta = (internal_to_detection(theta0 + h, 0.0, ns, d).x -
                              internal_to_detection(theta0 - h, 0.0, ns, d).x) /
                             (2.0 * h);
    return dtheta * dr_dtheta;
}

double azimuthal_band(const Scene& scene) {
    const int l = std::abs(scene.pump().charge());
    const double q_ring = scene.k_signal() * std::sin(scene.cone_polar());
    const double q_max = (std::sqrt(2.0 * l) + 6.0) / scene.pump().waist();
    return std::min(kPi, q_max / q_ring);
}

struct ScanProfile {
    // idler-plane integral of |F(s, i)|^2 over i, as a function of the
    // radius of s (rotationally symmetric); linear interpolation between nodes
    double r_lo, r_hi, dr;
    std::vector<double> values;

    double operator()(double r) const {
        if (r <= r_lo) return values.front();
        if (r >= r_hi) return values.back();
        const double t = (r - r_lo) / dr;
        const std::size_t i = std::min(static_cast<std::size_t>(t), values.size() - 2);
        const double f = t - static_cast<double>(i);
        return values[i] * (1.0 - f) + values[i + 1] * f;
    }
};

// Integral of |F(s, i)|^2 over the signal plane for an idler at radius r,
// by Simpson quadrature in polar signal coordinates over the envelope band.
double plane_integral_at_radius(const Scene& scene, const PairEnvelope& env, double r_idler) {
    const PlanePoint idler{r_idler, 0.0};
    const int nr = 48;  // Simpson: even counts, nodes nr+1
    const int na = 96;
    const double dr = (env.r_hi_cm - env.r_lo_cm) / nr;
    const double a_lo = kPi - env.psi_max_rad;
    const double da = 2.0 * env.psi_max_rad / na;
    double sum = 0.0;
    for (int i = 0; i <= nr; ++i) {
        const double rs = env.r_lo_cm + i * dr;
        const double wr = (i == 0 || i == nr) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        double inner = 0.0;
        for (int j = 0; j <= na; ++j) {
            const double phi = a_lo + j * da;
            const double wa = (j == 0 || j == na) ? 1.0 : (j % 2 ? 4.0 : 2.0);
            inner += wa * coincidence_density(scene,
                                              {rs * std::cos(phi), rs * std::sin(phi)}, idler);
        }
        sum += wr * rs * inner;
    }
    return sum * dr * da / 9.0;
}

ScanProfile build_scan_profile(const Scene& scene, const PairEnvelope& env, double r_min,
                               double r_max) {
    ScanProfile prof;
    prof.r_lo = std::max(1e-3, r_min);
    prof.r_hi = std::max(r_max, prof.r_lo + 1e-3);
    const std::size_t n = 161;
    prof.dr = (prof.r_hi - prof.r_lo) / static_cast<double>(n - 1);
    prof.values.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        prof.values[i] = plane_integral_at_radius(scene, env, prof.r_lo + i * prof.dr);
    return prof;
}

// Aperture-averaged conditional density at the grid point: center plus four
// offset samples at ~0.7 aperture radius.
double aperture_density(const Scene& scene, PlanePoint signal, PlanePoint idler,
                        double aperture_radius) {
    const double o = aperture_radius * 0.70710678118654752;
    double sum = coincidence_density(scene, signal, idler);
    sum += coincidence_density(scene, signal, {idler.x + o, idler.y + o});
    sum += coincidence_density(scene, signal, {idler.x - o, idler.y + o});
    sum += coincidence_density(scene, signal, {idler.x + o, idler.y - o});
    sum += coincidence_density(scene, signal, {idler.x - o, idler.y - o});
    return sum / 5.0;
}

} // namespace

std::size_t ScanGrid::nx() const {
    return static_cast<std::size_t>(std::floor((x_max - x_min) / step_cm + 1e-9)) + 1;
}

std::size_t ScanGrid::ny() const {
    return static_cast<std::size_t>(std::floor((y_max - y_min) / step_cm + 1e-9)) + 1;
}

std::vector<std::string> ScanGrid::validate() const {
    if (!std::isfinite(x_min) || !std::isfinite(x_max) || !std::isfinite(y_min) ||
        !std::isfinite(y_max) || !std::isfinite(step_cm))
        throw ValidationError("scan grid bounds must be finite");
    if (!(step_cm > 0.0)) throw ValidationError("scan grid step must be > 0");
    if (!(x_max >= x_min) || !(y_max >= y_min))
        throw ValidationError("scan grid is empty");
    if (!(dwell_s >= 0.0)) throw ValidationError("scan dwell must be >= 0");
    std::vector<std::string> warnings;
    if (step_cm < 1e-3)
        warnings.push_back("scan step below the 10 um stage minimum; positions this fine "
                           "are not mechanically reachable");
    return warnings;
}

PairEnvelope default_pair_envelope(const Scene& scene,
                                   const std::optional<FixedRegion>& fixed_region) {
    PairEnvelope env;
    const double ring = scene.ring_radius();
    // annulus to the second longitudinal null on each side (~95% of the
    // radial mass; the chi-square oracles integrate the same domain)
    const double band = 2.0 * std::abs(ring_null_spacing(scene));
    env.r_lo_cm = std::max(0.05 * ring, ring - band);
    env.r_hi_cm = ring + band;
    env.psi_max_rad = azimuthal_band(scene);

    // Coarse scan of the density over the envelope domain; the margin is
    // checked at sampling time.
    double peak = 0.0;
    const int nr = 20, na = 40;
    const double r0 = fixed_region ? std::hypot(fixed_region->center.x, fixed_region->center.y)
                                   : ring;
    for (int i = 0; i <= nr; ++i) {
        const double rs = fixed_region
                              ? r0
                              : env.r_lo_cm + (env.r_hi_cm - env.r_lo_cm) * i / nr;
        for (int j = 0; j <= nr; ++j) {
            const double ri = env.r_lo_cm + (env.r_hi_cm - env.r_lo_cm) * j / nr;
            for (int k = 0; k <= na; ++k) {
                const double a = -env.psi_max_rad + 2.0 * env.psi_max_rad * k / na;
                const double dens = coincidence_density(
                    scene, {-rs, 0.0}, {ri * std::cos(a), ri * std::sin(a)});
                peak = std::max(peak, dens);
            }
        }
        if (fixed_region) break;
    }
    env.density_cap = 1.5 * peak;
    if (!(env.density_cap > 0.0))
        throw EnvelopeTooLoose("pair density vanishes over the envelope domain");
    return env;
}

namespace detail {

PairSample sample_pair_from(const Scene& scene, const std::optional<FixedRegion>& fixed_region,
                            const PairEnvelope& env, RngStream& rng) {
    const double r_lo2 = sq(env.r_lo_cm);
    const double r_hi2 = sq(env.r_hi_cm);
    std::uint64_t attempts = 0;
    std::uint64_t accepts = 0; // accepted stays 0 until return, counts probe draws only
    while (true) {
        ++attempts;
        PlanePoint s;
        double phi_s;
        if (fixed_region) {
            const double rr = fixed_region->radius_cm * std::sqrt(rng.uniform());
            const double a = 2.0 * kPi * rng.uniform();
            s = {fixed_region->center.x + rr * std::cos(a),
                 fixed_region->center.y + rr * std::sin(a)};
            phi_s = std::atan2(s.y, s.x);
        } else {
            const double rs = std::sqrt(r_lo2 + (r_hi2 - r_lo2) * rng.uniform());
            phi_s = -kPi + 2.0 * kPi * rng.uniform();
            s = {rs * std::cos(phi_s), rs * std::sin(phi_s)};
        }
        const double ri = std::sqrt(r_lo2 + (r_hi2 - r_lo2) * rng.uniform());
        const double phi_i =
            phi_s + kPi + env.psi_max_rad * (2.0 * rng.uniform() - 1.0);
        const PlanePoint i{ri * std::cos(phi_i), ri * std::sin(phi_i)};

        const double dens = coincidence_density(scene, s, i);
        if (dens > env.density_cap)
            throw ValidationError("pair-sampling envelope cap exceeded; envelope invalid");
        if (rng.uniform() * env.density_cap <= dens) {
            ++accepts;
            return {s, i};
        }
        if (attempts >= kAcceptanceProbe &&
            static_cast<double>(accepts) < kMinAcceptance * static_cast<double>(attempts))
            throw EnvelopeTooLoose("pair-sampling acceptance below 1e-4 after " +
                                   std::to_string(attempts) + " attempts");
    }
}

} // namespace detail

PairSample sample_pair(const Scene& scene, const std::optional<FixedRegion>& fixed_region,
                       RngStream& rng) {
    const PairEnvelope env = default_pair_envelope(scene, fixed_region);
    return detail::sample_pair_from(scene, fixed_region, env, rng);
}

ScanResult simulate_scan(const Scene& scene, const Detector& fixed_detector, ScanGrid grid,
                         double pair_rate_hz, const GateConfig& gates, std::uint64_t seed,
                         int workers) {
    fixed_detector.validate();
    gates.validate();
    if (!(pair_rate_hz >= 0.0)) throw ValidationError("pair rate must be >= 0");

    ScanResult result;
    result.grid = grid;
    result.warnings = grid.validate();

    // Reject rasters the refraction mapping cannot invert.
    detection_to_internal({grid.x_min, grid.y_min}, scene.crystal().n_signal,
                          scene.detector_distance());
    detection_to_internal({grid.x_max, grid.y_max}, scene.crystal().n_signal,
                          scene.detector_distance());
    detection_to_internal(fixed_detector.center, scene.crystal().n_signal,
                          scene.detector_distance());

    const std::size_t nx = grid.nx();
    const std::size_t ny = grid.ny();
    result.records.assign(nx * ny, CountRecord{});

    const PairEnvelope env = default_pair_envelope(scene, std::nullopt);
    const double r_fixed = std::hypot(fixed_detector.center.x, fixed_detector.center.y);
    double r_grid_max = 0.0;
    for (const double x : {grid.x_min, grid.x_max})
        for (const double y : {grid.y_min, grid.y_max})
            r_grid_max = std::max(r_grid_max, std::hypot(x, y));
    const ScanProfile profile =
        build_scan_profile(scene, env, std::min(env.r_lo_cm, r_fixed) - 0.05,
                           std::max({env.r_hi_cm, r_grid_max, r_fixed}) + 0.05);

    const double z_fixed = profile(r_fixed); // conditional-density normalizer
    if (!(z_fixed > 0.0) && pair_rate_hz > 0.0)
        throw ValidationError("fixed detector sees no pair flux; place it on the ring");

    const double eta = fixed_detector.quantum_efficiency;
    const double dark = fixed_detector.dark_rate_hz;
    const double ap_radius = 0.5 * fixed_detector.aperture_diameter_cm;
    const double ap_area = kPi * sq(ap_radius);
    const double dwell = grid.dwell_s;

    auto run_point = [&](std::size_t idx) {
        const std::size_t ix = idx % nx;
        const std::size_t iy = idx / nx;
        const PlanePoint center{grid.x_at(ix), grid.y_at(iy)};
        RngStream rng(seed, idx);

        CountRecord rec;
        rec.duration_s = dwell;

        double p_hit = 0.0;
        double mov_rate = dark;
        if (pair_rate_hz > 0.0 && z_fixed > 0.0) {
            const double dens =
                aperture_density(scene, fixed_detector.center, center, ap_radius);
            p_hit = std::min(1.0, dens * ap_area / z_fixed);
            // unconditioned pair flux through the movable aperture, by the
            // exchange symmetry of the density
            mov_rate += pair_rate_hz * (profile(std::hypot(center.x, center.y)) / z_fixed) * eta;
        }

        const std::uint64_t n_pairs = rng.poisson(pair_rate_hz * dwell);
        const std::uint64_t c_true = rng.binomial(n_pairs, p_hit * eta * eta);

        const double coinc_mean = pair_rate_hz * dwell * p_hit * eta * eta;
        const double fix_rate = pair_rate_hz * eta + dark;
        const double extra_fix_mean = std::max(0.0, fix_rate * dwell - coinc_mean);
        const double extra_mov_mean = std::max(0.0, mov_rate * dwell - coinc_mean);
        const std::uint64_t extra_fix = rng.poisson(extra_fix_mean);
        const std::uint64_t extra_mov = rng.poisson(extra_mov_mean);

        // cross-emission accidentals within the trigger gate, capped so the
        // count ordering invariants hold exactly
        const double acc_mean = (extra_fix_mean / std::max(dwell, 1e-300)) *
                                (extra_mov_mean / std::max(dwell, 1e-300)) * 2.0 *
                                gates.trigger_gate_s * dwell;
        const std::uint64_t acc =
            std::min({rng.poisson(acc_mean), extra_fix, extra_mov});

        rec.trig = c_true + extra_fix;
        rec.top = c_true + extra_mov;
        rec.ctop = c_true + acc;
        rec.validate();
        result.records[idx] = rec;
    };

    const std::size_t total = nx * ny;
    int n_workers = workers > 0 ? workers
                                : static_cast<int>(std::thread::hardware_concurrency());
    if (n_workers < 1) n_workers = 1;
    n_workers = std::min<int>(n_workers, static_cast<int>(total));

    if (n_workers == 1 || dwell == 0.0) {
        for (std::size_t i = 0; i < total; ++i) run_point(i);
    } else {
        std::atomic<std::size_t> cursor{0};
        std::vector<std::thread> pool;
        pool.reserve(n_workers);
        for (int w = 0; w < n_workers; ++w)
            pool.emplace_back([&] {
                while (true) {
                    const std::size_t i = cursor.fetch_add(1);
                    if (i >= total) break;
                    run_point(i);
                }
            });
        for (auto& t : pool) t.join();
    }
    return result;
}

CountRecord simulate_triple(PairModel model, const Scene& scene, const Detector& trig,
                            const Detector& top, const Detector& bot, double pair_rate_hz,
                            const GateConfig& gates, double duration_s, std::uint64_t seed) {
    (void)scene; // statistics are rate-calibrated; the scene fixes the geometry story
    trig.validate();
    top.validate();
    bot.validate();
    gates.validate();
    if (!(pair_rate_hz >= 0.0)) throw ValidationError("pair rate must be >= 0");
    if (!(duration_s >= 0.0)) throw ValidationError("duration must be >= 0");

    const Detector* dets[3] = {&trig, &top, &bot};
    for (int a = 0; a < 3; ++a)
        for (int b = a + 1; b < 3; ++b) {
            const double dist = std::hypot(dets[a]->center.x - dets[b]->center.x,
                                           dets[a]->center.y - dets[b]->center.y);
            if (dist < 0.5 * (dets[a]->aperture_diameter_cm + dets[b]->aperture_diameter_cm))
                throw DetectorOverlap("detector apertures overlap");
        }

    CountRecord rec;
    rec.duration_s = duration_s;
    if (duration_s == 0.0) return rec;

    const double dt = gates.pulse_width_s;
    const double eta_trig = trig.quantum_efficiency;
    const double p_top = 0.5 * top.quantum_efficiency; // net per-emission arm probability
    const double p_bot = 0.5 * bot.quantum_efficiency;

    RngStream em_rng(seed, 0);
    RngStream trig_bg_rng(seed, 1);
    RngStream top_bg_rng(seed, 2);
    RngStream bot_bg_rng(seed, 3);

    const double inf = std::numeric_limits<double>::infinity();
    auto first = [&](RngStream& r, double rate) {
        return rate > 0.0 ? r.exponential(rate) : inf;
    };
    double t_em = pair_rate_hz > 0.0 ? em_rng.exponential(pair_rate_hz) : inf;
    double t_bg_trig = first(trig_bg_rng, trig.dark_rate_hz);
    double t_bg_top = first(top_bg_rng, top.dark_rate_hz);
    double t_bg_bot = first(bot_bg_rng, bot.dark_rate_hz);

    double last_top = -inf, last_bot = -inf;
    bool top_live = false, bot_live = false;

    auto latch = [&](double t) {
        ++rec.trig;
        const bool p_hit = top_live && (t - last_top <= dt);
        const bool s_hit = bot_live && (t - last_bot <= dt);
        if (p_hit) {
            ++rec.ctop;
            top_live = false; // each arm pulse latches at most one trigger
        }
        if (s_hit) {
            ++rec.cbot;
            bot_live = false;
        }
        if (p_hit && s_hit) ++rec.triple;
    };

    while (true) {
        // arm/background channels first so simultaneous onsets are visible
        // to the trigger latch
        const double t_min = std::min({t_em, t_bg_trig, t_bg_top, t_bg_bot});
        if (t_min > duration_s || t_min == inf) break;

        if (t_bg_top == t_min) {
            ++rec.top;
            last_top = t_min;
            top_live = true;
            t_bg_top += top_bg_rng.exponential(top.dark_rate_hz);
        } else if (t_bg_bot == t_min) {
            ++rec.bot;
            last_bot = t_min;
            bot_live = true;
            t_bg_bot += bot_bg_rng.exponential(bot.dark_rate_hz);
        } else if (t_bg_trig == t_min) {
            latch(t_min);
            t_bg_trig += trig_bg_rng.exponential(trig.dark_rate_hz);
        } else {
            const bool trig_detected = em_rng.uniform() < eta_trig;
            bool top_hit;
            bool bot_hit;
            if (model == PairModel::Quantum) {
                // the idler lands in exactly one arm of the split state
                const double u = em_rng.uniform();
                top_hit = u < p_top;
                bot_hit = !top_hit && u < p_top + p_bot;
            } else {
                top_hit = em_rng.uniform() < p_top;
                bot_hit = em_rng.uniform() < p_bot;
            }
            if (top_hit) {
                ++rec.top;
                last_top = t_min;
                top_live = true;
            }
            if (bot_hit) {
                ++rec.bot;
                last_bot = t_min;
                bot_live = true;
            }
            if (trig_detected) latch(t_min);
            t_em += em_rng.exponential(pair_rate_hz);
        }
    }
    rec.validate();
    return rec;
}

std::uint64_t window_coincidence(std::span<const double> a, std::span<const double> b,
                                 double window_s) {
    if (!(window_s >= 0.0)) throw ValidationError("coincidence window must be >= 0");
    const double half = 0.5 * window_s; // pulse width; overlap iff |ta - tb| <= half
    std::size_t i = 0, j = 0;
    std::uint64_t count = 0;
    double prev_a = -std::numeric_limits<double>::infinity();
    double prev_b = prev_a;
    while (i < a.size() && j < b.size()) {
        if (a[i] < prev_a) throw SortOrderViolation("first event stream is not sorted");
        if (b[j] < prev_b) throw SortOrderViolation("second event stream is not sorted");
        prev_a = a[i];
        prev_b = b[j];
        const double delta = a[i] - b[j];
        if (std::abs(delta) <= half) {
            ++count;
            ++i;
            ++j;
        } else if (delta < 0.0) {
            ++i;
        } else {
            ++j;
        }
    }
    for (; i < a.size(); ++i) {
        if (a[i] < prev_a) throw SortOrderViolation("first event stream is not sorted");
        prev_a = a[i];
    }
    for (; j < b.size(); ++j) {
        if (b[j] < prev_b) throw SortOrderViolation("second event stream is not sorted");
        prev_b = b[j];
    }
    return count;
}

} // namespace oamspdc
