#include "oamspdc/analysis.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace oamspdc {

namespace {

// Two elliptical Gaussians plus a shared flat offset. The degenerate
// single-peak case is fitted with one Gaussian (n_spots = 1) and reported as
// two coincident half-amplitude spots.
struct Params {
    int n_spots = 2;
    double v[11];

    int size() const { return 5 * n_spots + 1; }
    double& offset() { return v[5 * n_spots]; }
    double offset() const { return v[5 * n_spots]; }
};

double model_value(const Params& p, double x, double y) {
    double f = p.offset();
    for (int s = 0; s < p.n_spots; ++s) {
        const int o = 5 * s;
        const double ex = (x - p.v[o + 1]) / p.v[o + 3];
        const double ey = (y - p.v[o + 2]) / p.v[o + 4];
        f += p.v[o] * std::exp(-0.5 * (ex * ex + ey * ey));
    }
    return f;
}

double residual_ss(const MapGrid& map, const Params& p) {
    double ss = 0.0;
    for (std::size_t iy = 0; iy < map.ny(); ++iy)
        for (std::size_t ix = 0; ix < map.nx(); ++ix) {
            const double r = map.at(ix, iy) - model_value(p, map.x[ix], map.y[iy]);
            ss += r * r;
        }
    return ss;
}

TwoSpotFit to_fit(const Params& p, double ss, int iters) {
    TwoSpotFit fit;
    if (p.n_spots == 2) {
        for (int s = 0; s < 2; ++s) {
            const int o = 5 * s;
            fit.spots[s] = {p.v[o], p.v[o + 1], p.v[o + 2], std::abs(p.v[o + 3]),
                            std::abs(p.v[o + 4])};
        }
        if (fit.spots[0].y < fit.spots[1].y) std::swap(fit.spots[0], fit.spots[1]);
    } else {
        const GaussianSpot half{0.5 * p.v[0], p.v[1], p.v[2], std::abs(p.v[3]),
                                std::abs(p.v[4])};
        fit.spots[0] = half;
        fit.spots[1] = half;
    }
    fit.offset = p.offset();
    fit.residual_ss = ss;
    fit.iterations = iters;
    fit.delta_y0 = 0.5 * std::abs(fit.spots[0].y - fit.spots[1].y);
    return fit;
}

MapGrid box_smooth(const MapGrid& map) {
    MapGrid out = map;
    const std::size_t nx = map.nx(), ny = map.ny();
    for (std::size_t iy = 0; iy < ny; ++iy)
        for (std::size_t ix = 0; ix < nx; ++ix) {
            double sum = 0.0;
            int n = 0;
            for (int dy = -1; dy <= 1; ++dy)
                for (int dx = -1; dx <= 1; ++dx) {
                    const long jx = static_cast<long>(ix) + dx;
                    const long jy = static_cast<long>(iy) + dy;
                    if (jx < 0 || jy < 0 || jx >= static_cast<long>(nx) ||
                        jy >= static_cast<long>(ny))
                        continue;
                    sum += map.at(jx, jy);
                    ++n;
                }
            out.at(ix, iy) = sum / n;
        }
    return out;
}

double median_of(std::vector<double> vals) {
    const std::size_t mid = vals.size() / 2;
    std::nth_element(vals.begin(), vals.begin() + mid, vals.end());
    return vals[mid];
}

struct Peak {
    std::size_t ix, iy;
    double value;
};

std::vector<Peak> find_peaks(const MapGrid& smooth, double floor) {
    std::vector<Peak> peaks;
    const std::size_t nx = smooth.nx(), ny = smooth.ny();
    for (std::size_t iy = 0; iy < ny; ++iy)
        for (std::size_t ix = 0; ix < nx; ++ix) {
            const double v = smooth.at(ix, iy);
            if (v <= floor) continue;
            bool is_max = true;
            for (int dy = -1; dy <= 1 && is_max; ++dy)
                for (int dx = -1; dx <= 1 && is_max; ++dx) {
                    if (dx == 0 && dy == 0) continue;
                    const long jx = static_cast<long>(ix) + dx;
                    const long jy = static_cast<long>(iy) + dy;
                    if (jx < 0 || jy < 0 || jx >= static_cast<long>(nx) ||
                        jy >= static_cast<long>(ny))
                        continue;
                    if (smooth.at(jx, jy) > v) is_max = false;
                }
            if (is_max) peaks.push_back({ix, iy, v});
        }
    std::sort(peaks.begin(), peaks.end(), [](const Peak& a, const Peak& b) {
        if (a.value != b.value) return a.value > b.value;
        if (a.iy != b.iy) return a.iy < b.iy;
        return a.ix < b.ix;
    });
    // suppress shoulders of the same blob: keep peaks at least 3 cells apart
    std::vector<Peak> kept;
    for (const auto& p : peaks) {
        bool close = false;
        for (const auto& k : kept) {
            const double dx = static_cast<double>(p.ix) - static_cast<double>(k.ix);
            const double dy = static_cast<double>(p.iy) - static_cast<double>(k.iy);
            if (dx * dx + dy * dy < 9.0) close = true;
        }
        if (!close) kept.push_back(p);
    }
    return kept;
}

} // namespace

TwoSpotFit fit_two_spots(const MapGrid& map, const FitOptions& options) {
    if (map.nx() < 3 || map.ny() < 3 || map.v.size() != map.nx() * map.ny())
        throw ValidationError("fit needs at least a 3x3 map");

    const MapGrid smooth = box_smooth(box_smooth(map));
    const double med = median_of(smooth.v);
    const double floor = med + 5.0 * std::sqrt(std::max(med, 0.0) + 1.0);
    const std::vector<Peak> peaks = find_peaks(smooth, floor);
    if (peaks.empty()) throw NoSignal("no local maxima above the noise floor");

    const double step_x = map.nx() > 1 ? map.x[1] - map.x[0] : 1.0;
    const double step_y = map.ny() > 1 ? map.y[1] - map.y[0] : 1.0;

    Params p{};
    p.n_spots = peaks.size() >= 2 ? 2 : 1;
    for (int s = 0; s < p.n_spots; ++s) {
        const Peak& pk = peaks[s];
        const int o = 5 * s;
        p.v[o] = std::max(map.at(pk.ix, pk.iy) - med, 1.0);
        p.v[o + 1] = map.x[pk.ix];
        p.v[o + 2] = map.y[pk.iy];
        p.v[o + 3] = 2.0 * step_x;
        p.v[o + 4] = 2.0 * step_y;
    }
    p.offset() = med;

    const int n = p.size();
    double lambda = 1e-3;
    double ss = residual_ss(map, p);
    int iter = 0;
    for (; iter < options.max_iterations; ++iter) {
        Eigen::MatrixXd jtj = Eigen::MatrixXd::Zero(n, n);
        Eigen::VectorXd jtr = Eigen::VectorXd::Zero(n);
        for (std::size_t iy = 0; iy < map.ny(); ++iy)
            for (std::size_t ix = 0; ix < map.nx(); ++ix) {
                const double x = map.x[ix], y = map.y[iy];
                double jac[11];
                double f = p.offset();
                for (int s = 0; s < p.n_spots; ++s) {
                    const int o = 5 * s;
                    const double sx = p.v[o + 3], sy = p.v[o + 4];
                    const double ux = (x - p.v[o + 1]) / sx;
                    const double uy = (y - p.v[o + 2]) / sy;
                    const double g = std::exp(-0.5 * (ux * ux + uy * uy));
                    const double ag = p.v[o] * g;
                    f += ag;
                    jac[o] = g;
                    jac[o + 1] = ag * ux / sx;
                    jac[o + 2] = ag * uy / sy;
                    jac[o + 3] = ag * ux * ux / sx;
                    jac[o + 4] = ag * uy * uy / sy;
                }
                jac[n - 1] = 1.0;
                const double r = map.at(ix, iy) - f;
                for (int a = 0; a < n; ++a) {
                    jtr(a) += jac[a] * r;
                    for (int b = a; b < n; ++b) jtj(a, b) += jac[a] * jac[b];
                }
            }
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < a; ++b) jtj(a, b) = jtj(b, a);

        bool stepped = false;
        for (int tries = 0; tries < 12 && !stepped; ++tries) {
            Eigen::MatrixXd damped = jtj;
            for (int a = 0; a < n; ++a)
                damped(a, a) += lambda * std::max(jtj(a, a), 1e-12);
            const Eigen::VectorXd delta = damped.ldlt().solve(jtr);
            Params trial = p;
            for (int a = 0; a < n; ++a) trial.v[a] += delta(a);
            for (int s = 0; s < p.n_spots; ++s) {
                trial.v[5 * s + 3] = std::max(std::abs(trial.v[5 * s + 3]), 0.1 * step_x);
                trial.v[5 * s + 4] = std::max(std::abs(trial.v[5 * s + 4]), 0.1 * step_y);
            }
            const double trial_ss = residual_ss(map, trial);
            if (std::isfinite(trial_ss) && trial_ss <= ss) {
                const double improvement = (ss - trial_ss) / std::max(ss, 1e-300);
                p = trial;
                ss = trial_ss;
                lambda = std::max(lambda / 3.0, 1e-12);
                stepped = true;
                if (improvement < options.relative_tolerance)
                    return to_fit(p, ss, iter + 1);
            } else {
                lambda *= 9.0;
            }
        }
        if (!stepped) return to_fit(p, ss, iter + 1); // damping saturated at a minimum
    }
    throw FitDiverged("two-spot fit did not converge in " +
                          std::to_string(options.max_iterations) + " iterations",
                      to_fit(p, ss, iter));
}

double infer_l(double delta_y0, double ring_radius, double theta0, double k_signal,
               double k_pump, double rayleigh) {
    if (!(delta_y0 >= 0.0) || !(delta_y0 < ring_radius))
        throw GeometryViolation("spot offset must satisfy 0 <= dy0 < R");
    const double ratio = delta_y0 / ring_radius;
    const double term1 = 1.0 - std::sqrt(1.0 - ratio * ratio);
    const double term2 = delta_y0 / (ring_radius * std::cos(theta0));
    const double ks_sin = k_signal * std::sin(theta0);
    return (rayleigh / k_pump) * ks_sin * ks_sin * (term1 * term1 + term2 * term2);
}

double constant_of_motion(double q_sx, double q_sy, double q_ix, double q_iy) {
    const double sx = q_sx + q_ix;
    const double sy = q_sy + q_iy;
    return sx * sx + sy * sy;
}

double accidental_rate(double r_ctop, double r_bot, double r_cbot, double r_top,
                       double tau_s) {
    return (r_ctop * r_bot + r_cbot * r_top) * tau_s / 2.0;
}

double semiclassical_triple_rate(double r_ctop, double r_cbot, double r_trig) {
    if (r_trig == 0.0) throw DivisionByZeroRate("semiclassical rate needs R_trig > 0");
    return r_ctop * r_cbot / r_trig;
}

RateSummary summarize_rates(const CountRecord& record, double tau_s) {
    RateSummary s;
    s.r_trig = record.rate_trig();
    s.r_ctop = record.rate_ctop();
    s.r_cbot = record.rate_cbot();
    s.r_top = record.rate_top();
    s.r_bot = record.rate_bot();
    s.r_triple_measured = record.rate_triple();
    s.r_acc = accidental_rate(s.r_ctop, s.r_bot, s.r_cbot, s.r_top, tau_s);
    s.r_triple_true = s.r_triple_measured - s.r_acc;
    s.true_rate_negative = s.r_triple_true < 0.0;
    s.r_triple_semiclassical =
        s.r_trig > 0.0 ? semiclassical_triple_rate(s.r_ctop, s.r_cbot, s.r_trig) : 0.0;
    if (s.r_triple_true > 0.0 && s.r_triple_semiclassical > 0.0) {
        s.ratio_semiclassical_to_true = s.r_triple_semiclassical / s.r_triple_true;
        s.ratio_defined = true;
    }
    return s;
}

} // namespace oamspdc
