#pragma once

#include <string>
#include <vector>

#include "oamspdc/counting.hpp"
#include "oamspdc/errors.hpp"

namespace oamspdc {

/// Rectangular map of values on grid-node centers, row-major
/// (v[iy * x.size() + ix]). Axes are ascending.
struct MapGrid {
    std::vector<double> x;
    std::vector<double> y;
    std::vector<double> v;

    std::size_t nx() const { return x.size(); }
    std::size_t ny() const { return y.size(); }
    double at(std::size_t ix, std::size_t iy) const { return v[iy * x.size() + ix]; }
    double& at(std::size_t ix, std::size_t iy) { return v[iy * x.size() + ix]; }
};

struct GaussianSpot {
    double amplitude = 0.0; // counts
    double x = 0.0;         // cm
    double y = 0.0;         // cm
    double sigma_x = 0.0;   // cm
    double sigma_y = 0.0;   // cm
};

/// Two elliptical Gaussians plus a shared flat offset fitted to a
/// coincidence map. spots[0] is the higher-y spot. delta_y0 is the offset of
/// one spot from the symmetry axis: half the |y| separation of the centers.
struct TwoSpotFit {
    GaussianSpot spots[2];
    double offset = 0.0;
    double residual_ss = 0.0;
    int iterations = 0;
    double delta_y0 = 0.0;
};

/// Nonlinear least squares failed to converge; carries the last iterate.
class FitDiverged : public SpdcError {
public:
    FitDiverged(const std::string& msg, TwoSpotFit last)
        : SpdcError(ErrorClass::Sampling, msg), last_(last) {}
    const TwoSpotFit& last_iterate() const { return last_; }

private:
    TwoSpotFit last_;
};

struct FitOptions {
    int max_iterations = 200;
    double relative_tolerance = 1e-8; // on the residual-sum change
};

/// Damped (Levenberg-style) nonlinear least squares of two elliptical
/// Gaussians plus a constant offset, initialized from the two highest
/// smoothed local maxima. A single-peak map (unsplit spot) converges to
/// coincident centers. Throws NoSignal when no maximum rises above the noise
/// floor and FitDiverged on non-convergence.
TwoSpotFit fit_two_spots(const MapGrid& map, const FitOptions& options = {});

/// Pump charge from the split-spot geometry through the constant of motion:
/// l = (z_R/k_P) (k_s sin th0)^2 [ (1 - sqrt(1 - dy0^2/R^2))^2
///                                 + (dy0 / (R cos th0))^2 ].
/// Returns a real; rounding to the nearest integer is the caller's step.
/// Throws GeometryViolation unless 0 <= dy0 < R.
double infer_l(double delta_y0, double ring_radius, double theta0, double k_signal,
               double k_pump, double rayleigh);

/// Squared magnitude of the transverse-momentum sum,
/// (q_sx + q_ix)^2 + (q_sy + q_iy)^2.
double constant_of_motion(double q_sx, double q_sy, double q_ix, double q_iy);

/// Accidental triple rate (R_ctop R_bot + R_cbot R_top) tau / 2.
double accidental_rate(double r_ctop, double r_bot, double r_cbot, double r_top, double tau_s);

/// Semiclassical triple prediction R_ctop R_cbot / R_trig.
/// Throws DivisionByZeroRate when r_trig is zero.
double semiclassical_triple_rate(double r_ctop, double r_cbot, double r_trig);

/// Triple-coincidence rate algebra of a counting record. The true rate is
/// the measured rate minus the accidental estimate and may be negative; it
/// is flagged, never clamped.
struct RateSummary {
    double r_trig = 0.0;
    double r_ctop = 0.0;
    double r_cbot = 0.0;
    double r_top = 0.0;
    double r_bot = 0.0;
    double r_triple_measured = 0.0;
    double r_acc = 0.0;
    double r_triple_true = 0.0;
    double r_triple_semiclassical = 0.0;
    double ratio_semiclassical_to_true = 0.0;
    bool ratio_defined = false;
    bool true_rate_negative = false;
};

RateSummary summarize_rates(const CountRecord& record, double tau_s);

} // namespace oamspdc
