#include "oamspdc/phasematch.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace oamspdc {

namespace {
constexpr double kPi = std::numbers::pi;

double wrap_to_pi(double phi) {
    double w = std::remainder(phi, 2.0 * kPi);
    if (w == kPi) w = -kPi; // remainder lands in [-pi, pi]; fold the top edge
    return w;
}
} // namespace

WaveVector::WaveVector(double magnitude, double polar_rad, double azimuth_rad)
    : k_(magnitude), theta_(polar_rad), phi_(wrap_to_pi(azimuth_rad)) {
    if (!(k_ > 0.0)) throw ValidationError("wavevector magnitude must be > 0");
    if (!(theta_ >= 0.0 && theta_ <= kPi))
        throw ValidationError("wavevector polar angle must lie in [0, pi]");
}

double WaveVector::x() const { return k_ * std::sin(theta_) * std::cos(phi_); }
double WaveVector::y() const { return k_ * std::sin(theta_) * std::sin(phi_); }
double WaveVector::z() const { return k_ * std::cos(theta_); }

double degenerate_polar_angle(double k_pump, double k_signal, double crystal_length_cm) {
    if (!(k_pump > 0.0) || !(k_signal > 0.0))
        throw ValidationError("wavevector magnitudes must be > 0");
    if (!(crystal_length_cm > 0.0))
        throw ValidationError("crystal length must be > 0");
    const double longitudinal = std::isinf(crystal_length_cm) ? 0.0 : 2.0 * kPi / crystal_length_cm;
    const double arg = (k_pump + longitudinal) / (2.0 * k_signal);
    if (arg > 1.0 || arg < -1.0)
        throw NoPhaseMatch("no degenerate phase match: cos(theta) = " + std::to_string(arg));
    return std::acos(arg);
}

double longitudinal_weight(double dkz, double crystal_length_cm) {
    const double x = 0.5 * dkz * crystal_length_cm;
    if (x == 0.0) return 1.0;
    const double s = std::sin(x) / x;
    return s * s;
}

double split_spot_aperture(int l, double theta, double k_pump, double k_signal,
                           double rayleigh_cm) {
    const double st = std::sin(theta);
    if (st == 0.0) throw ValidationError("split aperture undefined at sin(theta) = 0");
    // cos(dphi) = kP l / (2 ks^2 zR sin^2 theta) - 1; written so l = 0 gives
    // exactly -1 regardless of rounding in the sine.
    const double arg = static_cast<double>(l) * k_pump /
                           (2.0 * k_signal * k_signal * rayleigh_cm * st * st) -
                       1.0;
    if (arg > 1.0 || arg < -1.0)
        throw NoSplitSolution("azimuthal phase-matching equation insoluble: cos(dphi) = " +
                              std::to_string(arg));
    return std::acos(arg);
}

PlanePoint internal_to_detection(double theta_int, double phi, double n_signal,
                                 double distance_cm) {
    if (!(theta_int > 0.0 && theta_int < 0.5 * kPi) && theta_int != 0.0)
        throw ValidationError("internal polar angle must lie in [0, pi/2)");
    if (!(distance_cm > 0.0)) throw ValidationError("detector distance must be > 0");
    const double s_ext = n_signal * std::sin(theta_int);
    if (s_ext >= 1.0)
        throw TotalInternalReflection("n_s sin(theta) = " + std::to_string(s_ext));
    const double rho = distance_cm * std::tan(std::asin(s_ext));
    return {rho * std::cos(phi), rho * std::sin(phi)};
}

InternalDirection detection_to_internal(PlanePoint p, double n_signal, double distance_cm) {
    if (!(distance_cm > 0.0)) throw ValidationError("detector distance must be > 0");
    if (!std::isfinite(p.x) || !std::isfinite(p.y))
        throw InvalidDetectionPoint("non-finite detection-plane point");
    const double rho = std::hypot(p.x, p.y);
    const double theta_ext = std::atan(rho / distance_cm);
    const double s_int = std::sin(theta_ext) / n_signal;
    if (!(s_int < 1.0))
        throw InvalidDetectionPoint("point outside the refraction-invertible domain");
    return {std::asin(s_int), std::atan2(p.y, p.x)};
}

} // namespace oamspdc
