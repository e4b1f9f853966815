#include "oamspdc/lgbeam.hpp"

#include <cmath>
#include <numbers>

namespace oamspdc {

namespace {

constexpr double kPi = std::numbers::pi;

// (-i)^|l| * (-1)^p, the Fourier eigenphase of the waist-plane LG mode.
std::complex<double> fourier_eigenphase(int l, int p) {
    static const std::complex<double> quadrant[4] = {
        {1.0, 0.0}, {0.0, -1.0}, {-1.0, 0.0}, {0.0, 1.0}};
    std::complex<double> z = quadrant[std::abs(l) % 4];
    return (p % 2 == 0) ? z : -z;
}

} // namespace

double assoc_laguerre(int p, int a, double x) {
    if (p == 0) return 1.0;
    double lm1 = 1.0;
    double lk = 1.0 + a - x;
    for (int k = 1; k < p; ++k) {
        double next = ((2.0 * k + 1.0 + a - x) * lk - (k + a) * lm1) / (k + 1.0);
        lm1 = lk;
        lk = next;
    }
    return lk;
}

LaguerreGaussianMode::LaguerreGaussianMode(int l, int p, double w0, double lambda)
    : l_(l), p_(p), w0_(w0), lambda_(lambda) {
    if (!(w0 > 0.0)) throw ValidationError("LG mode requires waist > 0");
    if (!(lambda > 0.0)) throw ValidationError("LG mode requires wavelength > 0");
    if (p < 0) throw ValidationError("LG mode requires radial index p >= 0");
    zr_ = kPi * w0_ * w0_ / lambda_;
    // p! / (p+|l|)! as an exact product to avoid factorial overflow.
    double ratio = 1.0;
    for (int k = p_ + 1; k <= p_ + std::abs(l_); ++k) ratio /= static_cast<double>(k);
    norm_ = std::sqrt(2.0 * ratio / kPi) / w0_;
}

LaguerreGaussianMode LaguerreGaussianMode::from_waist(int l, int p, double waist_cm,
                                                      double wavelength_cm) {
    return LaguerreGaussianMode(l, p, waist_cm, wavelength_cm);
}

LaguerreGaussianMode LaguerreGaussianMode::from_rayleigh(int l, int p, double rayleigh_cm,
                                                         double wavelength_cm) {
    if (!(rayleigh_cm > 0.0)) throw ValidationError("LG mode requires Rayleigh range > 0");
    if (!(wavelength_cm > 0.0)) throw ValidationError("LG mode requires wavelength > 0");
    return LaguerreGaussianMode(l, p, std::sqrt(rayleigh_cm * wavelength_cm / kPi),
                                wavelength_cm);
}

std::complex<double> lg_field(const LaguerreGaussianMode& mode, double x_cm, double y_cm) {
    const int labs = std::abs(mode.charge());
    const double w0 = mode.waist();
    const double r2 = x_cm * x_cm + y_cm * y_cm;
    const double u = 2.0 * r2 / (w0 * w0); // Laguerre argument, (sqrt(2) r / w0)^2
    double radial = mode.norm() * std::pow(u, 0.5 * labs) *
                    assoc_laguerre(mode.radial_index(), labs, u) * std::exp(-r2 / (w0 * w0));
    const double phi = std::atan2(y_cm, x_cm);
    return std::polar(1.0, mode.charge() * phi) * radial;
}

std::complex<double> lg_fourier(const LaguerreGaussianMode& mode, double qx, double qy) {
    const int labs = std::abs(mode.charge());
    const double w0 = mode.waist();
    const double q2 = qx * qx + qy * qy;
    const double v = 0.5 * q2 * w0 * w0; // Laguerre argument in q, (q w0 / sqrt(2))^2
    // Same functional form with waist 2/w0: norm * (pi w0^2) gives
    // sqrt(2 pi p!/(p+|l|)!) * w0 up front.
    double radial = mode.norm() * kPi * w0 * w0 * std::pow(v, 0.5 * labs) *
                    assoc_laguerre(mode.radial_index(), labs, v) * std::exp(-0.25 * q2 * w0 * w0);
    const double phi = std::atan2(qy, qx);
    return fourier_eigenphase(mode.charge(), mode.radial_index()) *
           std::polar(1.0, mode.charge() * phi) * radial;
}

double donut_radius_q(const LaguerreGaussianMode& mode) {
    if (mode.charge() == 0) throw NoDonut("l = 0 mode has no donut radius");
    if (mode.radial_index() != 0)
        throw NoDonut("donut radius is defined for p = 0 modes only");
    return std::sqrt(2.0 * std::abs(mode.charge())) / mode.waist();
}

} // namespace oamspdc
