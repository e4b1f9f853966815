#pragma once

#include <complex>

#include "oamspdc/errors.hpp"

namespace oamspdc {

/// Laguerre-Gaussian transverse mode, evaluated at its waist plane.
///
/// Lengths are in cm. The mode is parametrized by the topological charge l,
/// the radial index p, the waist w0 and the wavelength; the Rayleigh range is
/// tied to the waist by z_R = pi w0^2 / lambda and either quantity can be
/// given at construction.
class LaguerreGaussianMode {
public:
    static LaguerreGaussianMode from_waist(int l, int p, double waist_cm, double wavelength_cm);
    static LaguerreGaussianMode from_rayleigh(int l, int p, double rayleigh_cm, double wavelength_cm);

    int charge() const { return l_; }
    int radial_index() const { return p_; }
    double waist() const { return w0_; }
    double wavelength() const { return lambda_; }
    double rayleigh_range() const { return zr_; }

    /// Normalization constant sqrt(2 p! / (pi (p+|l|)!)) / w0 of the waist field.
    double norm() const { return norm_; }

private:
    LaguerreGaussianMode(int l, int p, double w0, double lambda);

    int l_;
    int p_;
    double w0_;
    double lambda_;
    double zr_;
    double norm_;
};

/// Waist-plane field value, unit-normalized (integral of |field|^2 over the
/// plane is 1) and carrying the e^{il phi} azimuthal phase.
std::complex<double> lg_field(const LaguerreGaussianMode& mode, double x_cm, double y_cm);

/// Closed-form 2-d Fourier transform of lg_field with the convention
/// F(q) = Integral f(x) exp(-i q.x) d^2x. The result is again a
/// Laguerre-Gaussian of the same charge with reciprocal waist 2/w0, scaled by
/// the eigenphase (-i)^|l| (-1)^p; the convention is pinned by the FFT oracle
/// in the test suite.
std::complex<double> lg_fourier(const LaguerreGaussianMode& mode, double qx, double qy);

/// Radius of maximum |lg_fourier|^2 in q-space, sqrt(2l)/w0. Defined for
/// donut modes only (l >= 1, p == 0); throws NoDonut otherwise.
double donut_radius_q(const LaguerreGaussianMode& mode);

/// Associated Laguerre polynomial L_p^a(x) by the standard recurrence.
double assoc_laguerre(int p, int a, double x);

} // namespace oamspdc
