#pragma once

#include <complex>
#include <vector>

#include "oamspdc/lgbeam.hpp"
#include "oamspdc/phasematch.hpp"

namespace oamspdc {

struct SceneParams {
    LaguerreGaussianMode pump;       // crystal-internal mode (wavelength 2 pi / k_pump)
    Crystal crystal;
    double k_pump;                   // 1/cm, crystal-internal
    double k_signal;                 // 1/cm, crystal-internal, degenerate
    double pump_wavelength_vacuum;   // cm
    double detector_distance;        // cm
};

/// Immutable simulation scene: pump + crystal + degenerate wavevectors +
/// detection-plane geometry. Construction enforces the degeneracy and
/// thin-crystal invariants; Scene values are freely shareable across workers.
class Scene {
public:
    explicit Scene(SceneParams params);

    const LaguerreGaussianMode& pump() const { return params_.pump; }
    const Crystal& crystal() const { return params_.crystal; }
    double k_pump() const { return params_.k_pump; }
    double k_signal() const { return params_.k_signal; }
    double detector_distance() const { return params_.detector_distance; }
    double pump_wavelength_vacuum() const { return params_.pump_wavelength_vacuum; }

    /// Transverse-momentum scale of the pump, k_P w0^2 / 2. Equals the
    /// configured in-crystal Rayleigh range and sets the constant of motion
    /// |q_s + q_i|^2 = k_P l / z_R.
    double pump_rayleigh() const { return rayleigh_; }

    /// Crystal-internal polar angle of the down-conversion intensity ring
    /// (peak of the longitudinal weight), arccos(k_P / (2 k_s)).
    double cone_polar() const { return cone_polar_; }

    /// Detection-plane radius of the intensity ring.
    double ring_radius() const { return ring_radius_; }

private:
    SceneParams params_;
    double rayleigh_;
    double cone_polar_;
    double ring_radius_;
};

/// Wavevector offset k_s + k_i - k_P in Cartesian components, 1/cm.
struct DeltaK {
    double x;
    double y;
    double z;
};

/// Wavevector offset for a signal/idler pair given by detection-plane
/// landing points; the refraction inverse is applied internally.
DeltaK delta_k(const Scene& scene, PlanePoint signal, PlanePoint idler);

/// Two-photon detection amplitude over detection-plane coordinates:
/// sqrt of the longitudinal weight times the pump-mode Fourier transform at
/// the transverse wavevector offset. The coincidence probability density is
/// |amplitude_F|^2.
std::complex<double> amplitude_F(const Scene& scene, PlanePoint signal, PlanePoint idler);

/// |amplitude_F|^2 without the intermediate complex value.
double coincidence_density(const Scene& scene, PlanePoint signal, PlanePoint idler);

/// Discrete OAM decomposition of the two-photon state in units of the
/// overall constant G. Terms are indexed m = 0..l with binomial weights
/// C(l, m); the signal carries j_z = m and the idler j_z = l - m.
struct OamState {
    struct Term {
        int jz;
        double weight;
    };
    int charge = 0;
    std::vector<Term> amplitudes;

    double total_weight() const;
};

/// Signal-side binomial weight table, term m has j_z = m and weight C(l, m).
OamState oam_amplitudes(int l);

/// Idler-side state when no mask is used in the signal beam: weight C(l, m)
/// on j_z = l - m.
OamState idler_projection_no_mask(int l);

/// Projection amplitude when a q phase mask is used in the idler path:
/// C(l, q) for 0 <= q <= l, zero outside.
double mask_amplitude(int l, int q);

/// Exact binomial coefficient as a double (valid well beyond l = 10).
double binomial(int n, int k);

} // namespace oamspdc
