#include "oamspdc/biphoton.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace oamspdc {

namespace {
constexpr double kPi = std::numbers::pi;
// Fractional tolerance on the degenerate-signal consistency check; matches
// the interference-filter acceptance.
constexpr double kDegeneracyTolerance = 5e-3;
} // namespace

Scene::Scene(SceneParams params) : params_(std::move(params)) {
    params_.crystal.validate();
    if (!(params_.k_pump > 0.0) || !(params_.k_signal > 0.0))
        throw ValidationError("scene wavevectors must be > 0");
    if (!(params_.detector_distance > 0.0))
        throw ValidationError("detector distance must be > 0");
    if (!(params_.pump_wavelength_vacuum > 0.0))
        throw ValidationError("pump vacuum wavelength must be > 0");

    // Degenerate signal/idler: k_s = n_s * 2 pi / (2 lambda_P).
    const double expected_ks =
        params_.crystal.n_signal * kPi / params_.pump_wavelength_vacuum;
    if (std::abs(params_.k_signal - expected_ks) > kDegeneracyTolerance * expected_ks)
        throw ValidationError("k_signal inconsistent with degenerate down-conversion: got " +
                              std::to_string(params_.k_signal) + ", expected about " +
                              std::to_string(expected_ks));

    const double w0 = params_.pump.waist();
    rayleigh_ = 0.5 * params_.k_pump * w0 * w0;
    if (!(params_.crystal.length_cm < rayleigh_))
        throw ValidationError("thin-crystal condition violated: l_c = " +
                              std::to_string(params_.crystal.length_cm) +
                              " cm is not below the pump Rayleigh range " +
                              std::to_string(rayleigh_) + " cm");

    cone_polar_ = degenerate_polar_angle(params_.k_pump, params_.k_signal,
                                         std::numeric_limits<double>::infinity());
    ring_radius_ = internal_to_detection(cone_polar_, 0.0, params_.crystal.n_signal,
                                         params_.detector_distance)
                       .x;
}

DeltaK delta_k(const Scene& scene, PlanePoint signal, PlanePoint idler) {
    const double ns = scene.crystal().n_signal;
    const double d = scene.detector_distance();
    const InternalDirection s = detection_to_internal(signal, ns, d);
    const InternalDirection i = detection_to_internal(idler, ns, d);
    const WaveVector ks(scene.k_signal(), s.polar_rad, s.azimuth_rad);
    const WaveVector ki(scene.k_signal(), i.polar_rad, i.azimuth_rad);
    return {ks.x() + ki.x(), ks.y() + ki.y(), ks.z() + ki.z() - scene.k_pump()};
}

std::complex<double> amplitude_F(const Scene& scene, PlanePoint signal, PlanePoint idler) {
    const DeltaK dk = delta_k(scene, signal, idler);
    // The longitudinal factor enters as |sinc|; its phase is dropped since
    // only densities are observable here.
    const double lw = longitudinal_weight(dk.z, scene.crystal().length_cm);
    return std::sqrt(lw) * lg_fourier(scene.pump(), dk.x, dk.y);
}

double coincidence_density(const Scene& scene, PlanePoint signal, PlanePoint idler) {
    // |amplitude_F|^2 without the complex intermediates; the sampler's hot
    // path. Equality with std::norm(amplitude_F) is covered by a test.
    const DeltaK dk = delta_k(scene, signal, idler);
    const double lw = longitudinal_weight(dk.z, scene.crystal().length_cm);
    const LaguerreGaussianMode& pump = scene.pump();
    const int labs = std::abs(pump.charge());
    const double w0 = pump.waist();
    const double q2 = dk.x * dk.x + dk.y * dk.y;
    const double v = 0.5 * q2 * w0 * w0;
    double vpow = 1.0;
    for (int i = 0; i < labs; ++i) vpow *= v;
    const double lag = assoc_laguerre(pump.radial_index(), labs, v);
    const double radial = pump.norm() * kPi * w0 * w0;
    return lw * radial * radial * vpow * lag * lag * std::exp(-0.5 * q2 * w0 * w0);
}

double binomial(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    if (k > n - k) k = n - k;
    double c = 1.0;
    for (int j = 1; j <= k; ++j) c = c * (n - k + j) / j;
    return std::round(c);
}

double OamState::total_weight() const {
    double sum = 0.0;
    for (const auto& t : amplitudes) sum += t.weight;
    return sum;
}

OamState oam_amplitudes(int l) {
    if (l < 0) throw ValidationError("OAM charge must be >= 0 for the weight table");
    OamState state;
    state.charge = l;
    state.amplitudes.reserve(l + 1);
    for (int m = 0; m <= l; ++m) state.amplitudes.push_back({m, binomial(l, m)});
    return state;
}

OamState idler_projection_no_mask(int l) {
    if (l < 0) throw ValidationError("OAM charge must be >= 0 for the weight table");
    OamState state;
    state.charge = l;
    state.amplitudes.reserve(l + 1);
    for (int m = 0; m <= l; ++m) state.amplitudes.push_back({l - m, binomial(l, m)});
    return state;
}

double mask_amplitude(int l, int q) {
    return binomial(l, q);
}

} // namespace oamspdc
