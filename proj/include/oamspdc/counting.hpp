#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "oamspdc/biphoton.hpp"
#include "oamspdc/rng.hpp"

namespace oamspdc {

/// Circular-aperture photon-counting detector in the detection plane.
struct Detector {
    PlanePoint center;
    double aperture_diameter_cm = 175e-4;
    double quantum_efficiency = 1.0;
    double dark_rate_hz = 0.0; // uncorrelated singles (dark + stray background)

    bool hits(PlanePoint p) const {
        const double dx = p.x - center.x;
        const double dy = p.y - center.y;
        const double r = 0.5 * aperture_diameter_cm;
        return dx * dx + dy * dy <= r * r;
    }

    void validate() const {
        if (!(aperture_diameter_cm > 0.0))
            throw ValidationError("detector aperture must be > 0");
        if (!(quantum_efficiency > 0.0 && quantum_efficiency <= 1.0))
            throw ValidationError("quantum efficiency must lie in (0, 1]");
        if (!(dark_rate_hz >= 0.0))
            throw ValidationError("dark rate must be >= 0");
    }
};

/// Gate and pulse timing of the counting electronics, seconds.
struct GateConfig {
    double trigger_gate_s = 5e-9;   // gated two-fold window of the scan counters
    double pulse_width_s = 38e-9;   // discriminator pulse width (Delta t)
    double effective_window_s = 2.0 * 38e-9; // tau, defaults to 2 Delta t

    void validate() const {
        if (!(trigger_gate_s > 0.0 && pulse_width_s > 0.0 && effective_window_s > 0.0))
            throw ValidationError("gate times must be > 0");
    }
};

/// Singles/coincidence/triple counts over a duration, with exact rate
/// accessors (rate = count / duration).
struct CountRecord {
    double duration_s = 0.0;
    std::uint64_t trig = 0;
    std::uint64_t top = 0;
    std::uint64_t bot = 0;
    std::uint64_t ctop = 0;
    std::uint64_t cbot = 0;
    std::uint64_t triple = 0;

    double rate_trig() const { return duration_s > 0.0 ? trig / duration_s : 0.0; }
    double rate_top() const { return duration_s > 0.0 ? top / duration_s : 0.0; }
    double rate_bot() const { return duration_s > 0.0 ? bot / duration_s : 0.0; }
    double rate_ctop() const { return duration_s > 0.0 ? ctop / duration_s : 0.0; }
    double rate_cbot() const { return duration_s > 0.0 ? cbot / duration_s : 0.0; }
    double rate_triple() const { return duration_s > 0.0 ? triple / duration_s : 0.0; }

    void validate() const {
        if (ctop > trig || ctop > top || cbot > trig || cbot > bot)
            throw ValidationError("coincidences exceed singles");
        if (triple > ctop || triple > cbot)
            throw ValidationError("triples exceed coincidences");
    }
};

/// Rectangular scan raster of the movable detector, cm and seconds.
struct ScanGrid {
    double x_min, x_max;
    double y_min, y_max;
    double step_cm;
    double dwell_s;

    std::size_t nx() const;
    std::size_t ny() const;
    double x_at(std::size_t ix) const { return x_min + static_cast<double>(ix) * step_cm; }
    double y_at(std::size_t iy) const { return y_min + static_cast<double>(iy) * step_cm; }

    /// Throws on an empty/invalid raster; returns a warning for sub-10-um steps.
    std::vector<std::string> validate() const;
};

/// One signal/idler landing-point pair, detection-plane cm.
struct PairSample {
    PlanePoint signal;
    PlanePoint idler;
};

/// Restriction of the signal landing point to a disc (e.g. the fixed
/// detector aperture) when sampling conditioned pairs.
struct FixedRegion {
    PlanePoint center;
    double radius_cm;
};

/// Rejection-sampling envelope for the pair density: the signal point is
/// uniform over the fixed region (or over the phase-matched annulus), the
/// idler radius is uniform in area over the annulus and the idler azimuth is
/// uniform in a band of half-width psi_max around the back-to-back azimuth.
/// density_cap majorizes |amplitude_F|^2 over that domain.
struct PairEnvelope {
    double r_lo_cm;
    double r_hi_cm;
    double psi_max_rad;
    double density_cap;
};

/// Envelope used by sample_pair: annulus spanning the longitudinal-weight
/// band around the ring, azimuthal band wide enough for the split spots and
/// their tails, cap from a coarse scan with a 2x safety factor.
PairEnvelope default_pair_envelope(const Scene& scene,
                                   const std::optional<FixedRegion>& fixed_region);

/// Draws one photon-pair landing-point pair from |amplitude_F|^2 (restricted
/// to signal in fixed_region when given) by rejection against the default
/// envelope. Throws EnvelopeTooLoose when the measured acceptance falls
/// below 1e-4.
PairSample sample_pair(const Scene& scene, const std::optional<FixedRegion>& fixed_region,
                       RngStream& rng);

namespace detail {
/// Rejection sampler against an explicit envelope; exposed so tests can
/// exercise the acceptance guard with a deliberately loose envelope.
PairSample sample_pair_from(const Scene& scene, const std::optional<FixedRegion>& fixed_region,
                            const PairEnvelope& envelope, RngStream& rng);
} // namespace detail

/// Result of a scanned-coincidence run: one CountRecord per raster point,
/// row-major (records[iy * nx + ix]). The fixed detector's counts are in
/// `trig`, the movable detector's in `top`, coincidences in `ctop`.
struct ScanResult {
    ScanGrid grid;
    std::vector<CountRecord> records;
    std::vector<std::string> warnings;
};

/// Scanned-detector coincidence mapping. pair_rate is the rate of pair
/// emissions with one member entering the fixed aperture (before detection
/// efficiency); the movable detector shares the fixed detector's aperture,
/// efficiency and dark rate. Per-point streams derive from (seed, index), so
/// results are independent of worker count and evaluation order.
ScanResult simulate_scan(const Scene& scene, const Detector& fixed_detector, ScanGrid grid,
                         double pair_rate_hz, const GateConfig& gates, std::uint64_t seed,
                         int workers = 0);

enum class PairModel {
    Quantum,       // one pair per emission; the idler lands in exactly one arm
    Semiclassical, // both arms fed independently by every emission
};

/// Triple-coincidence experiment with a trigger detector and two detectors
/// on the split spots.
///
/// Emissions are a homogeneous Poisson process at pair_rate. The trigger
/// photon is detected with trig.quantum_efficiency. The idler side is a
/// 50/50 top/bottom split: under the quantum model the idler picks exactly
/// one arm and is detected with that arm's quantum_efficiency (net arm
/// probability efficiency/2); under the semiclassical model both arms fire
/// independently with the same net probabilities. Each detector's dark_rate
/// adds uncorrelated singles.
///
/// Counting reproduces an edge-sampled AND circuit: a trigger pulse latches
/// each arm whose pulse is high at the trigger's rising edge (arm pulse
/// onset within the preceding pulse_width, simultaneous onsets included,
/// each arm pulse latching at most one trigger); a triple is a trigger that
/// latches both arms. The accidental-rate model
/// (R_ctop R_bot + R_cbot R_top) tau/2 is exact for this discipline.
CountRecord simulate_triple(PairModel model, const Scene& scene, const Detector& trig,
                            const Detector& top, const Detector& bot, double pair_rate_hz,
                            const GateConfig& gates, double duration_s, std::uint64_t seed);

/// Greedy two-stream pulse-overlap count: events carry pulses of width
/// window/2, pulses overlap iff |t_a - t_b| <= window/2 (closed), each event
/// matches at most once, earliest-first. Inputs must be sorted ascending or
/// SortOrderViolation is thrown.
std::uint64_t window_coincidence(std::span<const double> a, std::span<const double> b,
                                 double window_s);

} // namespace oamspdc
