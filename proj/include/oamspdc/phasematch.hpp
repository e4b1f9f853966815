#pragma once

#include "oamspdc/errors.hpp"

namespace oamspdc {

/// Type-I nonlinear crystal. The cut angles are metadata; the indices and
/// length feed the phase-matching geometry. Lengths in cm.
struct Crystal {
    double length_cm;
    double n_signal;
    double n_pump;
    double cut_polar_rad = 0.0;
    double cut_azimuth_rad = 0.0;

    void validate() const {
        if (!(length_cm > 0.0)) throw ValidationError("crystal length must be > 0");
        if (!(n_signal >= 1.0)) throw ValidationError("signal index must be >= 1");
        if (!(n_pump >= 1.0)) throw ValidationError("pump index must be >= 1");
    }
};

/// Wavevector in polar form about the pump axis (z). Azimuth is normalized
/// to [-pi, pi).
class WaveVector {
public:
    WaveVector(double magnitude, double polar_rad, double azimuth_rad);

    double magnitude() const { return k_; }
    double polar() const { return theta_; }
    double azimuth() const { return phi_; }

    double x() const;
    double y() const;
    double z() const;

private:
    double k_;
    double theta_;
    double phi_;
};

/// Point in the detection plane, cm.
struct PlanePoint {
    double x = 0.0;
    double y = 0.0;
};

/// Crystal-internal polar angles recovered from a detection-plane point.
struct InternalDirection {
    double polar_rad;
    double azimuth_rad;
};

/// Degenerate type-I scattering polar angle,
/// theta = arccos((k_P + 2 pi / l_c) / (2 k_s)).
/// crystal_length may be +infinity, which reduces to arccos(k_P / (2 k_s)).
/// Throws NoPhaseMatch when the arccos argument leaves [-1, 1].
double degenerate_polar_angle(double k_pump, double k_signal, double crystal_length_cm);

/// Normalized longitudinal phase-matching weight sinc^2(dkz l_c / 2) with the
/// removable singularity at dkz = 0 returning exactly 1. First null at
/// dkz = 2 pi / l_c.
double longitudinal_weight(double dkz, double crystal_length_cm);

/// Split-spot aperture dphi = |phi_s - phi_i| for charge l at cone angle
/// theta: cos(dphi) = k_P l / (2 k_s^2 z_R sin^2 theta) - 1. l = 0 returns
/// exactly pi. Throws NoSplitSolution when the azimuthal equation has no
/// solution.
double split_spot_aperture(int l, double theta, double k_pump, double k_signal,
                           double rayleigh_cm);

/// Maps a crystal-internal direction to the detection plane through a single
/// flat exit face (sin theta_ext = n_s sin theta_int, azimuth preserved) and
/// a projection at distance d. Throws TotalInternalReflection when
/// n_s sin theta_int >= 1.
PlanePoint internal_to_detection(double theta_int, double phi, double n_signal,
                                 double distance_cm);

/// Inverse of internal_to_detection on its valid domain.
InternalDirection detection_to_internal(PlanePoint p, double n_signal, double distance_cm);

} // namespace oamspdc
