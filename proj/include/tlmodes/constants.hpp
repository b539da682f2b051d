#pragma once

#include <cmath>

namespace tlmodes {

// CODATA 2018 exact/recommended values.
inline constexpr double flux_quantum = 2.067833848e-15;    // Wb, h/2e
inline constexpr double hbar = 1.054571817e-34;            // J s
inline constexpr double planck = 6.62607015e-34;           // J s
inline constexpr double elementary_charge = 1.602176634e-19;  // C

inline constexpr double pi = 3.141592653589793238462643383279502884;
inline constexpr double two_pi = 2.0 * pi;

/// Josephson inductance of a junction with energy E_J/h given in hertz.
[[nodiscard]] inline double josephson_inductance(double ej_hz) {
    const double phi0_over_2pi = flux_quantum / two_pi;
    return phi0_over_2pi * phi0_over_2pi / (planck * ej_hz);
}

/// Inverse inductance 1/L_J = (2pi/Phi_0)^2 E_J with E_J = h * ej_hz.
[[nodiscard]] inline double josephson_inverse_inductance(double ej_hz) {
    const double f = two_pi / flux_quantum;
    return f * f * planck * ej_hz;
}

}  // namespace tlmodes
