#pragma once

namespace fiberpert {

// Root-raised-cosine spectral shape in [0, 1], normalized to 1 in the flat band.
// For rolloff 0 the support is the half-open Nyquist interval [-pi/T, pi/T), so the
// aliased squared spectrum sums to exactly one on every frequency.
double rrc_shape(double omega, double period, double rolloff);

struct PulseSpec {
    double rolloff = 0.0;
    double energy = 0.0; // s, E_g; launch power P = E_g / T for unit-variance symbols

    static PulseSpec from_power(double power, double symbol_rate, double rolloff) {
        return PulseSpec{rolloff, power / symbol_rate};
    }
};

} // namespace fiberpert
