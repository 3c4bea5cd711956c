#pragma once

#include <stdexcept>

namespace nslit {

// Physical constants for a run. Natural units (hbar = mass = 1) by default;
// omega is the oscillator frequency used by the heat-flow diagnostics, where
// the thermostat energy scale is kT = hbar * omega per degree of freedom.
struct Units {
    double hbar = 1.0;
    double mass = 1.0;
    double omega = 1.0;

    double kT() const { return hbar * omega; }

    void validate() const {
        if (!(hbar > 0.0)) throw std::invalid_argument("units.hbar must be > 0");
        if (!(mass > 0.0)) throw std::invalid_argument("units.mass must be > 0");
        if (!(omega > 0.0)) throw std::invalid_argument("units.omega must be > 0");
    }
};

}  // namespace nslit
