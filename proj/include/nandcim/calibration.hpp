#pragma once

#include <cstdint>

#include "nandcim/adc.hpp"

namespace nandcim {

/// Read timing. t1 is the fixed per-cycle setup (precharge and line
/// settling), t2 the incremental delay of each additional read pulse with
/// its conversion folded in. An m-state readout therefore takes
/// t1 + (m-1) * t2.
struct TimingModel {
    double t1 = 1000.0; // ns
    double t2 = 100.0;  // ns

    double cycle_time(int states) const { return t1 + (states - 1) * t2; }

    void validate() const {
        if (t1 <= 0.0 || t2 <= 0.0)
            throw UnsupportedConfigError("TimingModel: t1 and t2 must be positive");
    }
};

/// Lumped per-event array energies (pJ). Precharge covers the signal-line
/// setup of one cycle; the string term is charged once per unit-cell
/// engagement; the search term once per cycle that broadcasts a query.
struct EnergyModel {
    double precharge_per_cycle = 600.0;
    double string_per_pulse = 0.8;
    double cam_search_per_cycle = 30.0;

    void validate() const {
        if (precharge_per_cycle < 0.0 || string_per_pulse < 0.0 || cam_search_per_cycle < 0.0)
            throw UnsupportedConfigError("EnergyModel: energies must be >= 0");
    }
};

/// Default calibration. These constants are data: they were fixed once so
/// the modeled stage-over-baseline ratios sit inside the ranges measured
/// on hardware-level simulations of this architecture class, and the
/// regression suite pins them. Units: ns, pJ, unit currents.
struct Calibration {
    TimingModel timing{};
    EnergyModel energy{};
    AdcModel adc{8, 256.0, 18.0, 0.0};
    double default_sigma = 0.15;
    double confidence = 0.322; // tolerated half-lsb failure rate is 1 - this
    int trials = 10000;
    std::uint64_t mc_seed = 0x5eedcafe;

    static Calibration defaults() { return Calibration{}; }
};

} // namespace nandcim
