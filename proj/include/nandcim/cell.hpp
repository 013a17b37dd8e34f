#pragma once

#include <string>
#include <vector>

#include "nandcim/common.hpp"

namespace nandcim {

/// One floating-gate transistor programmed to a threshold-voltage state.
/// level 0 is the lowest threshold (always conducts under a read bias),
/// level m-1 the highest (never conducts under a read bias).
struct CellState {
    int level = 0;
    int states = 2; // m

    CellState() = default;
    CellState(int level_, int states_) : level(level_), states(states_) {
        if (states < 2)
            throw ContractError("CellState: states must be >= 2, got " + std::to_string(states));
        if (level < 0 || level >= states)
            throw ContractError("CellState: level " + std::to_string(level) +
                                " outside [0, " + std::to_string(states - 1) + "]");
    }

    /// Bitline-current contribution summed over a full read-pulse sweep:
    /// an m-state cell conducts on (m-1)-level pulses.
    int pulse_contribution() const { return (states - 1) - level; }
};

/// Ordered word-line read levels for an m-state cell; pulse j turns on
/// every cell with level <= j.
struct ReadPulseSchedule {
    std::vector<int> pulse_levels;

    static ReadPulseSchedule for_states(int states) {
        if (states < 2)
            throw ContractError("ReadPulseSchedule: states must be >= 2");
        ReadPulseSchedule s;
        s.pulse_levels.reserve(static_cast<std::size_t>(states - 1));
        for (int j = 0; j < states - 1; ++j)
            s.pulse_levels.push_back(j);
        return s;
    }

    int count() const { return static_cast<int>(pulse_levels.size()); }

    void validate(int states) const {
        if (count() != states - 1)
            throw ContractError("ReadPulseSchedule: need " + std::to_string(states - 1) +
                                " pulses for " + std::to_string(states) + " states, have " +
                                std::to_string(count()));
        for (std::size_t i = 1; i < pulse_levels.size(); ++i)
            if (pulse_levels[i] <= pulse_levels[i - 1])
                throw ContractError("ReadPulseSchedule: pulse levels must be strictly increasing");
    }
};

/// true iff the cell turns on under read pulse `pulse_index` (0-based).
inline bool cell_conducts(const CellState& cell, int pulse_index) {
    if (pulse_index < 0 || pulse_index >= cell.states - 1)
        throw ContractError("cell_conducts: pulse index " + std::to_string(pulse_index) +
                            " outside [0, " + std::to_string(cell.states - 2) + "]");
    return cell.level <= pulse_index;
}

} // namespace nandcim
