#pragma once

#include <cstdint>
#include <vector>

#include "nandcim/cell.hpp"
#include "nandcim/common.hpp"
#include "nandcim/variation.hpp"

namespace nandcim {

/// Physical coordinates of one vertical string: which block it sits in,
/// which string-select line gates it, and which bitline it feeds.
struct StringCoords {
    int block = 0;
    int ssl = 0;
    int bitline = 0;
};

/// One vertical NAND string: a matching segment (upper layers) in series
/// with a compute segment (lower layers). The series chain conducts only
/// if every selected cell conducts.
struct StringImage {
    std::vector<CellState> cam_cells;
    std::vector<CellState> cim_cells;
    StringCoords coords;

    int total_cells() const {
        return static_cast<int>(cam_cells.size() + cim_cells.size());
    }
};

/// Current the string sources onto its bitline under one read pulse.
/// `cim_index` selects the compute cell whose word line carries the read
/// pulse; all other layers are bypassed with a pass bias. `cam_pass` is
/// the result of matching the string's upper segment against the broadcast
/// query; a mismatched string is pinched off and carries exactly zero.
inline double string_current(const StringImage& s, int cim_index, int pulse_index, double drive,
                             const VariationModel& variation, bool cam_pass) {
    if (drive < 0.0)
        throw ContractError("string_current: drive must be >= 0");
    if (cim_index < 0 || cim_index >= static_cast<int>(s.cim_cells.size()))
        throw ContractError("string_current: cim cell index out of range");
    if (!cam_pass)
        return 0.0;
    const CellState& cell = s.cim_cells[static_cast<std::size_t>(cim_index)];
    if (!cell_conducts(cell, pulse_index))
        return 0.0;
    // layer coordinate of the selected cell = cam depth + index within the
    // compute segment
    const std::uint64_t layer = s.cam_cells.size() + static_cast<std::size_t>(cim_index);
    return variation.cell_current(drive, static_cast<std::uint64_t>(s.coords.block),
                                  static_cast<std::uint64_t>(s.coords.ssl),
                                  static_cast<std::uint64_t>(s.coords.bitline), layer);
}

} // namespace nandcim
