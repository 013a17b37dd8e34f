#pragma once

#include <cstdlib>
#include <string>
#include <vector>

#include "nandcim/cell.hpp"
#include "nandcim/common.hpp"

namespace nandcim {

/// Code space tying signed integer weights and inputs to physical cell
/// patterns. S string-select lines per ground-select group act as one
/// block-wise weight; m is the per-cell state count; inputs take one of
/// L+1 source-line drive magnitudes (zero included) with a polarity.
struct CodeSpace {
    int ssls = 4;         // S
    int states = 2;       // m
    int input_levels = 2; // L

    CodeSpace() = default;
    CodeSpace(int ssls_, int states_, int input_levels_)
        : ssls(ssls_), states(states_), input_levels(input_levels_) {
        validate();
    }

    void validate() const {
        if (ssls < 2 || (ssls % 2) != 0)
            throw UnsupportedConfigError("CodeSpace: S must be even and >= 2, got " +
                                         std::to_string(ssls));
        if (states < 2)
            throw UnsupportedConfigError("CodeSpace: cell states must be >= 2");
        if (input_levels < 1)
            throw UnsupportedConfigError("CodeSpace: need at least one input level");
    }

    /// Largest representable |w|: S*(m-1)/2.
    int weight_max() const { return ssls * (states - 1) / 2; }
    int input_max() const { return input_levels; }

    int weight_code_span() const { return ssls * (states - 1); } // pulse-sum range
};

/// Dual-block pattern of one signed weight: the positive block carries the
/// thermometer code of w + S(m-1)/2 conducting pulse units, the negative
/// block the complement. Levels are listed per SSL, ascending.
struct WeightCode {
    int ssls = 0;
    int states = 0;
    std::vector<CellState> pos_block;
    std::vector<CellState> neg_block;

    static int block_pulse_sum(const std::vector<CellState>& block) {
        int sum = 0;
        for (const auto& c : block)
            sum += c.pulse_contribution();
        return sum;
    }

    int pos_pulse_sum() const { return block_pulse_sum(pos_block); }
    int neg_pulse_sum() const { return block_pulse_sum(neg_block); }
};

/// Signed multibit input as a source-line drive: |x| picks the drive
/// level, the sign picks which block of the pair feeds the positive
/// accumulation.
struct InputDrive {
    int magnitude = 0;
    int polarity = +1;
};

namespace detail {

// Thermometer fill: saturate cells to full contribution one SSL at a
// time, then one partial cell. Deterministic, so programmed images diff
// cleanly.
inline std::vector<CellState> thermometer_block(int pulse_sum, int ssls, int states) {
    std::vector<CellState> block;
    block.reserve(static_cast<std::size_t>(ssls));
    const int full = states - 1;
    int remaining = pulse_sum;
    for (int i = 0; i < ssls; ++i) {
        const int c = remaining >= full ? full : remaining;
        remaining -= c;
        block.emplace_back(full - c, states); // contribution c -> level (m-1)-c
    }
    return block;
}

} // namespace detail

inline WeightCode encode_weight(int w, const CodeSpace& space) {
    const int wmax = space.weight_max();
    if (w < -wmax || w > wmax)
        throw RangeError("encode_weight: w = " + std::to_string(w) + " outside [" +
                         std::to_string(-wmax) + ", " + std::to_string(wmax) + "]");
    WeightCode code;
    code.ssls = space.ssls;
    code.states = space.states;
    const int pos_sum = w + wmax;
    code.pos_block = detail::thermometer_block(pos_sum, space.ssls, space.states);
    code.neg_block = detail::thermometer_block(space.weight_code_span() - pos_sum, space.ssls,
                                               space.states);
    return code;
}

inline int decode_weight(const WeightCode& code) {
    if (code.ssls < 2 || static_cast<int>(code.pos_block.size()) != code.ssls ||
        static_cast<int>(code.neg_block.size()) != code.ssls)
        throw CorruptCodeError("decode_weight: block size does not match S = " +
                               std::to_string(code.ssls));
    for (const auto& c : code.pos_block)
        if (c.states != code.states || c.level < 0 || c.level >= c.states)
            throw CorruptCodeError("decode_weight: positive block holds an invalid cell state");
    for (const auto& c : code.neg_block)
        if (c.states != code.states || c.level < 0 || c.level >= c.states)
            throw CorruptCodeError("decode_weight: negative block holds an invalid cell state");
    const int span = code.ssls * (code.states - 1);
    const int pos = code.pos_pulse_sum();
    const int neg = code.neg_pulse_sum();
    if (pos + neg != span)
        throw CorruptCodeError("decode_weight: complementarity violated, pos " +
                               std::to_string(pos) + " + neg " + std::to_string(neg) +
                               " != " + std::to_string(span));
    return pos - span / 2;
}

inline InputDrive encode_input(int x, const CodeSpace& space) {
    const int xmax = space.input_max();
    if (x < -xmax || x > xmax)
        throw RangeError("encode_input: x = " + std::to_string(x) + " outside [" +
                         std::to_string(-xmax) + ", " + std::to_string(xmax) + "]");
    InputDrive d;
    d.magnitude = std::abs(x);
    d.polarity = x < 0 ? -1 : +1;
    return d;
}

inline int decode_input(const InputDrive& d) { return d.polarity * d.magnitude; }

/// Ideal product of one encoded pair under drive |x|: the differential of
/// the two block currents, pulse-summed over the full read sweep, with
/// the blocks swapped for negative inputs. The complementary pair has a
/// differential gain of two pulse units per weight step, so results are
/// reported in weight-step units (differential / 2); the array's sense
/// path applies the same normalization. Equals x*w for every in-range
/// pair.
inline int signed_product_model(int x, int w, const CodeSpace& space) {
    const InputDrive drive = encode_input(x, space);
    const WeightCode code = encode_weight(w, space);
    const int pos = code.pos_pulse_sum(); // block current per unit drive
    const int neg = code.neg_pulse_sum();
    const int differential = drive.magnitude * (pos - neg);
    return drive.polarity * differential / 2;
}

} // namespace nandcim
