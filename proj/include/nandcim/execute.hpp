#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "nandcim/adc.hpp"
#include "nandcim/cam.hpp"
#include "nandcim/common.hpp"
#include "nandcim/encoding.hpp"
#include "nandcim/mapping.hpp"
#include "nandcim/plane.hpp"
#include "nandcim/variation.hpp"

namespace nandcim {

struct PairDrive {
    int pair = 0;
    InputDrive drive;
};

/// One fused select-and-compute step: broadcast the query, drive the
/// listed block pairs, pulse one compute layer, sense every bitline.
struct CycleCommand {
    CamQuery query;                // empty = no gating (every string passes)
    std::vector<PairDrive> drives;
    int cim_layer = 0;             // absolute layer index, one layer per cycle
    ReadPulseSchedule pulses;
};

struct SenseSample {
    double raw = 0.0;     // differential current in weight-step units
    long long quantized = 0;
};

struct SenseResult {
    std::vector<SenseSample> per_bitline;
};

namespace detail {

inline bool string_matches(const Plane& plane, int block, int ssl, int bitline,
                           const CamQuery& query) {
    const auto& plan = plane.cam_plan();
    for (std::size_t l = 0; l < plan.size(); ++l)
        if (plane.level_at(block, ssl, static_cast<int>(l), bitline) != query.layers[l].value)
            return false;
    return true;
}

} // namespace detail

/// Execute one cycle over the programmed plane. Per bitline, every driven
/// pair contributes the pulse-summed differential of its two blocks,
/// gated per string by the query match; the complementary pair's
/// differential gain of two is normalized away so one weight step is one
/// raw unit. With sigma = 0 and no clamping the quantized output is the
/// exact integer dot product of the driven inputs and stored weights.
inline SenseResult execute_cycle(const Plane& plane, const CycleCommand& cmd,
                                 const VariationModel& variation, const AdcModel& adc) {
    const PlaneGeometry& geom = plane.geometry();
    adc.validate();
    if (cmd.cim_layer < geom.cam_layers || cmd.cim_layer >= geom.layers_total)
        throw ContractError("execute_cycle: selected layer " + std::to_string(cmd.cim_layer) +
                            " is not a compute layer");
    cmd.pulses.validate(plane.cim_states());
    const auto& plan = plane.cam_plan();
    if (!plan.empty() || !cmd.query.layers.empty()) {
        if (cmd.query.layers.size() != plan.size())
            throw ContractError("execute_cycle: query shape does not match the plane's match plan");
        for (std::size_t l = 0; l < plan.size(); ++l)
            detail::check_cam_layer({plan[l], cmd.query.layers[l].value}, "execute_cycle query");
    }
    std::vector<char> driven(static_cast<std::size_t>(geom.block_pairs()), 0);
    for (const auto& d : cmd.drives) {
        if (d.pair < 0 || d.pair >= geom.block_pairs())
            throw ContractError("execute_cycle: driven pair " + std::to_string(d.pair) +
                                " outside the plane");
        if (d.drive.magnitude < 0)
            throw ContractError("execute_cycle: negative drive magnitude");
        if (driven[static_cast<std::size_t>(d.pair)]++)
            throw ContractError("execute_cycle: pair " + std::to_string(d.pair) +
                                " driven twice; one source line carries one value");
    }

    SenseResult result;
    result.per_bitline.assign(static_cast<std::size_t>(geom.page_size), SenseSample{});
    std::vector<double> raw(static_cast<std::size_t>(geom.page_size), 0.0);

    for (const auto& d : cmd.drives) {
        if (d.drive.magnitude == 0)
            continue;
        const double drive = static_cast<double>(d.drive.magnitude);
        const double polarity = static_cast<double>(d.drive.polarity);
        for (int half = 0; half < 2; ++half) {
            const int block = 2 * d.pair + half;
            const double block_sign = half == 0 ? 1.0 : -1.0;
            for (int ssl = 0; ssl < geom.ssls_per_gsl; ++ssl) {
                const std::size_t base = plane.index(block, ssl, cmd.cim_layer, 0);
                for (int bl = 0; bl < geom.page_size; ++bl) {
                    if (!detail::string_matches(plane, block, ssl, bl, cmd.query))
                        continue;
                    const int level = plane.raw_levels()[base + static_cast<std::size_t>(bl)];
                    int conducting = 0;
                    for (int p : cmd.pulses.pulse_levels)
                        conducting += level <= p ? 1 : 0;
                    if (conducting == 0)
                        continue;
                    const double current = variation.cell_current(
                        drive, static_cast<std::uint64_t>(block), static_cast<std::uint64_t>(ssl),
                        static_cast<std::uint64_t>(bl), static_cast<std::uint64_t>(cmd.cim_layer));
                    raw[static_cast<std::size_t>(bl)] +=
                        polarity * block_sign * current * conducting * 0.5;
                }
            }
        }
    }

    for (int bl = 0; bl < geom.page_size; ++bl) {
        auto& s = result.per_bitline[static_cast<std::size_t>(bl)];
        s.raw = raw[static_cast<std::size_t>(bl)];
        s.quantized = adc.quantize(s.raw);
    }
    return result;
}

struct GemvResult {
    std::vector<long long> output; // one value per output column
    int cycles = 0;
};

/// Full matrix-vector product of one expert against the programmed plane.
/// W[i][o] must match what was programmed; x feeds the expert's row
/// slots. Rows are serialized over layers (one active layer per cycle)
/// and over `max_rows_per_cycle` chunks; chunk results are dequantized
/// and accumulated digitally.
inline GemvResult run_gemv(const Plane& plane, const ExpertLayout& layout, int expert,
                           const std::vector<std::vector<int>>& w, const std::vector<int>& x,
                           const CodeSpace& space, const VariationModel& variation,
                           const AdcModel& adc, int max_rows_per_cycle = 0) {
    if (expert < 0 || expert >= layout.num_experts)
        throw ContractError("run_gemv: expert id out of range");
    if (static_cast<int>(x.size()) != layout.in_dim)
        throw ContractError("run_gemv: input length " + std::to_string(x.size()) +
                            " does not match the layout's " + std::to_string(layout.in_dim));
    if (static_cast<int>(w.size()) != layout.in_dim)
        throw ContractError("run_gemv: weight matrix has " + std::to_string(w.size()) +
                            " rows, layout expects " + std::to_string(layout.in_dim));
    for (const auto& row : w)
        if (static_cast<int>(row.size()) != layout.out_dim)
            throw ContractError("run_gemv: weight matrix width does not match the layout");
    if (space.ssls != plane.geometry().ssls_per_gsl || space.states != plane.cim_states())
        throw ContractError("run_gemv: code space disagrees with the plane");

    const int chunk_limit = max_rows_per_cycle > 0 ? max_rows_per_cycle : layout.in_dim;
    const auto& slots = layout.rows[static_cast<std::size_t>(expert)];
    const CamQuery query = layout.query_for(expert);
    const ReadPulseSchedule pulses = ReadPulseSchedule::for_states(space.states);
    const int bl0 = layout.bl_base[static_cast<std::size_t>(expert)];

    GemvResult res;
    res.output.assign(static_cast<std::size_t>(layout.out_dim), 0);

    // rows grouped by layer, preserving row order within each group
    std::vector<int> order(static_cast<std::size_t>(layout.in_dim));
    for (int i = 0; i < layout.in_dim; ++i)
        order[static_cast<std::size_t>(i)] = i;
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return slots[static_cast<std::size_t>(a)].layer < slots[static_cast<std::size_t>(b)].layer;
    });

    std::size_t pos = 0;
    while (pos < order.size()) {
        const int layer = slots[static_cast<std::size_t>(order[pos])].layer;
        CycleCommand cmd;
        cmd.query = query;
        cmd.cim_layer = layer;
        cmd.pulses = pulses;
        while (pos < order.size() &&
               slots[static_cast<std::size_t>(order[pos])].layer == layer &&
               static_cast<int>(cmd.drives.size()) < chunk_limit) {
            const int row = order[pos];
            cmd.drives.push_back({slots[static_cast<std::size_t>(row)].pair,
                                  encode_input(x[static_cast<std::size_t>(row)], space)});
            ++pos;
        }
        const SenseResult sense = execute_cycle(plane, cmd, variation, adc);
        for (int o = 0; o < layout.out_dim; ++o)
            res.output[static_cast<std::size_t>(o)] += round_half_away(
                adc.dequantize(sense.per_bitline[static_cast<std::size_t>(bl0 + o)].quantized));
        ++res.cycles;
    }
    return res;
}

} // namespace nandcim
