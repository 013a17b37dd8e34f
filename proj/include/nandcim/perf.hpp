#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "nandcim/calibration.hpp"
#include "nandcim/cam.hpp"
#include "nandcim/common.hpp"
#include "nandcim/encoding.hpp"
#include "nandcim/input_limit.hpp"
#include "nandcim/mapping.hpp"
#include "nandcim/plane.hpp"
#include "nandcim/workload.hpp"

namespace nandcim {

/// Cumulative architecture stages of the ablation:
///  base          contiguous mapping, single-page compute, level-serial
///                weights, every expert computed per cycle
///  cam           interleaved mapping gated by in-string identifier match
///  cam+block     adds block-wise weights across all S string-select
///                lines with in-situ signed multibit inputs
///  cam+block+multibit
///                adds m-state compute cells read with m-1 pulses
enum class Stage { Base, CamGated, BlockParallel, MultibitCell };

inline const char* to_string(Stage s) {
    switch (s) {
    case Stage::Base: return "base";
    case Stage::CamGated: return "cam";
    case Stage::BlockParallel: return "cam+block";
    case Stage::MultibitCell: return "cam+block+multibit";
    }
    return "?";
}

inline Stage stage_from_string(const std::string& s) {
    if (s == "base") return Stage::Base;
    if (s == "cam") return Stage::CamGated;
    if (s == "cam+block") return Stage::BlockParallel;
    if (s == "cam+block+multibit") return Stage::MultibitCell;
    throw SchemaError("stages", "unknown stage '" + s + "'");
}

struct PerfInputs {
    MoESpec moe;
    PlaneGeometry geom;      // cam_layers ignored; derived per stage
    CodeSpace space;         // states field is the SLC/block-wise space (m = 2)
    int multibit_states = 3; // m for the multibit stage
    double sigma = 0.15;
    int granularity = 1;
    TimingModel timing;
    EnergyModel energy;
    AdcModel adc;
    double confidence = 0.322;
    int trials = 10000;
    std::uint64_t mc_seed = 0x5eedcafe;
};

struct EnergyBreakdown {
    double array = 0.0; // precharge + string + search
    double adc = 0.0;
    double total() const { return array + adc; }
};

struct PerfReport {
    Stage stage = Stage::Base;
    int cell_states = 2;
    int input_limit = 0;            // driven pairs per conversion group
    double cycles_per_token = 0.0;
    double latency_per_token = 0.0; // ns
    double throughput = 0.0;        // unit-cell ops per ns
    EnergyBreakdown breakdown;
    double energy_per_token = 0.0;  // pJ
    double efficiency = 0.0;        // ops per pJ
    double area_efficiency = 1.0;
    double aedp = 0.0;
    double useful_ops_per_token = 0.0;
};

namespace detail {

struct StageShape {
    int states = 2;       // compute cell states at this stage
    bool gated = false;   // identifier-gated interleaving
    bool blockwise = false;
    int cam_layers = 0;
};

inline StageShape stage_shape(Stage stage, const PerfInputs& in) {
    StageShape s;
    switch (stage) {
    case Stage::Base:
        break;
    case Stage::CamGated:
        s.gated = true;
        break;
    case Stage::BlockParallel:
        s.gated = true;
        s.blockwise = true;
        break;
    case Stage::MultibitCell:
        if (in.multibit_states < 3)
            throw UnsupportedConfigError(
                "evaluate: the multibit stage needs at least 3 cell states");
        s.gated = true;
        s.blockwise = true;
        s.states = in.multibit_states;
        break;
    }
    if (s.gated) {
        int id_space = 1;
        while (id_space < in.moe.num_experts)
            id_space <<= 1;
        s.cam_layers = static_cast<int>(entry_plan(id_space).size());
    }
    return s;
}

} // namespace detail

/// Driven-pair limit for a stage's code space at the configured sigma.
inline int stage_input_limit(Stage stage, const PerfInputs& in) {
    const detail::StageShape shape = detail::stage_shape(stage, in);
    CodeSpace space(in.space.ssls, shape.states, in.space.input_levels);
    return max_input_dimension(space, in.adc, VariationModel(in.sigma, in.mc_seed), in.confidence,
                               in.trials);
}

/// Analytical throughput/energy/area evaluation of one stage.
///
/// Work is counted in unit-cell operations: a full multibit MAC engages
/// S*(m-1) of them. The level-serial stages (base, cam) retire one
/// unit-cell op per row-bitline slot per cycle; block-wise operation
/// retires all S*(m-1) at once. The baseline computes every expert and
/// serializes each drive chunk; gating removes the redundant experts and
/// unit-parallel row chunks (units_per_expert tiles, digital partial-sum
/// reduction) collapse the drive serialization.
inline PerfReport evaluate(Stage stage, const PerfInputs& in) {
    in.moe.validate();
    in.geom.validate();
    in.space.validate();
    in.timing.validate();
    in.energy.validate();
    in.adc.validate();
    if (in.space.states != 2)
        throw UnsupportedConfigError("evaluate: the base code space is single-level (2 states); "
                                     "multibit_states selects the multibit stage's cell");

    const detail::StageShape shape = detail::stage_shape(stage, in);
    const int N = in.moe.num_experts;
    const int k = in.moe.top_k;
    const int S = in.space.ssls;
    const double in_dim = in.moe.in_dim;
    const double out_dim = in.moe.out_dim;

    const int pairs = in.geom.block_pairs();
    if (pairs % in.granularity != 0)
        throw UnsupportedConfigError("evaluate: granularity must divide the block-pair count");
    const int units_total = pairs / in.granularity;
    if (units_total < N)
        throw UnsupportedConfigError("evaluate: fewer interleave units than experts");
    const double units_per_expert = std::floor(static_cast<double>(units_total) / N);

    const int d_limit = stage_input_limit(stage, in);
    if (d_limit < 1)
        throw UnsupportedConfigError(
            "evaluate: no input dimension survives this sigma; lower sigma or the cell states");

    const double ops_per_mac = static_cast<double>(S) * (shape.states - 1);
    const double useful_macs = static_cast<double>(k) * in_dim * out_dim;
    const double useful_ops = useful_macs * ops_per_mac;

    // serialization (real-valued for the rate model, whole cycles for the
    // event counts)
    const double chunks = std::max(1.0, in_dim / d_limit);
    const double chunks_int = std::ceil(in_dim / d_limit);
    const double level_steps = shape.blockwise ? 1.0 : static_cast<double>(S) * (shape.states - 1);

    double cycles_rate = 0.0, cycles_int = 0.0, conversions = 0.0, string_ops = 0.0;
    if (stage == Stage::Base) {
        cycles_rate = level_steps * chunks;
        cycles_int = level_steps * chunks_int;
        conversions = static_cast<double>(N) * out_dim * level_steps * chunks_int;
        string_ops = static_cast<double>(N) * in_dim * out_dim * ops_per_mac;
    } else {
        const double tile_chunks = std::max(1.0, in_dim / (units_per_expert * d_limit));
        cycles_rate = static_cast<double>(k) * level_steps * tile_chunks;
        cycles_int = static_cast<double>(k) * level_steps * std::ceil(tile_chunks);
        const double pulses = static_cast<double>(shape.states - 1);
        const double conv_per_group = shape.blockwise ? pulses : 1.0;
        conversions = static_cast<double>(k) * out_dim * level_steps * chunks_int * conv_per_group;
        string_ops = useful_ops;
    }

    const double t_cycle = in.timing.cycle_time(shape.states);

    PerfReport rep;
    rep.stage = stage;
    rep.cell_states = shape.states;
    rep.input_limit = d_limit;
    rep.cycles_per_token = cycles_int;
    rep.latency_per_token = cycles_int * t_cycle;
    rep.throughput = useful_ops / (cycles_rate * t_cycle);
    rep.breakdown.array = cycles_int * in.energy.precharge_per_cycle +
                          string_ops * in.energy.string_per_pulse +
                          (shape.gated ? cycles_int * in.energy.cam_search_per_cycle : 0.0);
    rep.breakdown.adc = conversions * in.adc.energy_per_conversion;
    rep.energy_per_token = rep.breakdown.total();
    rep.efficiency = useful_ops / rep.energy_per_token;
    CodeSpace stage_space(S, shape.states, in.space.input_levels);
    rep.area_efficiency = scheme_utilization(shape.cam_layers, in.geom.layers_total, stage_space,
                                             shape.blockwise);
    rep.useful_ops_per_token = useful_ops;
    rep.aedp = rep.energy_per_token * rep.latency_per_token / rep.area_efficiency;
    return rep;
}

inline EnergyBreakdown energy_breakdown(Stage stage, const PerfInputs& in) {
    return evaluate(stage, in).breakdown;
}

/// Area-energy-delay product of a finished report.
inline double aedp(const PerfReport& rep) {
    return rep.energy_per_token * rep.latency_per_token / rep.area_efficiency;
}

struct AblationRow {
    PerfReport report;
    double throughput_gain = 1.0;  // vs base
    double efficiency_gain = 1.0;  // vs base
    double aedp_reduction = 1.0;   // base aedp / stage aedp
};

inline std::vector<AblationRow> ablation(const std::vector<Stage>& stages, const PerfInputs& in) {
    const PerfReport base = evaluate(Stage::Base, in);
    std::vector<AblationRow> rows;
    rows.reserve(stages.size());
    for (Stage s : stages) {
        AblationRow row;
        row.report = evaluate(s, in);
        row.throughput_gain = row.report.throughput / base.throughput;
        row.efficiency_gain = row.report.efficiency / base.efficiency;
        row.aedp_reduction = aedp(base) / aedp(row.report);
        rows.push_back(row);
    }
    return rows;
}

} // namespace nandcim
