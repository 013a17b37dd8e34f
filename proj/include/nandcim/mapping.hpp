#pragma once

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "nandcim/cam.hpp"
#include "nandcim/common.hpp"
#include "nandcim/encoding.hpp"
#include "nandcim/plane.hpp"
#include "nandcim/workload.hpp"

namespace nandcim {

enum class MappingStrategy { Contiguous, Interleaved };

inline const char* to_string(MappingStrategy s) {
    return s == MappingStrategy::Contiguous ? "contiguous" : "interleaved";
}

/// Physical home of one weight row: the block pair whose source line
/// carries the row's input, and the layer holding its cells.
struct RowSlot {
    int pair = 0;
    int layer = 0; // absolute layer index (below the match segment)

    bool operator==(const RowSlot&) const = default;
};

/// Placement of all expert matrices onto a plane. Row r of expert e lives
/// at rows[e][r]; output column c of expert e lives at bitline
/// bl_base[e] + c. Interleaved placement spreads each expert round-robin
/// over units of `granularity` consecutive block pairs and tags every
/// pair with its owner's identifier; contiguous placement lines experts
/// up along the page and stores no identifiers.
struct ExpertLayout {
    MappingStrategy strategy = MappingStrategy::Interleaved;
    int granularity = 1;
    int num_experts = 0;
    int in_dim = 0;
    int out_dim = 0;
    std::vector<int> cam_plan;
    std::vector<std::vector<RowSlot>> rows; // [expert][row]
    std::vector<int> bl_base;               // [expert]
    std::map<int, CamEntry> cam_entries;    // block pair -> owner entry

    CamQuery query_for(int expert) const {
        if (cam_plan.empty())
            return CamQuery{};
        return encode_entry(expert, cam_plan);
    }
};

struct UtilizationReport {
    double storage_utilization = 1.0;
    double redundancy_ratio = 0.0;
};

/// Weight bits stored per cell, relative to single-level cells: one
/// signed block-wise weight spans 2S cells and can take S(m-1)+1 values.
inline double thermometer_utilization(const CodeSpace& space) {
    const double levels = static_cast<double>(space.weight_code_span() + 1);
    return std::log2(levels) / (2.0 * space.ssls);
}

/// Utilization of the storage scheme itself: the fraction of layers left
/// for compute, times the encoding density (1.0 for plain binary cells).
inline double scheme_utilization(int cam_layers, int layers_total, const CodeSpace& space,
                                 bool blockwise_encoding) {
    if (cam_layers < 0 || cam_layers >= layers_total)
        throw ContractError("scheme_utilization: cam layer count out of range");
    const double layer_factor =
        static_cast<double>(layers_total - cam_layers) / static_cast<double>(layers_total);
    return layer_factor * (blockwise_encoding ? thermometer_utilization(space) : 1.0);
}

inline ExpertLayout place(const MoESpec& model, const PlaneGeometry& geom,
                          MappingStrategy strategy, int granularity = 1,
                          int max_cam_bits = 2) {
    model.validate();
    geom.validate();
    if (granularity < 1)
        throw UnsupportedConfigError("place: granularity must be >= 1");

    ExpertLayout layout;
    layout.strategy = strategy;
    layout.granularity = granularity;
    layout.num_experts = model.num_experts;
    layout.in_dim = model.in_dim;
    layout.out_dim = model.out_dim;
    layout.rows.assign(static_cast<std::size_t>(model.num_experts), {});
    layout.bl_base.assign(static_cast<std::size_t>(model.num_experts), 0);

    const int pairs = geom.block_pairs();
    const int cim_layers = geom.cim_layers();

    if (strategy == MappingStrategy::Contiguous) {
        if (model.num_experts * model.out_dim > geom.page_size)
            throw CapacityError("place: " + std::to_string(model.num_experts) + " experts x " +
                                std::to_string(model.out_dim) +
                                " outputs exceed the page width of " +
                                std::to_string(geom.page_size));
        if (model.in_dim > pairs * cim_layers)
            throw CapacityError("place: input dimension " + std::to_string(model.in_dim) +
                                " exceeds " + std::to_string(pairs * cim_layers) +
                                " row slots");
        for (int e = 0; e < model.num_experts; ++e) {
            layout.bl_base[static_cast<std::size_t>(e)] = e * model.out_dim;
            auto& rows = layout.rows[static_cast<std::size_t>(e)];
            rows.reserve(static_cast<std::size_t>(model.in_dim));
            for (int r = 0; r < model.in_dim; ++r)
                rows.push_back({r % pairs, geom.cam_layers + r / pairs});
        }
        return layout;
    }

    // interleaved
    if (pairs % granularity != 0)
        throw UnsupportedConfigError("place: granularity " + std::to_string(granularity) +
                                     " does not divide " + std::to_string(pairs) +
                                     " block pairs");
    const int units = pairs / granularity;
    if (units < model.num_experts)
        throw CapacityError("place: " + std::to_string(units) + " interleave units cannot host " +
                            std::to_string(model.num_experts) + " experts");
    if (model.out_dim > geom.page_size)
        throw CapacityError("place: output dimension exceeds the page width");

    int id_space = 1;
    while (id_space < model.num_experts)
        id_space <<= 1;
    layout.cam_plan = geom.cam_layers > 0 ? entry_plan(id_space, max_cam_bits) : std::vector<int>{};
    if (static_cast<int>(layout.cam_plan.size()) != geom.cam_layers)
        throw CapacityError("place: identifier plan needs " +
                            std::to_string(layout.cam_plan.size()) + " match layers, geometry has " +
                            std::to_string(geom.cam_layers));

    // round-robin unit ownership; each unit's pairs host one row per layer
    std::vector<std::vector<int>> own_pairs(static_cast<std::size_t>(model.num_experts));
    for (int u = 0; u < units; ++u) {
        const int owner = u % model.num_experts;
        for (int p = 0; p < granularity; ++p)
            own_pairs[static_cast<std::size_t>(owner)].push_back(u * granularity + p);
        if (!layout.cam_plan.empty()) {
            const CamEntry entry = encode_entry(owner, layout.cam_plan);
            for (int p = 0; p < granularity; ++p)
                layout.cam_entries[u * granularity + p] = entry;
        }
    }
    for (int e = 0; e < model.num_experts; ++e) {
        const auto& own = own_pairs[static_cast<std::size_t>(e)];
        const long long capacity = static_cast<long long>(own.size()) * cim_layers;
        if (model.in_dim > capacity)
            throw CapacityError("place: expert " + std::to_string(e) + " needs " +
                                std::to_string(model.in_dim) + " row slots, owns " +
                                std::to_string(capacity));
        auto& rows = layout.rows[static_cast<std::size_t>(e)];
        rows.reserve(static_cast<std::size_t>(model.in_dim));
        for (int r = 0; r < model.in_dim; ++r) {
            const int pair = own[static_cast<std::size_t>(r) % own.size()];
            const int layer = geom.cam_layers + r / static_cast<int>(own.size());
            rows.push_back({pair, layer});
        }
    }
    return layout;
}

/// Storage utilization and wasted-work fraction of a placement. The
/// interleaved-without-identifiers variant must leave foreign regions
/// blank, which scales its usable storage by the activated ratio.
inline UtilizationReport utilization(const ExpertLayout& layout, const PlaneGeometry& geom,
                                     const CodeSpace& space, const MoESpec& model) {
    UtilizationReport rep;
    rep.storage_utilization =
        scheme_utilization(geom.cam_layers, geom.layers_total, space, /*blockwise=*/true);
    if (layout.strategy == MappingStrategy::Contiguous) {
        rep.redundancy_ratio = 1.0 - model.activated_ratio();
    } else {
        rep.redundancy_ratio = 0.0;
        if (layout.cam_entries.empty())
            rep.storage_utilization *= model.activated_ratio();
    }
    return rep;
}

/// Program every placed expert matrix and every pair identifier.
/// weights[e][i][o] feeds input row i into output column o of expert e.
inline void program_layout(Plane& plane, const ExpertLayout& layout, const CodeSpace& space,
                           const std::vector<std::vector<std::vector<int>>>& weights) {
    if (static_cast<int>(weights.size()) != layout.num_experts)
        throw ContractError("program_layout: weight count does not match expert count");
    if (plane.cim_states() != space.states)
        throw ContractError("program_layout: plane cell states disagree with the code space");
    const auto& geom = plane.geometry();
    for (const auto& [pair, entry] : layout.cam_entries) {
        plane.program_cam_entry(2 * pair, entry);
        plane.program_cam_entry(2 * pair + 1, entry);
    }
    for (int e = 0; e < layout.num_experts; ++e) {
        const auto& w = weights[static_cast<std::size_t>(e)];
        if (static_cast<int>(w.size()) != layout.in_dim)
            throw ContractError("program_layout: expert " + std::to_string(e) + " has " +
                                std::to_string(w.size()) + " rows, layout expects " +
                                std::to_string(layout.in_dim));
        for (int i = 0; i < layout.in_dim; ++i) {
            if (static_cast<int>(w[static_cast<std::size_t>(i)].size()) != layout.out_dim)
                throw ContractError("program_layout: expert " + std::to_string(e) + " row " +
                                    std::to_string(i) + " has the wrong width");
            const RowSlot slot = layout.rows[static_cast<std::size_t>(e)][static_cast<std::size_t>(i)];
            const int pos_block = 2 * slot.pair;
            const int neg_block = 2 * slot.pair + 1;
            for (int o = 0; o < layout.out_dim; ++o) {
                const int bl = layout.bl_base[static_cast<std::size_t>(e)] + o;
                if (bl >= geom.page_size)
                    throw CapacityError("program_layout: bitline " + std::to_string(bl) +
                                        " outside the page");
                const WeightCode code =
                    encode_weight(w[static_cast<std::size_t>(i)][static_cast<std::size_t>(o)], space);
                for (int s = 0; s < space.ssls; ++s) {
                    plane.set_level(pos_block, s, slot.layer, bl,
                                    code.pos_block[static_cast<std::size_t>(s)].level);
                    plane.set_level(neg_block, s, slot.layer, bl,
                                    code.neg_block[static_cast<std::size_t>(s)].level);
                }
            }
        }
    }
}

} // namespace nandcim
