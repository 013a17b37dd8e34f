#pragma once

#include <string>
#include <vector>

#include "nandcim/common.hpp"

namespace nandcim {

constexpr int kMaxCamBitsPerLayer = 3; // 8 threshold states per cell

/// One stored identifier, split across the match layers of a string.
/// Each layer holds `value` in a cell with 2^bit_width threshold states.
struct CamLayer {
    int bit_width = 1;
    int value = 0;
};

struct CamEntry {
    std::vector<CamLayer> layers;

    int total_bits() const {
        int n = 0;
        for (const auto& l : layers)
            n += l.bit_width;
        return n;
    }
};

/// The broadcast search word; must have the same layer shape as the
/// entries it is compared against.
using CamQuery = CamEntry;

namespace detail {

inline void check_cam_layer(const CamLayer& l, const char* what) {
    if (l.bit_width < 1 || l.bit_width > kMaxCamBitsPerLayer)
        throw ContractError(std::string(what) + ": layer width " + std::to_string(l.bit_width) +
                            " outside [1, " + std::to_string(kMaxCamBitsPerLayer) + "]");
    if (l.value < 0 || l.value >= (1 << l.bit_width))
        throw ContractError(std::string(what) + ": value " + std::to_string(l.value) +
                            " does not fit " + std::to_string(l.bit_width) + " bits");
}

} // namespace detail

/// Match of a single layer: 1 iff the stored value and the applied query
/// value are identical (the cell pair conducts only on equality).
inline int cam_match_layer(int entry_value, int query_value, int bit_width) {
    detail::check_cam_layer({bit_width, entry_value}, "cam_match_layer entry");
    detail::check_cam_layer({bit_width, query_value}, "cam_match_layer query");
    return entry_value == query_value ? 1 : 0;
}

/// Match of a full entry: layers sit in series on the string, so the
/// result is the AND over per-layer matches.
inline int cam_match(const CamEntry& entry, const CamQuery& query) {
    if (entry.layers.size() != query.layers.size())
        throw ContractError("cam_match: entry has " + std::to_string(entry.layers.size()) +
                            " layers, query has " + std::to_string(query.layers.size()));
    for (std::size_t i = 0; i < entry.layers.size(); ++i) {
        if (entry.layers[i].bit_width != query.layers[i].bit_width)
            throw ContractError("cam_match: width mismatch at layer " + std::to_string(i));
        if (cam_match_layer(entry.layers[i].value, query.layers[i].value,
                            entry.layers[i].bit_width) == 0)
            return 0;
    }
    return 1;
}

/// Layer-width plan for identifying one of `num_ids` owners (a power of
/// two). Minimizes layer count for the given per-cell width cap, putting
/// the remainder width first: 8 ids -> [1,2], 32 ids -> [1,2,2].
inline std::vector<int> entry_plan(int num_ids, int max_bits_per_layer = 2) {
    if (num_ids < 1)
        throw UnsupportedConfigError("entry_plan: need at least one identifier");
    if ((num_ids & (num_ids - 1)) != 0)
        throw UnsupportedConfigError("entry_plan: " + std::to_string(num_ids) +
                                     " identifiers; only powers of two are mappable");
    if (max_bits_per_layer < 1 || max_bits_per_layer > kMaxCamBitsPerLayer)
        throw UnsupportedConfigError("entry_plan: per-layer width cap must be in [1, " +
                                     std::to_string(kMaxCamBitsPerLayer) + "]");
    int bits = 0;
    for (int v = num_ids; v > 1; v >>= 1)
        ++bits;
    std::vector<int> plan;
    if (bits == 0)
        return plan;
    const int layers = (bits + max_bits_per_layer - 1) / max_bits_per_layer;
    int first = bits - (layers - 1) * max_bits_per_layer;
    plan.push_back(first);
    for (int i = 1; i < layers; ++i)
        plan.push_back(max_bits_per_layer);
    return plan;
}

/// Encode an integer identifier onto a layer plan, most significant layer
/// first.
inline CamEntry encode_entry(int id, const std::vector<int>& plan) {
    int bits = 0;
    for (int w : plan)
        bits += w;
    if (id < 0 || (bits < 31 && id >= (1 << bits)))
        throw ContractError("encode_entry: id " + std::to_string(id) + " does not fit " +
                            std::to_string(bits) + " plan bits");
    CamEntry e;
    int shift = bits;
    for (int w : plan) {
        shift -= w;
        e.layers.push_back({w, (id >> shift) & ((1 << w) - 1)});
    }
    return e;
}

} // namespace nandcim
