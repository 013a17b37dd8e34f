#pragma once

#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "nandcim/adc.hpp"
#include "nandcim/cam.hpp"
#include "nandcim/encoding.hpp"
#include "nandcim/execute.hpp"
#include "nandcim/mapping.hpp"
#include "nandcim/plane.hpp"
#include "nandcim/workload.hpp"

namespace nandcim {

/// Plain integer reference product, computed away from the array path.
inline std::vector<long long> reference_gemv(const std::vector<std::vector<int>>& w,
                                             const std::vector<int>& x) {
    std::vector<long long> y(w.empty() ? 0 : w.front().size(), 0);
    for (std::size_t i = 0; i < w.size(); ++i)
        for (std::size_t o = 0; o < w[i].size(); ++o)
            y[o] += static_cast<long long>(w[i][o]) * x[i];
    return y;
}

struct GemvDivergence {
    int expert = 0;
    int output = 0;       // column index
    long long expected = 0;
    long long actual = 0;
    int pair = 0;         // physical home of the column's first row
    int layer = 0;
    int bitline = 0;
};

struct GemvCheck {
    bool ok = true;
    int instances = 0;
    std::optional<GemvDivergence> first_divergence;

    std::string describe() const {
        if (ok)
            return "gemv: " + std::to_string(instances) + "/" + std::to_string(instances) +
                   " instances exact";
        std::ostringstream os;
        const auto& d = *first_divergence;
        os << "gemv: divergence at expert " << d.expert << " output " << d.output << ": expected "
           << d.expected << ", got " << d.actual << " (pair " << d.pair << ", layer " << d.layer
           << ", bitline " << d.bitline << ")";
        return os.str();
    }
};

struct RandomGemvInstance {
    MoESpec moe;
    CodeSpace space;
    PlaneGeometry geom;
    MappingStrategy strategy = MappingStrategy::Interleaved;
    std::vector<std::vector<std::vector<int>>> weights;
    std::vector<int> x;
    int expert = 0;
};

/// Deterministic random instance within the desk-scale envelope:
/// up to 8 experts, dimensions up to 32, cell states in {2, 3, 4},
/// weights and inputs spanning their full code ranges.
inline RandomGemvInstance make_random_gemv_instance(std::uint64_t seed, int index) {
    detail::Rng rng(detail::hash_combine(seed, static_cast<std::uint64_t>(index)));
    RandomGemvInstance inst;
    const int experts_choices[] = {1, 2, 4, 8};
    inst.moe.num_experts = experts_choices[rng.range(0, 3)];
    inst.moe.top_k = 1;
    inst.moe.in_dim = rng.range(1, 32);
    inst.moe.out_dim = rng.range(1, 32);
    const int m = rng.range(2, 4);
    inst.space = CodeSpace(4, m, 2);
    inst.strategy = rng.range(0, 1) == 0 ? MappingStrategy::Contiguous
                                         : MappingStrategy::Interleaved;

    int id_space = 1;
    while (id_space < inst.moe.num_experts)
        id_space <<= 1;
    const int cam_layers = inst.strategy == MappingStrategy::Interleaved
                               ? static_cast<int>(entry_plan(id_space).size())
                               : 0;
    inst.geom.ssls_per_gsl = inst.space.ssls;
    inst.geom.cam_layers = cam_layers;
    // enough pairs and layers for every placement, plus slack to force
    // layer spill now and then
    const int pairs = inst.strategy == MappingStrategy::Interleaved
                          ? inst.moe.num_experts * ((inst.moe.in_dim + 1) / 2)
                          : (inst.moe.in_dim + 1) / 2;
    inst.geom.num_blocks = 2 * std::max(pairs, inst.moe.num_experts);
    inst.geom.layers_total = cam_layers + 3;
    inst.geom.page_size = inst.strategy == MappingStrategy::Contiguous
                              ? inst.moe.num_experts * inst.moe.out_dim
                              : inst.moe.out_dim;

    const int wmax = inst.space.weight_max();
    const int xmax = inst.space.input_max();
    inst.weights.resize(static_cast<std::size_t>(inst.moe.num_experts));
    for (auto& mat : inst.weights) {
        mat.assign(static_cast<std::size_t>(inst.moe.in_dim),
                   std::vector<int>(static_cast<std::size_t>(inst.moe.out_dim), 0));
        for (auto& row : mat)
            for (auto& v : row)
                v = rng.range(-wmax, wmax);
    }
    inst.x.resize(static_cast<std::size_t>(inst.moe.in_dim));
    for (auto& v : inst.x)
        v = rng.range(-xmax, xmax);
    inst.expert = rng.range(0, inst.moe.num_experts - 1);
    return inst;
}

/// Program the instance onto a fresh plane and compare the sensed product
/// against the integer reference. sigma = 0 runs must agree exactly.
inline GemvCheck check_gemv_instance(const RandomGemvInstance& inst,
                                     Plane* poke_plane = nullptr) {
    GemvCheck check;
    check.instances = 1;
    const ExpertLayout layout = place(inst.moe, inst.geom, inst.strategy);
    Plane owned(inst.geom, layout.cam_plan, inst.space.states);
    Plane& plane = poke_plane ? *poke_plane : owned;
    if (!poke_plane)
        program_layout(plane, layout, inst.space, inst.weights);
    const AdcModel adc = make_exact_adc(inst.space, inst.moe.in_dim);
    const VariationModel no_variation(0.0, 1);
    const GemvResult got = run_gemv(plane, layout, inst.expert,
                                    inst.weights[static_cast<std::size_t>(inst.expert)], inst.x,
                                    inst.space, no_variation, adc);
    const std::vector<long long> want =
        reference_gemv(inst.weights[static_cast<std::size_t>(inst.expert)], inst.x);
    for (int o = 0; o < inst.moe.out_dim; ++o) {
        if (got.output[static_cast<std::size_t>(o)] != want[static_cast<std::size_t>(o)]) {
            check.ok = false;
            GemvDivergence d;
            d.expert = inst.expert;
            d.output = o;
            d.expected = want[static_cast<std::size_t>(o)];
            d.actual = got.output[static_cast<std::size_t>(o)];
            const RowSlot slot = layout.rows[static_cast<std::size_t>(inst.expert)].front();
            d.pair = slot.pair;
            d.layer = slot.layer;
            d.bitline = layout.bl_base[static_cast<std::size_t>(inst.expert)] + o;
            check.first_divergence = d;
            return check;
        }
    }
    return check;
}

inline GemvCheck check_random_gemv(std::uint64_t seed, int instances) {
    GemvCheck all;
    all.instances = instances;
    for (int i = 0; i < instances; ++i) {
        const GemvCheck one = check_gemv_instance(make_random_gemv_instance(seed, i));
        if (!one.ok) {
            all.ok = false;
            all.first_divergence = one.first_divergence;
            all.instances = i + 1;
            return all;
        }
    }
    return all;
}

/// Exhaustive match tables for every layer plan with the given total bits,
/// checked against flat bitwise-XNOR reduction of the identifiers.
inline bool check_match_tables(int max_total_bits, std::string* first_failure = nullptr) {
    std::vector<std::vector<int>> plans;
    std::vector<int> cur;
    // enumerate compositions of 1..max_total_bits into parts of width 1..3
    auto rec = [&](auto&& self, int remaining) -> void {
        if (!cur.empty())
            plans.push_back(cur);
        for (int w = 1; w <= kMaxCamBitsPerLayer && w <= remaining; ++w) {
            cur.push_back(w);
            self(self, remaining - w);
            cur.pop_back();
        }
    };
    rec(rec, max_total_bits);

    for (const auto& plan : plans) {
        int bits = 0;
        for (int w : plan)
            bits += w;
        const int span = 1 << bits;
        for (int e = 0; e < span; ++e) {
            const CamEntry entry = encode_entry(e, plan);
            for (int q = 0; q < span; ++q) {
                const CamQuery query = encode_entry(q, plan);
                const int got = cam_match(entry, query);
                const int want = (e == q) ? 1 : 0; // AND-reduced XNOR of all bits
                if (got != want) {
                    if (first_failure) {
                        std::ostringstream os;
                        os << "match table: plan [";
                        for (std::size_t i = 0; i < plan.size(); ++i)
                            os << (i ? "," : "") << plan[i];
                        os << "] entry " << e << " query " << q << " -> " << got << ", expected "
                           << want;
                        *first_failure = os.str();
                    }
                    return false;
                }
            }
        }
    }
    return true;
}

/// Weight/input codec roundtrips and the exhaustive product grid for the
/// standard spaces.
inline bool check_codec(std::string* first_failure = nullptr) {
    for (int S : {2, 4, 8}) {
        for (int m : {2, 3, 4}) {
            const CodeSpace space(S, m, 2);
            const int wmax = space.weight_max();
            for (int w = -wmax; w <= wmax; ++w) {
                const WeightCode code = encode_weight(w, space);
                if (code.pos_pulse_sum() + code.neg_pulse_sum() != space.weight_code_span() ||
                    decode_weight(code) != w) {
                    if (first_failure)
                        *first_failure = "codec: roundtrip failed at S=" + std::to_string(S) +
                                         " m=" + std::to_string(m) + " w=" + std::to_string(w);
                    return false;
                }
                for (int x = -space.input_max(); x <= space.input_max(); ++x) {
                    if (signed_product_model(x, w, space) != x * w) {
                        if (first_failure)
                            *first_failure = "codec: product grid failed at S=" +
                                             std::to_string(S) + " m=" + std::to_string(m) +
                                             " x=" + std::to_string(x) + " w=" + std::to_string(w);
                        return false;
                    }
                }
            }
        }
    }
    return true;
}

} // namespace nandcim
