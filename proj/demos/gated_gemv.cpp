// Minimal walkthrough: place four experts interleaved on a small plane,
// program random weights, and show that a broadcast identifier selects
// exactly one expert's product while mismatched experts stay silent.

#include <cstdio>
#include <vector>

#include "nandcim/nandcim.hpp"
#include "nandcim/selfcheck.hpp"

using namespace nandcim;

int main() {
    MoESpec moe;
    moe.num_experts = 4;
    moe.top_k = 1;
    moe.in_dim = 8;
    moe.out_dim = 4;

    const CodeSpace space(4, 3, 2); // S=4 ssls, 3-state cells, inputs -2..2
    PlaneGeometry geom;
    geom.ssls_per_gsl = space.ssls;
    geom.cam_layers = 1; // 4 identifiers fit one 2-bit match layer
    geom.layers_total = 4;
    geom.num_blocks = 2 * moe.num_experts * moe.in_dim;
    geom.page_size = moe.out_dim;

    const ExpertLayout layout = place(moe, geom, MappingStrategy::Interleaved);
    Plane plane(geom, layout.cam_plan, space.states);

    detail::Rng rng(7);
    std::vector<std::vector<std::vector<int>>> weights(4);
    for (auto& mat : weights) {
        mat.assign(moe.in_dim, std::vector<int>(moe.out_dim, 0));
        for (auto& row : mat)
            for (auto& v : row)
                v = rng.range(-space.weight_max(), space.weight_max());
    }
    program_layout(plane, layout, space, weights);

    std::vector<int> x(moe.in_dim);
    for (auto& v : x)
        v = rng.range(-space.input_max(), space.input_max());

    const AdcModel adc = make_exact_adc(space, moe.in_dim);
    const VariationModel ideal(0.0, 1);

    std::printf("input:");
    for (int v : x)
        std::printf(" %d", v);
    std::printf("\n");
    for (int e = 0; e < moe.num_experts; ++e) {
        const GemvResult got = run_gemv(plane, layout, e, weights[e], x, space, ideal, adc);
        const std::vector<long long> want = reference_gemv(weights[e], x);
        std::printf("expert %d (query matches its identifier): got", e);
        for (long long v : got.output)
            std::printf(" %lld", v);
        std::printf("  reference");
        for (long long v : want)
            std::printf(" %lld", v);
        std::printf("  cycles=%d\n", got.cycles);
    }

    // a query that matches nobody senses zero everywhere
    CycleCommand cmd;
    cmd.query = layout.query_for(3);
    cmd.cim_layer = geom.cam_layers;
    cmd.pulses = ReadPulseSchedule::for_states(space.states);
    for (const auto& slot : layout.rows[0])
        if (slot.layer == geom.cam_layers)
            cmd.drives.push_back({slot.pair, encode_input(2, space)});
    const SenseResult sense = execute_cycle(plane, cmd, ideal, adc);
    double total = 0.0;
    for (const auto& s : sense.per_bitline)
        total += s.raw < 0 ? -s.raw : s.raw;
    std::printf("driving expert 0's rows under expert 3's query: total |current| = %g\n", total);
    return 0;
}
