#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <thread>

#include "nandcim/adc.hpp"
#include "nandcim/execute.hpp"
#include "nandcim/mapping.hpp"
#include "nandcim/plane.hpp"
#include "nandcim/selfcheck.hpp"
#include "oracles.hpp"

using namespace nandcim;

namespace {

struct Bed {
    MoESpec moe;
    CodeSpace space;
    PlaneGeometry geom;
    ExpertLayout layout;
    Plane plane;
    std::vector<std::vector<std::vector<int>>> weights;

    static Bed make(int experts, int in_dim, int out_dim, int states, MappingStrategy strategy,
                    std::uint64_t seed) {
        Bed b{.moe = {},
              .space = CodeSpace(4, states, 2),
              .geom = {},
              .layout = {},
              .plane = Plane(),
              .weights = {}};
        b.moe.num_experts = experts;
        b.moe.top_k = 1;
        b.moe.in_dim = in_dim;
        b.moe.out_dim = out_dim;
        int id_space = 1;
        while (id_space < experts)
            id_space <<= 1;
        const int cam = strategy == MappingStrategy::Interleaved
                            ? static_cast<int>(entry_plan(id_space).size())
                            : 0;
        b.geom.ssls_per_gsl = 4;
        b.geom.cam_layers = cam;
        b.geom.layers_total = cam + 2;
        b.geom.num_blocks =
            2 * (strategy == MappingStrategy::Interleaved ? experts * ((in_dim + 1) / 2)
                                                          : (in_dim + 1) / 2);
        b.geom.page_size =
            strategy == MappingStrategy::Contiguous ? experts * out_dim : out_dim;
        b.layout = place(b.moe, b.geom, strategy);
        b.plane = Plane(b.geom, b.layout.cam_plan, states);
        detail::Rng rng(seed);
        b.weights.resize(static_cast<std::size_t>(experts));
        for (auto& mat : b.weights) {
            mat.assign(static_cast<std::size_t>(in_dim),
                       std::vector<int>(static_cast<std::size_t>(out_dim), 0));
            for (auto& row : mat)
                for (auto& v : row)
                    v = rng.range(-b.space.weight_max(), b.space.weight_max());
        }
        program_layout(b.plane, b.layout, b.space, b.weights);
        return b;
    }

    std::vector<int> random_x(std::uint64_t seed) const {
        detail::Rng rng(seed);
        std::vector<int> x(static_cast<std::size_t>(moe.in_dim));
        for (auto& v : x)
            v = rng.range(-space.input_max(), space.input_max());
        return x;
    }
};

} // namespace

TEST_CASE("adc: quantization stays within half an lsb and clamps outside") {
    AdcModel adc{4, 16.0, 1.0, 0.0};
    CHECK(adc.lsb() == 1.0);
    for (double raw = -15.7; raw < 15.7; raw += 0.37) {
        const long long q = adc.quantize(raw);
        CHECK(std::fabs(adc.dequantize(q) - raw) <= adc.lsb() / 2);
    }
    CHECK(adc.quantize(1000.0) == 16);
    CHECK(adc.quantize(-1000.0) == -16);
    // round half away from zero
    CHECK(adc.quantize(0.5) == 1);
    CHECK(adc.quantize(-0.5) == -1);
}

TEST_CASE("single pair: sensed product equals the encoded model") {
    Bed b = Bed::make(1, 1, 1, 3, MappingStrategy::Interleaved, 5);
    b.weights[0][0][0] = 3;
    program_layout(b.plane, b.layout, b.space, b.weights);

    const AdcModel adc = make_exact_adc(b.space, 1);
    const VariationModel ideal(0.0, 1);
    for (int x = -2; x <= 2; ++x) {
        const GemvResult r = run_gemv(b.plane, b.layout, 0, b.weights[0], {x}, b.space, ideal, adc);
        CHECK(r.output[0] == 3 * x);
        CHECK(r.output[0] == signed_product_model(x, 3, b.space));
    }
}

TEST_CASE("array-evaluated product grid is exact for every in-range pair") {
    for (int states : {2, 3, 4}) {
        Bed b = Bed::make(1, 1, 1, states, MappingStrategy::Interleaved, 3);
        const AdcModel adc = make_exact_adc(b.space, 1);
        const VariationModel ideal(0.0, 1);
        for (int w = -b.space.weight_max(); w <= b.space.weight_max(); ++w) {
            b.weights[0][0][0] = w;
            program_layout(b.plane, b.layout, b.space, b.weights);
            for (int x = -b.space.input_max(); x <= b.space.input_max(); ++x) {
                const GemvResult r =
                    run_gemv(b.plane, b.layout, 0, b.weights[0], {x}, b.space, ideal, adc);
                CHECK(r.output[0] == static_cast<long long>(x) * w);
            }
        }
    }
}

TEST_CASE("mismatched query on every pair senses all zeros") {
    Bed b = Bed::make(4, 6, 5, 2, MappingStrategy::Interleaved, 11);
    const AdcModel adc = make_exact_adc(b.space, b.moe.in_dim);
    const VariationModel var(0.15, 3);

    CycleCommand cmd;
    cmd.query = encode_entry(3, b.layout.cam_plan); // drive expert 0 under query 3
    cmd.cim_layer = b.geom.cam_layers;
    cmd.pulses = ReadPulseSchedule::for_states(2);
    for (int i = 0; i < b.moe.in_dim; ++i) {
        const RowSlot slot = b.layout.rows[0][static_cast<std::size_t>(i)];
        if (slot.layer == cmd.cim_layer)
            cmd.drives.push_back({slot.pair, encode_input(2, b.space)});
    }
    const SenseResult sense = execute_cycle(b.plane, cmd, var, adc);
    for (const auto& s : sense.per_bitline) {
        CHECK(s.raw == 0.0);
        CHECK(s.quantized == 0);
    }
}

TEST_CASE("sixteen driven pairs reproduce the integer dot product") {
    Bed b = Bed::make(1, 16, 8, 3, MappingStrategy::Interleaved, 21);
    const AdcModel adc = make_exact_adc(b.space, 16);
    const VariationModel ideal(0.0, 1);
    const std::vector<int> x = b.random_x(77);
    const GemvResult r = run_gemv(b.plane, b.layout, 0, b.weights[0], x, b.space, ideal, adc);
    const auto want = oracle::gemv(b.weights[0], x);
    for (int o = 0; o < b.moe.out_dim; ++o)
        CHECK(r.output[static_cast<std::size_t>(o)] == want[static_cast<std::size_t>(o)]);
}

TEST_CASE("identity matrix returns the input") {
    Bed b = Bed::make(1, 6, 6, 2, MappingStrategy::Interleaved, 31);
    for (int i = 0; i < 6; ++i)
        for (int o = 0; o < 6; ++o)
            b.weights[0][static_cast<std::size_t>(i)][static_cast<std::size_t>(o)] =
                i == o ? 1 : 0;
    program_layout(b.plane, b.layout, b.space, b.weights);
    const AdcModel adc = make_exact_adc(b.space, 6);
    const std::vector<int> x{2, -1, 0, 1, -2, 2};
    const GemvResult r =
        run_gemv(b.plane, b.layout, 0, b.weights[0], x, b.space, VariationModel(0.0, 1), adc);
    for (int i = 0; i < 6; ++i)
        CHECK(r.output[static_cast<std::size_t>(i)] == x[static_cast<std::size_t>(i)]);
}

TEST_CASE("hand-computed row product") {
    // x = [1, -2] against weight column [3, -1] gives 5
    Bed c = Bed::make(1, 2, 1, 3, MappingStrategy::Interleaved, 41);
    c.weights[0][0][0] = 3;
    c.weights[0][1][0] = -1;
    program_layout(c.plane, c.layout, c.space, c.weights);
    const GemvResult r = run_gemv(c.plane, c.layout, 0, c.weights[0], {1, -2}, c.space,
                                  VariationModel(0.0, 1), make_exact_adc(c.space, 2));
    CHECK(r.output[0] == 5);
}

TEST_CASE("functional exactness across random shapes and strategies") {
    const GemvCheck check = check_random_gemv(0xabcdef, 60);
    INFO(check.describe());
    CHECK(check.ok);
}

TEST_CASE("one hundred random 16x16 products are exact") {
    for (int i = 0; i < 100; ++i) {
        Bed b = Bed::make(1, 16, 16, 2 + i % 3, MappingStrategy::Interleaved,
                          0x1616ULL + static_cast<std::uint64_t>(i));
        const std::vector<int> x = b.random_x(1000 + static_cast<std::uint64_t>(i));
        const GemvResult r = run_gemv(b.plane, b.layout, 0, b.weights[0], x, b.space,
                                      VariationModel(0.0, 1), make_exact_adc(b.space, 16));
        CHECK(r.output == oracle::gemv(b.weights[0], x));
    }
}

TEST_CASE("gating soundness: foreign weights never leak into a query") {
    for (int trial = 0; trial < 20; ++trial) {
        RandomGemvInstance inst = make_random_gemv_instance(0x9e3779b9, trial);
        if (inst.strategy != MappingStrategy::Interleaved || inst.moe.num_experts < 2)
            continue;
        const ExpertLayout layout = place(inst.moe, inst.geom, inst.strategy);
        Plane plane(inst.geom, layout.cam_plan, inst.space.states);
        program_layout(plane, layout, inst.space, inst.weights);
        const AdcModel adc = make_exact_adc(inst.space, inst.moe.in_dim);
        const VariationModel var(0.15, 55); // gating must hold under variation too
        const GemvResult before = run_gemv(plane, layout, inst.expert,
                                           inst.weights[static_cast<std::size_t>(inst.expert)],
                                           inst.x, inst.space, var, adc);
        // mutate every weight of a different expert
        const int other = (inst.expert + 1) % inst.moe.num_experts;
        auto mutated = inst.weights;
        for (auto& row : mutated[static_cast<std::size_t>(other)])
            for (auto& v : row)
                v = v == inst.space.weight_max() ? -inst.space.weight_max() : v + 1;
        program_layout(plane, layout, inst.space, mutated);
        const GemvResult after = run_gemv(plane, layout, inst.expert,
                                          mutated[static_cast<std::size_t>(inst.expert)], inst.x,
                                          inst.space, var, adc);
        CHECK(before.output == after.output);
    }
}

TEST_CASE("superposition: disjoint drive sets add") {
    Bed b = Bed::make(1, 8, 4, 2, MappingStrategy::Interleaved, 61);
    const AdcModel adc = make_exact_adc(b.space, 8);
    const VariationModel ideal(0.0, 1);
    const std::vector<int> x = b.random_x(5);

    auto drives_for = [&](int lo, int hi) {
        CycleCommand cmd;
        cmd.query = b.layout.query_for(0);
        cmd.cim_layer = b.geom.cam_layers;
        cmd.pulses = ReadPulseSchedule::for_states(2);
        for (int i = lo; i < hi; ++i) {
            const RowSlot slot = b.layout.rows[0][static_cast<std::size_t>(i)];
            if (slot.layer == cmd.cim_layer)
                cmd.drives.push_back({slot.pair, encode_input(x[static_cast<std::size_t>(i)],
                                                              b.space)});
        }
        return cmd;
    };
    const SenseResult both = execute_cycle(b.plane, drives_for(0, 8), ideal, adc);
    const SenseResult first = execute_cycle(b.plane, drives_for(0, 4), ideal, adc);
    const SenseResult second = execute_cycle(b.plane, drives_for(4, 8), ideal, adc);
    for (std::size_t bl = 0; bl < both.per_bitline.size(); ++bl) {
        CHECK(both.per_bitline[bl].raw ==
              first.per_bitline[bl].raw + second.per_bitline[bl].raw);
        CHECK(both.per_bitline[bl].quantized ==
              first.per_bitline[bl].quantized + second.per_bitline[bl].quantized);
    }
}

TEST_CASE("chunked serialization: cycle count follows the row limit") {
    Bed b = Bed::make(1, 12, 4, 2, MappingStrategy::Interleaved, 71);
    const AdcModel adc = make_exact_adc(b.space, 12);
    const VariationModel ideal(0.0, 1);
    const std::vector<int> x = b.random_x(9);
    const auto want = oracle::gemv(b.weights[0], x);

    // rows spread over 6 pairs x 2 layers
    const GemvResult unchunked = run_gemv(b.plane, b.layout, 0, b.weights[0], x, b.space, ideal,
                                          adc);
    CHECK(unchunked.cycles == 2); // one per occupied layer
    const GemvResult chunked =
        run_gemv(b.plane, b.layout, 0, b.weights[0], x, b.space, ideal, adc, 2);
    CHECK(chunked.cycles == 6); // ceil(6 rows / 2) per layer, twice
    for (int o = 0; o < 4; ++o) {
        CHECK(unchunked.output[static_cast<std::size_t>(o)] == want[static_cast<std::size_t>(o)]);
        CHECK(chunked.output[static_cast<std::size_t>(o)] == want[static_cast<std::size_t>(o)]);
    }
}

TEST_CASE("noisy runs are deterministic and unbiased-ish") {
    Bed b = Bed::make(1, 8, 4, 2, MappingStrategy::Interleaved, 81);
    const AdcModel adc = make_exact_adc(b.space, 8);
    const VariationModel var(0.15, 123);
    const std::vector<int> x = b.random_x(13);
    const GemvResult a = run_gemv(b.plane, b.layout, 0, b.weights[0], x, b.space, var, adc);
    const GemvResult c = run_gemv(b.plane, b.layout, 0, b.weights[0], x, b.space, var, adc);
    CHECK(a.output == c.output);
}

TEST_CASE("concurrent execution over one programmed plane is stable") {
    Bed b = Bed::make(2, 8, 4, 2, MappingStrategy::Interleaved, 91);
    const AdcModel adc = make_exact_adc(b.space, 8);
    const VariationModel var(0.1, 7);
    const std::vector<int> x = b.random_x(17);

    const GemvResult serial0 = run_gemv(b.plane, b.layout, 0, b.weights[0], x, b.space, var, adc);
    const GemvResult serial1 = run_gemv(b.plane, b.layout, 1, b.weights[1], x, b.space, var, adc);
    GemvResult par0, par1;
    std::thread t0([&] { par0 = run_gemv(b.plane, b.layout, 0, b.weights[0], x, b.space, var, adc); });
    std::thread t1([&] { par1 = run_gemv(b.plane, b.layout, 1, b.weights[1], x, b.space, var, adc); });
    t0.join();
    t1.join();
    CHECK(par0.output == serial0.output);
    CHECK(par1.output == serial1.output);
}

TEST_CASE("plane image roundtrip and golden bytes") {
    Bed b = Bed::make(2, 4, 3, 3, MappingStrategy::Interleaved, 101);
    const auto tmp = std::filesystem::temp_directory_path() / "nandcim_plane_test.bin";
    b.plane.save(tmp.string());
    const Plane loaded = Plane::load(tmp.string());
    CHECK(loaded.raw_levels() == b.plane.raw_levels());
    CHECK(loaded.geometry().num_blocks == b.geom.num_blocks);
    CHECK(loaded.cam_plan() == b.layout.cam_plan);
    std::filesystem::remove(tmp);

#ifdef NANDCIM_TEST_DATA_DIR
    // golden image: bytes pinned, format changes must be deliberate
    const std::string golden = std::string(NANDCIM_TEST_DATA_DIR) + "/plane_golden.bin";
    const Plane ref = Plane::load(golden);
    Bed g = Bed::make(2, 3, 2, 3, MappingStrategy::Interleaved, 0xa11ce);
    CHECK(ref.raw_levels() == g.plane.raw_levels());
    CHECK(ref.geometry().page_size == g.geom.page_size);
#endif
}

TEST_CASE("corrupt plane images are rejected on load") {
    Bed b = Bed::make(1, 2, 2, 2, MappingStrategy::Interleaved, 111);
    const auto tmp = std::filesystem::temp_directory_path() / "nandcim_corrupt_test.bin";
    b.plane.save(tmp.string());
    {
        std::FILE* f = std::fopen(tmp.string().c_str(), "r+b");
        REQUIRE(f);
        std::fseek(f, 1, SEEK_SET);
        std::fputc('X', f); // magic
        std::fclose(f);
    }
    CHECK_THROWS_AS(Plane::load(tmp.string()), CorruptCodeError);

    b.plane.save(tmp.string());
    {
        std::FILE* f = std::fopen(tmp.string().c_str(), "r+b");
        REQUIRE(f);
        std::fseek(f, -1, SEEK_END);
        std::fputc(0x7f, f); // cell state beyond the layer's range
        std::fclose(f);
    }
    CHECK_THROWS_AS(Plane::load(tmp.string()), CorruptCodeError);
    std::filesystem::remove(tmp);
}

TEST_CASE("execution contract errors") {
    Bed b = Bed::make(2, 4, 2, 2, MappingStrategy::Interleaved, 121);
    const AdcModel adc = make_exact_adc(b.space, 4);
    const VariationModel ideal(0.0, 1);

    CycleCommand cmd;
    cmd.query = b.layout.query_for(0);
    cmd.cim_layer = 0; // match layer, not a compute layer
    cmd.pulses = ReadPulseSchedule::for_states(2);
    CHECK_THROWS_AS(execute_cycle(b.plane, cmd, ideal, adc), ContractError);

    cmd.cim_layer = b.geom.cam_layers;
    cmd.query.layers.pop_back();
    CHECK_THROWS_AS(execute_cycle(b.plane, cmd, ideal, adc), ContractError);

    cmd.query = b.layout.query_for(0);
    cmd.drives = {{0, encode_input(1, b.space)}, {0, encode_input(2, b.space)}};
    CHECK_THROWS_AS(execute_cycle(b.plane, cmd, ideal, adc), ContractError);

    std::vector<int> short_x(3, 0);
    CHECK_THROWS_AS(
        run_gemv(b.plane, b.layout, 0, b.weights[0], short_x, b.space, ideal, adc),
        ContractError);
    std::vector<std::vector<int>> bad_w(4, std::vector<int>(3, 0));
    CHECK_THROWS_AS(run_gemv(b.plane, b.layout, 0, bad_w, {0, 0, 0, 0}, b.space, ideal, adc),
                    ContractError);
}
