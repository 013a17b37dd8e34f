#include <doctest.h>

#include <cmath>

#include "nandcim/perf.hpp"

using namespace nandcim;

namespace {

// paired-unit workload: every expert owns at least min(N, in/D) parallel
// units and the baseline serializes N-fold, which is the regime the gain
// identities quote
PerfInputs inputs(int experts, int k, int in_dim = 256, int granularity = 1) {
    PerfInputs in;
    in.moe.num_experts = experts;
    in.moe.top_k = k;
    in.moe.in_dim = in_dim;
    in.moe.out_dim = 32;
    in.geom.layers_total = 64;
    in.geom.ssls_per_gsl = 4;
    in.geom.num_blocks = 1024;
    in.geom.page_size = 131072;
    in.space = CodeSpace(4, 2, 2);
    in.multibit_states = 3;
    in.sigma = 0.15;
    in.granularity = granularity;
    in.timing = TimingModel{1000.0, 100.0};
    in.energy = EnergyModel{600.0, 0.8, 30.0};
    in.adc = AdcModel{8, 256.0, 18.0, 0.0};
    in.confidence = 0.322;
    in.trials = 10000;
    in.mc_seed = 0x5eedcafe;
    return in;
}

} // namespace

TEST_CASE("gain over the baseline is N/k whenever units saturate at N") {
    for (int experts : {2, 4, 8, 16}) {
        for (int k = 1; k <= experts; k = 2 * k) {
            PerfInputs in = inputs(experts, k);
            // granularity chosen so each expert owns exactly N units
            in.granularity = in.geom.block_pairs() / (experts * experts);
            const int d = stage_input_limit(Stage::Base, in);
            in.moe.in_dim = 2 * experts * d; // deep serialization regime
            const PerfReport base = evaluate(Stage::Base, in);
            const PerfReport gated = evaluate(Stage::CamGated, in);
            CHECK(gated.throughput / base.throughput ==
                  doctest::Approx(static_cast<double>(experts) / k).epsilon(1e-12));
        }
    }
}

TEST_CASE("documented endpoints: four-fold at the ideal device, sixteen-fold at the default sigma") {
    PerfInputs in = inputs(4, 1);
    const int d_ideal = [&] {
        PerfInputs tmp = in;
        tmp.sigma = 0.0;
        return stage_input_limit(Stage::Base, tmp);
    }();
    const int d_sigma = stage_input_limit(Stage::Base, in);
    REQUIRE(d_ideal == 4 * d_sigma); // the default sigma quarters the limit

    in.moe.in_dim = 4 * d_ideal; // finest granularity, page-matched depth
    PerfInputs ideal = in;
    ideal.sigma = 0.0;
    const double gain_ideal = evaluate(Stage::CamGated, ideal).throughput /
                              evaluate(Stage::Base, ideal).throughput;
    const double gain_sigma =
        evaluate(Stage::CamGated, in).throughput / evaluate(Stage::Base, in).throughput;
    CHECK(gain_ideal == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(gain_sigma == doctest::Approx(16.0).epsilon(1e-12));
}

TEST_CASE("gated throughput is non-increasing in sigma, the gain non-decreasing") {
    double prev_thr = 1e300, prev_gain = 0.0;
    for (double sigma : {0.0, 0.05, 0.10, 0.15, 0.20, 0.30}) {
        PerfInputs in = inputs(4, 1);
        in.sigma = sigma;
        const PerfReport base = evaluate(Stage::Base, in);
        const PerfReport gated = evaluate(Stage::CamGated, in);
        CHECK(gated.throughput <= prev_thr + 1e-12);
        const double gain = gated.throughput / base.throughput;
        CHECK(gain >= prev_gain - 1e-12);
        prev_thr = gated.throughput;
        prev_gain = gain;
    }
}

TEST_CASE("block-wise stage multiplies per-cycle work by the ssl count") {
    PerfInputs in = inputs(4, 1, 64);
    in.sigma = 0.0;
    const PerfReport cam = evaluate(Stage::CamGated, in);
    const PerfReport block = evaluate(Stage::BlockParallel, in);
    CHECK(block.throughput / cam.throughput == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("multibit speedup follows the two-pulse timing form") {
    PerfInputs in = inputs(4, 1, 64);
    in.sigma = 0.0; // saturated units on both sides
    std::uint64_t s = 12345;
    for (int i = 0; i < 100; ++i) {
        s = detail::splitmix64(s);
        const double t1 = 1.0 + (s % 10000) / 10.0;
        s = detail::splitmix64(s);
        const double t2 = 0.5 + (s % 10000) / 20.0;
        in.timing = TimingModel{t1, t2};
        const double speedup = evaluate(Stage::MultibitCell, in).throughput /
                               evaluate(Stage::BlockParallel, in).throughput;
        const double want = 2.0 * (t1 + t2) / (t1 + 2.0 * t2);
        CHECK(std::fabs(speedup - want) < 1e-9);
        CHECK(speedup > 1.0);
        CHECK(speedup < 2.0);
    }
}

TEST_CASE("four-state cells: ops scale three-fold per cycle, delay sub-linearly") {
    PerfInputs in = inputs(4, 1, 64);
    in.sigma = 0.0;
    in.multibit_states = 4;
    const double speedup = evaluate(Stage::MultibitCell, in).throughput /
                           evaluate(Stage::BlockParallel, in).throughput;
    const double t1 = in.timing.t1, t2 = in.timing.t2;
    CHECK(speedup == doctest::Approx(3.0 * (t1 + t2) / (t1 + 3.0 * t2)).epsilon(1e-12));
}

TEST_CASE("energy breakdown shares sum to one and follow the stage story") {
    const PerfInputs in = inputs(4, 1, 32);
    const PerfReport base = evaluate(Stage::Base, in);
    const PerfReport cam = evaluate(Stage::CamGated, in);
    const PerfReport full = evaluate(Stage::MultibitCell, in);
    for (const PerfReport* r : {&base, &cam, &full}) {
        CHECK(r->breakdown.array + r->breakdown.adc == doctest::Approx(r->energy_per_token));
        CHECK(r->breakdown.array > 0.0);
    }
    // the array dominates the gated stage, the converter the full stack
    CHECK(cam.breakdown.array > cam.breakdown.adc);
    CHECK(full.breakdown.adc > full.breakdown.array);
    // zero-cost converter: share is exactly zero
    PerfInputs free_adc = in;
    free_adc.adc.energy_per_conversion = 0.0;
    CHECK(evaluate(Stage::CamGated, free_adc).breakdown.adc == 0.0);
}

TEST_CASE("efficiency ordering: gated beats base, mid-state cells peak") {
    PerfInputs in = inputs(4, 1, 32);
    const PerfReport base = evaluate(Stage::Base, in);
    const PerfReport cam = evaluate(Stage::CamGated, in);
    CHECK(cam.efficiency > base.efficiency);

    PerfInputs sweep = inputs(4, 1, 32);
    sweep.sigma = 0.05;
    const double eff2 = evaluate(Stage::BlockParallel, sweep).efficiency;
    sweep.multibit_states = 3;
    const double eff3 = evaluate(Stage::MultibitCell, sweep).efficiency;
    sweep.multibit_states = 4;
    const double eff4 = evaluate(Stage::MultibitCell, sweep).efficiency;
    CHECK(eff3 > eff2);
    CHECK(eff4 < eff3);

    // throughput keeps rising with the state count
    sweep.multibit_states = 3;
    const double thr3 = evaluate(Stage::MultibitCell, sweep).throughput;
    sweep.multibit_states = 4;
    const double thr4 = evaluate(Stage::MultibitCell, sweep).throughput;
    CHECK(evaluate(Stage::BlockParallel, sweep).throughput < thr3);
    CHECK(thr3 < thr4);
}

TEST_CASE("area efficiency per stage") {
    const PerfInputs in = inputs(4, 1, 32);
    CHECK(evaluate(Stage::Base, in).area_efficiency == 1.0);
    const double cam = evaluate(Stage::CamGated, in).area_efficiency;
    CHECK(cam == doctest::Approx(63.0 / 64.0)); // 4 experts fit one 2-bit layer
    const double block = evaluate(Stage::BlockParallel, in).area_efficiency;
    const double multi = evaluate(Stage::MultibitCell, in).area_efficiency;
    CHECK(block < cam);
    CHECK(multi > block); // multibit cells win back density
}

TEST_CASE("aedp basics: identity, linearity, definition") {
    const PerfInputs in = inputs(4, 1, 32);
    const PerfReport r = evaluate(Stage::CamGated, in);
    CHECK(aedp(r) == doctest::Approx(r.energy_per_token * r.latency_per_token /
                                     r.area_efficiency));
    CHECK(aedp(r) / aedp(r) == 1.0);
    PerfReport doubled = r;
    doubled.energy_per_token *= 2.0;
    CHECK(aedp(doubled) == doctest::Approx(2.0 * aedp(r)));
}

TEST_CASE("calibrated default ratios stay in their recorded bands") {
    const PerfInputs in = inputs(4, 1, 32);
    const auto rows = ablation({Stage::MultibitCell}, in);
    CHECK(rows[0].efficiency_gain >= 3.9);
    CHECK(rows[0].efficiency_gain <= 5.1);
    CHECK(rows[0].aedp_reduction >= 3.5);
    CHECK(rows[0].aedp_reduction <= 8.3);
}

TEST_CASE("stage preconditions") {
    PerfInputs in = inputs(4, 1, 32);
    in.multibit_states = 2;
    CHECK_THROWS_AS(evaluate(Stage::MultibitCell, in), UnsupportedConfigError);
    PerfInputs coarse = inputs(4, 1, 32);
    coarse.granularity = coarse.geom.block_pairs(); // one unit for everyone
    CHECK_THROWS_AS(evaluate(Stage::CamGated, coarse), UnsupportedConfigError);
    PerfInputs bad_space = inputs(4, 1, 32);
    bad_space.space = CodeSpace(4, 3, 2);
    CHECK_THROWS_AS(evaluate(Stage::Base, bad_space), UnsupportedConfigError);
}
