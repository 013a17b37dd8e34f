#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "nandcim/adc.hpp"
#include "nandcim/common.hpp"
#include "nandcim/encoding.hpp"
#include "nandcim/variation.hpp"

namespace nandcim {

/// Per-pair variance of the sensed product under worst-case drive and a
/// full-magnitude weight code: every conducting cell carries an
/// independent relative mismatch, so one driven pair contributes
/// (d/2)^2 * sigma^2 * sum of squared per-cell pulse counts.
inline double worst_case_pair_variance(const CodeSpace& space, double sigma) {
    const WeightCode code = encode_weight(space.weight_max(), space);
    double sum_sq = 0.0;
    for (const auto& c : code.pos_block)
        sum_sq += static_cast<double>(c.pulse_contribution()) * c.pulse_contribution();
    for (const auto& c : code.neg_block)
        sum_sq += static_cast<double>(c.pulse_contribution()) * c.pulse_contribution();
    const double d = static_cast<double>(space.input_max());
    return 0.25 * d * d * sigma * sigma * sum_sq;
}

/// Largest number of simultaneously driven pairs for which the quantized
/// output stays within one LSB of the exact product, with probability at
/// least `confidence` over worst-case-magnitude vectors. Monte Carlo with
/// common random numbers across candidate dimensions and sigmas: the sum
/// of the per-cell mismatch terms of n driven pairs is normal with
/// variance n * v, so each trial draws one standard normal and the
/// failure indicator is monotone in n and sigma. Capped by the converter
/// full scale (worst-case sums must not clamp).
inline int max_input_dimension(const CodeSpace& space, const AdcModel& adc,
                               const VariationModel& variation, double confidence, int trials) {
    if (trials < 1000)
        throw ContractError("max_input_dimension: need at least 1000 trials");
    if (confidence <= 0.0 || confidence >= 1.0)
        throw ContractError("max_input_dimension: confidence must be in (0, 1)");
    adc.validate();

    const double per_product = static_cast<double>(space.input_max()) * space.weight_max();
    const int cap = static_cast<int>(std::floor(adc.full_scale / per_product));
    if (cap < 1)
        return 0;
    if (variation.sigma == 0.0)
        return cap;

    const double v = worst_case_pair_variance(space, variation.sigma);
    const double threshold = 0.5 * adc.lsb();
    const int max_failures =
        static_cast<int>(std::floor((1.0 - confidence) * static_cast<double>(trials)));

    // |Z_t| drawn once per trial; a trial fails at dimension n iff
    // |Z_t| * sqrt(n * v) >= threshold
    std::vector<double> abs_z(static_cast<std::size_t>(trials));
    for (int t = 0; t < trials; ++t)
        abs_z[static_cast<std::size_t>(t)] =
            std::fabs(counter_normal(variation.seed, 0x6d696d63ULL, static_cast<std::uint64_t>(t)));

    auto failures_at = [&](int n) {
        const double scale = std::sqrt(static_cast<double>(n) * v);
        int fails = 0;
        for (double z : abs_z)
            fails += (z * scale >= threshold) ? 1 : 0;
        return fails;
    };

    if (failures_at(1) > max_failures)
        return 0;
    int lo = 1, hi = cap; // lo always passes
    while (lo < hi) {
        const int mid = lo + (hi - lo + 1) / 2;
        if (failures_at(mid) <= max_failures)
            lo = mid;
        else
            hi = mid - 1;
    }
    return lo;
}

} // namespace nandcim
