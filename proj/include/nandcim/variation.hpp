#pragma once

#include <cstdint>
#include <string>

#include "nandcim/common.hpp"

namespace nandcim {

/// Static device-to-device on-current mismatch. Each cell owns one
/// multiplicative deviation (1 + eps), eps ~ N(0, sigma), fixed by its
/// coordinates: repeated reads of the same cell see the same current.
struct VariationModel {
    double sigma = 0.0;
    std::uint64_t seed = 0;

    VariationModel() = default;
    VariationModel(double sigma_, std::uint64_t seed_) : sigma(sigma_), seed(seed_) {
        if (sigma < 0.0)
            throw ContractError("VariationModel: sigma must be >= 0, got " + std::to_string(sigma));
    }

    /// Relative current deviation of one cell.
    double deviation(std::uint64_t block, std::uint64_t ssl, std::uint64_t bitline,
                     std::uint64_t layer) const {
        if (sigma == 0.0)
            return 0.0;
        return sigma * counter_normal(seed, block, ssl, bitline, layer);
    }

    /// Cell on-current in unit currents under SL drive `drive`.
    double cell_current(double drive, std::uint64_t block, std::uint64_t ssl,
                        std::uint64_t bitline, std::uint64_t layer) const {
        return drive * (1.0 + deviation(block, ssl, bitline, layer));
    }
};

} // namespace nandcim
