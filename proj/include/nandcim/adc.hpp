#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "nandcim/common.hpp"
#include "nandcim/encoding.hpp"

namespace nandcim {

/// Per-bitline converter. Currents are quantized to signed LSB counts and
/// clamped to the full-scale window. energy/latency are charged once per
/// conversion by the performance model.
struct AdcModel {
    int bits = 8;
    double full_scale = 256.0; // in unit currents
    double energy_per_conversion = 18.0;
    double latency_per_conversion = 0.0; // folded into the per-pulse delay

    double lsb() const { return full_scale / static_cast<double>(1LL << bits); }

    long long quantize(double raw) const {
        const long long q = round_half_away(raw / lsb());
        const long long limit = 1LL << bits;
        return std::clamp(q, -limit, limit);
    }

    double dequantize(long long q) const { return static_cast<double>(q) * lsb(); }

    void validate() const {
        if (bits < 1 || bits > 24)
            throw UnsupportedConfigError("AdcModel: bits must be in [1, 24]");
        if (full_scale <= 0.0)
            throw UnsupportedConfigError("AdcModel: full scale must be positive");
        if (energy_per_conversion < 0.0 || latency_per_conversion < 0.0)
            throw UnsupportedConfigError("AdcModel: energy/latency must be >= 0");
    }
};

/// Converter sized so integer dot products of up to `rows` driven pairs
/// are reproduced exactly: full scale covers the worst-case magnitude and
/// the LSB never exceeds one weight-step unit.
inline AdcModel make_exact_adc(const CodeSpace& space, int rows) {
    if (rows < 1)
        throw ContractError("make_exact_adc: rows must be >= 1");
    AdcModel adc;
    const double span = static_cast<double>(space.input_max()) * space.weight_max() * rows;
    int bits = 1;
    while ((1LL << bits) < static_cast<long long>(std::ceil(span)))
        ++bits;
    adc.bits = bits;
    adc.full_scale = span;
    return adc;
}

} // namespace nandcim
