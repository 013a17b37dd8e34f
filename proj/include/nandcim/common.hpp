#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace nandcim {

// Error taxonomy. ContractError covers violated call preconditions,
// the others carry operator-facing diagnostics.
struct ContractError : std::logic_error {
    explicit ContractError(const std::string& msg) : std::logic_error(msg) {}
};

struct RangeError : std::out_of_range {
    explicit RangeError(const std::string& msg) : std::out_of_range(msg) {}
};

struct CorruptCodeError : std::runtime_error {
    explicit CorruptCodeError(const std::string& msg) : std::runtime_error(msg) {}
};

struct UnsupportedConfigError : std::runtime_error {
    explicit UnsupportedConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

struct CapacityError : std::runtime_error {
    explicit CapacityError(const std::string& msg) : std::runtime_error(msg) {}
};

struct SchemaError : std::runtime_error {
    explicit SchemaError(const std::string& field, const std::string& reason)
        : std::runtime_error("config field '" + field + "': " + reason), field_name(field) {}
    std::string field_name;
};

namespace detail {

// splitmix64; the standard finalizer keeps streams decorrelated even for
// adjacent counter values.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t hash_combine(std::uint64_t seed, std::uint64_t v) {
    return splitmix64(seed ^ (v + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2)));
}

inline double u64_to_unit_open(std::uint64_t v) {
    // (0,1]: never returns 0, safe for log()
    return (static_cast<double>(v >> 11) + 1.0) * (1.0 / 9007199254740992.0);
}

} // namespace detail

// Standard normal deviate that is a pure function of (seed, counter words).
// Box-Muller on two hashed uniforms.
inline double counter_normal(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0,
                             std::uint64_t c = 0, std::uint64_t d = 0) {
    std::uint64_t h = detail::hash_combine(seed, a);
    h = detail::hash_combine(h, b);
    h = detail::hash_combine(h, c);
    h = detail::hash_combine(h, d);
    const double u1 = detail::u64_to_unit_open(h);
    const double u2 = detail::u64_to_unit_open(detail::splitmix64(h ^ 0xd1b54a32d192ed03ULL));
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
}

// round-half-away-from-zero, symmetric for signed differential currents
inline long long round_half_away(double v) { return std::llround(v); }

} // namespace nandcim
