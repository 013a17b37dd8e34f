#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "nandcim/common.hpp"
#include "nandcim/encoding.hpp"

namespace nandcim {

/// Expert-parallel model description. k of N experts fire per token; the
/// grouped variant partitions the experts into k groups and picks one per
/// group.
struct MoESpec {
    int num_experts = 4;
    int top_k = 1;
    std::optional<int> num_groups; // grouped variant: must equal top_k
    int in_dim = 32;
    int out_dim = 32;

    void validate() const {
        if (num_experts < 1)
            throw SchemaError("experts", "must be >= 1");
        if (top_k < 1 || top_k > num_experts)
            throw SchemaError("top_k", "must be in [1, experts], got " + std::to_string(top_k));
        if (num_groups) {
            if (*num_groups != top_k)
                throw SchemaError("groups", "grouped routing requires groups == top_k");
            if (num_experts % *num_groups != 0)
                throw SchemaError("groups", "experts must divide evenly into groups");
        }
        if (in_dim < 1 || out_dim < 1)
            throw SchemaError("expert_dims", "dimensions must be >= 1");
    }

    double activated_ratio() const {
        return static_cast<double>(top_k) / static_cast<double>(num_experts);
    }
};

struct Token {
    std::vector<int> input;       // signed values in the code input range
    std::vector<int> expert_ids;  // routed experts, top_k of them
};

struct TokenTrace {
    std::vector<Token> tokens;
};

enum class RoutingKind { Uniform, Zipf, File };

struct RoutingSpec {
    RoutingKind kind = RoutingKind::Uniform;
    double zipf_exponent = 1.0;
    std::string path; // for RoutingKind::File
};

namespace detail {

class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}
    std::uint64_t next() {
        state_ += 0x9e3779b97f4a7c15ULL;
        return splitmix64(state_);
    }
    // unbiased integer in [0, n)
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t v;
        do {
            v = next();
        } while (v >= limit);
        return v % n;
    }
    int range(int lo, int hi) { // inclusive
        return lo + static_cast<int>(below(static_cast<std::uint64_t>(hi - lo + 1)));
    }
    double unit() { return u64_to_unit_open(next()); }

private:
    std::uint64_t state_;
};

inline std::vector<double> zipf_cdf(int n, double s) {
    std::vector<double> cdf(static_cast<std::size_t>(n));
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
        acc += 1.0 / std::pow(static_cast<double>(i + 1), s);
        cdf[static_cast<std::size_t>(i)] = acc;
    }
    for (auto& v : cdf)
        v /= acc;
    return cdf;
}

} // namespace detail

/// Deterministic trace generation. Inputs are uniform over the code's
/// input range; expert selection follows the requested distribution
/// (k distinct experts, or one per group in grouped mode).
inline TokenTrace generate_trace(const MoESpec& spec, const CodeSpace& space, int tokens,
                                 const RoutingSpec& routing, std::uint64_t seed);

/// One token per line: input values, a '|' separator, routed expert ids.
inline void save_trace(const TokenTrace& trace, const std::string& path) {
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("save_trace: cannot open " + path);
    for (const auto& tok : trace.tokens) {
        for (std::size_t i = 0; i < tok.input.size(); ++i)
            out << (i ? " " : "") << tok.input[i];
        out << " |";
        for (int e : tok.expert_ids)
            out << ' ' << e;
        out << '\n';
    }
}

inline TokenTrace load_trace(const std::string& path, const MoESpec& spec,
                             const CodeSpace& space) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("load_trace: cannot open " + path);
    TokenTrace trace;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty())
            continue;
        std::istringstream ss(line);
        Token tok;
        std::string word;
        bool after_sep = false;
        while (ss >> word) {
            if (word == "|") {
                after_sep = true;
                continue;
            }
            int v = 0;
            try {
                v = std::stoi(word);
            } catch (const std::exception&) {
                throw CorruptCodeError("trace line " + std::to_string(lineno) +
                                       ": not an integer: '" + word + "'");
            }
            if (after_sep)
                tok.expert_ids.push_back(v);
            else
                tok.input.push_back(v);
        }
        if (!after_sep)
            throw CorruptCodeError("trace line " + std::to_string(lineno) +
                                   ": missing '|' separator");
        if (static_cast<int>(tok.input.size()) != spec.in_dim)
            throw CorruptCodeError("trace line " + std::to_string(lineno) + ": expected " +
                                   std::to_string(spec.in_dim) + " input values, got " +
                                   std::to_string(tok.input.size()));
        if (static_cast<int>(tok.expert_ids.size()) != spec.top_k)
            throw CorruptCodeError("trace line " + std::to_string(lineno) + ": expected " +
                                   std::to_string(spec.top_k) + " expert ids");
        for (int x : tok.input)
            if (x < -space.input_max() || x > space.input_max())
                throw CorruptCodeError("trace line " + std::to_string(lineno) +
                                       ": input value outside code range");
        for (int e : tok.expert_ids)
            if (e < 0 || e >= spec.num_experts)
                throw CorruptCodeError("trace line " + std::to_string(lineno) +
                                       ": expert id out of range");
        trace.tokens.push_back(std::move(tok));
    }
    return trace;
}

inline TokenTrace generate_trace(const MoESpec& spec, const CodeSpace& space, int tokens,
                                 const RoutingSpec& routing, std::uint64_t seed) {
    spec.validate();
    if (tokens < 1)
        throw ContractError("generate_trace: tokens must be >= 1");
    if (routing.kind == RoutingKind::File)
        return load_trace(routing.path, spec, space);

    detail::Rng rng(seed);
    std::vector<double> cdf;
    if (routing.kind == RoutingKind::Zipf)
        cdf = detail::zipf_cdf(spec.num_experts, routing.zipf_exponent);

    auto pick_weighted = [&](int lo, int hi) { // inclusive range by cdf restricted
        if (routing.kind == RoutingKind::Uniform)
            return rng.range(lo, hi);
        const double base = lo > 0 ? cdf[static_cast<std::size_t>(lo - 1)] : 0.0;
        const double span = cdf[static_cast<std::size_t>(hi)] - base;
        const double u = base + rng.unit() * span;
        for (int e = lo; e <= hi; ++e)
            if (u <= cdf[static_cast<std::size_t>(e)])
                return e;
        return hi;
    };

    TokenTrace trace;
    trace.tokens.reserve(static_cast<std::size_t>(tokens));
    const int xmax = space.input_max();
    for (int t = 0; t < tokens; ++t) {
        Token tok;
        tok.input.reserve(static_cast<std::size_t>(spec.in_dim));
        for (int i = 0; i < spec.in_dim; ++i)
            tok.input.push_back(rng.range(-xmax, xmax));
        if (spec.num_groups) {
            const int per_group = spec.num_experts / *spec.num_groups;
            for (int g = 0; g < *spec.num_groups; ++g) {
                const int lo = g * per_group;
                tok.expert_ids.push_back(pick_weighted(lo, lo + per_group - 1));
            }
        } else if (spec.top_k == spec.num_experts) {
            for (int e = 0; e < spec.num_experts; ++e)
                tok.expert_ids.push_back(e); // dense degenerate case
        } else {
            // k distinct experts; resample collisions
            while (static_cast<int>(tok.expert_ids.size()) < spec.top_k) {
                const int e = pick_weighted(0, spec.num_experts - 1);
                bool dup = false;
                for (int seen : tok.expert_ids)
                    dup = dup || (seen == e);
                if (!dup)
                    tok.expert_ids.push_back(e);
            }
        }
        trace.tokens.push_back(std::move(tok));
    }
    return trace;
}

} // namespace nandcim
