#pragma once

#include <cstdint>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "nandcim/calibration.hpp"
#include "nandcim/perf.hpp"
#include "nandcim/workload.hpp"

namespace nandcim {

/// Everything one simulation run needs. Parsed from strict JSON: unknown
/// keys are hard errors, so a typo in a sweep config fails loudly instead
/// of silently running defaults.
struct RunConfig {
    PlaneGeometry geom{64, 4, 1024, 131072, 0};
    CodeSpace space{4, 2, 2};
    MoESpec moe;
    double sigma = 0.15;
    int granularity = 1;
    int multibit_states = 3;
    std::vector<Stage> stages{Stage::Base, Stage::CamGated, Stage::BlockParallel,
                              Stage::MultibitCell};
    RoutingSpec routing;
    int tokens = 8;
    TimingModel timing{};
    EnergyModel energy{};
    AdcModel adc{8, 256.0, 18.0, 0.0};
    double confidence = 0.322;
    int trials = 10000;
    std::uint64_t limit_seed = Calibration::defaults().mc_seed;

    // The run seed drives workloads and device variation; the input-limit
    // characterization keeps its own pinned seed so the analytic reports
    // depend only on the configuration.
    PerfInputs perf_inputs(std::uint64_t) const {
        PerfInputs in;
        in.moe = moe;
        in.geom = geom;
        in.space = space;
        in.multibit_states = multibit_states;
        in.sigma = sigma;
        in.granularity = granularity;
        in.timing = timing;
        in.energy = energy;
        in.adc = adc;
        in.confidence = confidence;
        in.trials = trials;
        in.mc_seed = limit_seed;
        return in;
    }

    void validate() const {
        geom.validate();
        space.validate();
        moe.validate();
        if (sigma < 0.0)
            throw SchemaError("sigma", "must be >= 0");
        if (granularity < 1)
            throw SchemaError("granularity", "must be >= 1");
        if (multibit_states < 3)
            throw SchemaError("multibit_states", "must be >= 3");
        if (tokens < 1)
            throw SchemaError("tokens", "must be >= 1");
        if (trials < 1000)
            throw SchemaError("trials", "must be >= 1000");
        if (confidence <= 0.0 || confidence >= 1.0)
            throw SchemaError("confidence", "must be in (0, 1)");
        timing.validate();
        energy.validate();
        adc.validate();
    }
};

namespace detail {

using json = nlohmann::json;

inline void reject_unknown_keys(const json& obj, const std::string& scope,
                                const std::set<std::string>& allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!allowed.count(it.key()))
            throw SchemaError(scope.empty() ? it.key() : scope + "." + it.key(), "unknown key");
}

template <typename T>
inline T get_or(const json& obj, const std::string& key, T fallback) {
    if (!obj.contains(key))
        return fallback;
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw SchemaError(key, "wrong type");
    }
}

} // namespace detail

inline RunConfig parse_config(const nlohmann::json& j) {
    using detail::get_or;
    using detail::reject_unknown_keys;
    RunConfig cfg;
    reject_unknown_keys(j, "", {"geometry", "space", "moe", "sigma", "granularity",
                                "multibit_states", "stages", "routing", "tokens", "timing",
                                "energy", "adc", "limit"});
    if (j.contains("geometry")) {
        const auto& g = j.at("geometry");
        reject_unknown_keys(g, "geometry", {"layers", "blocks", "ssls_per_gsl", "page_size"});
        cfg.geom.layers_total = get_or(g, "layers", cfg.geom.layers_total);
        cfg.geom.num_blocks = get_or(g, "blocks", cfg.geom.num_blocks);
        cfg.geom.ssls_per_gsl = get_or(g, "ssls_per_gsl", cfg.geom.ssls_per_gsl);
        cfg.geom.page_size = get_or(g, "page_size", cfg.geom.page_size);
    }
    if (j.contains("space")) {
        const auto& s = j.at("space");
        reject_unknown_keys(s, "space", {"input_levels"});
        cfg.space = CodeSpace(cfg.geom.ssls_per_gsl, 2, get_or(s, "input_levels", 2));
    } else {
        cfg.space = CodeSpace(cfg.geom.ssls_per_gsl, 2, cfg.space.input_levels);
    }
    if (j.contains("moe")) {
        const auto& m = j.at("moe");
        reject_unknown_keys(m, "moe", {"experts", "top_k", "groups", "in_dim", "out_dim"});
        cfg.moe.num_experts = get_or(m, "experts", cfg.moe.num_experts);
        cfg.moe.top_k = get_or(m, "top_k", cfg.moe.top_k);
        if (m.contains("groups") && !m.at("groups").is_null())
            cfg.moe.num_groups = get_or(m, "groups", 0);
        cfg.moe.in_dim = get_or(m, "in_dim", cfg.moe.in_dim);
        cfg.moe.out_dim = get_or(m, "out_dim", cfg.moe.out_dim);
    }
    cfg.sigma = get_or(j, "sigma", cfg.sigma);
    cfg.granularity = get_or(j, "granularity", cfg.granularity);
    cfg.multibit_states = get_or(j, "multibit_states", cfg.multibit_states);
    if (j.contains("stages")) {
        cfg.stages.clear();
        if (!j.at("stages").is_array())
            throw SchemaError("stages", "must be an array of stage names");
        for (const auto& s : j.at("stages"))
            cfg.stages.push_back(stage_from_string(s.get<std::string>()));
    }
    if (j.contains("routing")) {
        const auto& r = j.at("routing");
        reject_unknown_keys(r, "routing", {"kind", "zipf_exponent", "path"});
        const std::string kind = get_or<std::string>(r, "kind", "uniform");
        if (kind == "uniform")
            cfg.routing.kind = RoutingKind::Uniform;
        else if (kind == "zipf")
            cfg.routing.kind = RoutingKind::Zipf;
        else if (kind == "file")
            cfg.routing.kind = RoutingKind::File;
        else
            throw SchemaError("routing.kind", "must be uniform, zipf, or file");
        cfg.routing.zipf_exponent = get_or(r, "zipf_exponent", 1.0);
        cfg.routing.path = get_or<std::string>(r, "path", "");
        if (cfg.routing.kind == RoutingKind::File && cfg.routing.path.empty())
            throw SchemaError("routing.path", "required for file routing");
    }
    cfg.tokens = get_or(j, "tokens", cfg.tokens);
    if (j.contains("timing")) {
        const auto& t = j.at("timing");
        reject_unknown_keys(t, "timing", {"t1", "t2"});
        cfg.timing.t1 = get_or(t, "t1", cfg.timing.t1);
        cfg.timing.t2 = get_or(t, "t2", cfg.timing.t2);
    }
    if (j.contains("energy")) {
        const auto& e = j.at("energy");
        reject_unknown_keys(e, "energy",
                            {"precharge_per_cycle", "string_per_pulse", "cam_search_per_cycle"});
        cfg.energy.precharge_per_cycle = get_or(e, "precharge_per_cycle",
                                                cfg.energy.precharge_per_cycle);
        cfg.energy.string_per_pulse = get_or(e, "string_per_pulse", cfg.energy.string_per_pulse);
        cfg.energy.cam_search_per_cycle = get_or(e, "cam_search_per_cycle",
                                                 cfg.energy.cam_search_per_cycle);
    }
    if (j.contains("adc")) {
        const auto& a = j.at("adc");
        reject_unknown_keys(a, "adc", {"bits", "full_scale", "energy_per_conversion",
                                       "latency_per_conversion"});
        cfg.adc.bits = get_or(a, "bits", cfg.adc.bits);
        cfg.adc.full_scale = get_or(a, "full_scale", cfg.adc.full_scale);
        cfg.adc.energy_per_conversion = get_or(a, "energy_per_conversion",
                                               cfg.adc.energy_per_conversion);
        cfg.adc.latency_per_conversion = get_or(a, "latency_per_conversion",
                                                cfg.adc.latency_per_conversion);
    }
    if (j.contains("limit")) {
        const auto& l = j.at("limit");
        reject_unknown_keys(l, "limit", {"confidence", "trials", "seed"});
        cfg.confidence = get_or(l, "confidence", cfg.confidence);
        cfg.trials = get_or(l, "trials", cfg.trials);
        cfg.limit_seed = get_or(l, "seed", cfg.limit_seed);
    }
    cfg.validate();
    return cfg;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open config file " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError("<root>", std::string("invalid JSON: ") + e.what());
    }
    return parse_config(j);
}

} // namespace nandcim
