#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "nandcim/config.hpp"
#include "nandcim/execute.hpp"
#include "nandcim/perf.hpp"
#include "nandcim/selfcheck.hpp"
#include "nandcim/workload.hpp"

namespace nandcim {

namespace detail {

inline std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

inline std::string csv_header() {
    return "stage,cell_states,input_limit,cycles_per_token,latency_ns,throughput_ops_per_ns,"
           "energy_pj,energy_array_pj,energy_adc_pj,adc_share,efficiency_ops_per_pj,"
           "area_efficiency,aedp,throughput_gain_vs_base,efficiency_gain_vs_base,"
           "aedp_reduction_vs_base";
}

inline std::string csv_row(const AblationRow& row) {
    const PerfReport& r = row.report;
    std::string line;
    line += to_string(r.stage);
    line += ',' + std::to_string(r.cell_states);
    line += ',' + std::to_string(r.input_limit);
    line += ',' + fmt(r.cycles_per_token);
    line += ',' + fmt(r.latency_per_token);
    line += ',' + fmt(r.throughput);
    line += ',' + fmt(r.energy_per_token);
    line += ',' + fmt(r.breakdown.array);
    line += ',' + fmt(r.breakdown.adc);
    line += ',' + fmt(r.breakdown.adc / r.energy_per_token);
    line += ',' + fmt(r.efficiency);
    line += ',' + fmt(r.area_efficiency);
    line += ',' + fmt(r.aedp);
    line += ',' + fmt(row.throughput_gain);
    line += ',' + fmt(row.efficiency_gain);
    line += ',' + fmt(row.aedp_reduction);
    return line;
}

inline nlohmann::json report_json(const AblationRow& row) {
    const PerfReport& r = row.report;
    nlohmann::json j;
    j["stage"] = to_string(r.stage);
    j["cell_states"] = r.cell_states;
    j["input_limit"] = r.input_limit;
    j["cycles_per_token"] = r.cycles_per_token;
    j["latency_ns"] = r.latency_per_token;
    j["throughput_ops_per_ns"] = r.throughput;
    j["energy_pj"] = r.energy_per_token;
    j["energy_array_pj"] = r.breakdown.array;
    j["energy_adc_pj"] = r.breakdown.adc;
    j["efficiency_ops_per_pj"] = r.efficiency;
    j["area_efficiency"] = r.area_efficiency;
    j["aedp"] = r.aedp;
    j["throughput_gain_vs_base"] = row.throughput_gain;
    j["efficiency_gain_vs_base"] = row.efficiency_gain;
    j["aedp_reduction_vs_base"] = row.aedp_reduction;
    return j;
}

inline nlohmann::json layout_to_json(const ExpertLayout& layout) {
    nlohmann::json j;
    j["strategy"] = to_string(layout.strategy);
    j["granularity"] = layout.granularity;
    j["experts"] = layout.num_experts;
    j["in_dim"] = layout.in_dim;
    j["out_dim"] = layout.out_dim;
    j["cam_plan"] = layout.cam_plan;
    nlohmann::json entries = nlohmann::json::object();
    for (const auto& [pair, entry] : layout.cam_entries) {
        nlohmann::json layers = nlohmann::json::array();
        for (const auto& l : entry.layers)
            layers.push_back({{"bits", l.bit_width}, {"value", l.value}});
        entries[std::to_string(pair)] = layers;
    }
    j["cam_entries"] = entries;
    nlohmann::json assigns = nlohmann::json::array();
    for (int e = 0; e < layout.num_experts; ++e) {
        nlohmann::json rows = nlohmann::json::array();
        for (const auto& slot : layout.rows[static_cast<std::size_t>(e)])
            rows.push_back({{"pair", slot.pair}, {"layer", slot.layer}});
        assigns.push_back({{"expert", e},
                           {"bl_base", layout.bl_base[static_cast<std::size_t>(e)]},
                           {"rows", rows}});
    }
    j["assignments"] = assigns;
    return j;
}

/// Desk-scale plane hosting the configured model for functional checking;
/// the analytic reports still describe the configured geometry.
struct FunctionalSetup {
    PlaneGeometry geom;
    ExpertLayout layout;
    CodeSpace space;
    std::vector<std::vector<std::vector<int>>> weights;
};

inline FunctionalSetup functional_setup(const RunConfig& cfg, std::uint64_t seed) {
    FunctionalSetup fs;
    fs.space = cfg.space;
    int id_space = 1;
    while (id_space < cfg.moe.num_experts)
        id_space <<= 1;
    const int cam_layers = static_cast<int>(entry_plan(id_space).size());
    const int own_pairs = (cfg.moe.in_dim + 2) / 3; // three compute layers
    fs.geom.ssls_per_gsl = cfg.space.ssls;
    fs.geom.cam_layers = cam_layers;
    fs.geom.layers_total = cam_layers + 3;
    fs.geom.num_blocks = 2 * cfg.moe.num_experts * std::max(own_pairs, 1);
    fs.geom.page_size = cfg.moe.out_dim;
    if (fs.geom.cells() > (1LL << 26))
        throw CapacityError("functional check: model too large to materialize at desk scale");
    fs.layout = place(cfg.moe, fs.geom, MappingStrategy::Interleaved);
    detail::Rng rng(detail::hash_combine(seed, 0x77656967687473ULL));
    const int wmax = fs.space.weight_max();
    fs.weights.resize(static_cast<std::size_t>(cfg.moe.num_experts));
    for (auto& mat : fs.weights) {
        mat.assign(static_cast<std::size_t>(cfg.moe.in_dim),
                   std::vector<int>(static_cast<std::size_t>(cfg.moe.out_dim), 0));
        for (auto& row : mat)
            for (auto& v : row)
                v = rng.range(-wmax, wmax);
    }
    return fs;
}

} // namespace detail

/// `run`: evaluate every configured stage, exercise the functional model
/// on a generated trace, and write reports + the plane image. All outputs
/// are pure functions of (config, seed).
inline int cmd_run(const std::string& config_path, std::uint64_t seed,
                   const std::string& out_dir) {
    const RunConfig cfg = load_config(config_path);
    std::filesystem::create_directories(out_dir);
    const auto out = [&](const std::string& name) {
        return (std::filesystem::path(out_dir) / name).string();
    };

    const std::vector<AblationRow> rows = ablation(cfg.stages, cfg.perf_inputs(seed));

    {
        std::ofstream csv(out("reports.csv"));
        csv << detail::csv_header() << '\n';
        for (const auto& row : rows)
            csv << detail::csv_row(row) << '\n';
    }

    // functional pass: every routed expert of every token, exact at sigma 0,
    // noise statistics at the configured sigma
    const detail::FunctionalSetup fs = detail::functional_setup(cfg, seed);
    Plane plane(fs.geom, fs.layout.cam_plan, fs.space.states);
    program_layout(plane, fs.layout, fs.space, fs.weights);
    plane.save(out("plane.bin"));

    const TokenTrace trace = generate_trace(cfg.moe, cfg.space, cfg.tokens, cfg.routing, seed);
    save_trace(trace, out("trace.txt"));

    const AdcModel exact_adc = make_exact_adc(fs.space, cfg.moe.in_dim);
    const VariationModel ideal(0.0, seed);
    const VariationModel noisy(cfg.sigma, seed);
    int checked = 0, exact = 0;
    long long max_abs_err = 0;
    for (const auto& tok : trace.tokens) {
        for (int e : tok.expert_ids) {
            const auto& w = fs.weights[static_cast<std::size_t>(e)];
            const std::vector<long long> want = reference_gemv(w, tok.input);
            const GemvResult got =
                run_gemv(plane, fs.layout, e, w, tok.input, fs.space, ideal, exact_adc);
            const GemvResult got_noisy =
                run_gemv(plane, fs.layout, e, w, tok.input, fs.space, noisy, exact_adc);
            bool all_eq = true;
            for (std::size_t o = 0; o < want.size(); ++o) {
                all_eq = all_eq && got.output[o] == want[o];
                const long long err = std::llabs(got_noisy.output[o] - want[o]);
                max_abs_err = std::max(max_abs_err, err);
            }
            ++checked;
            exact += all_eq ? 1 : 0;
        }
    }

    {
        std::ofstream sum(out("summary.txt"));
        sum << "functional gemv checks: " << exact << "/" << checked << " exact at sigma=0\n";
        sum << "max |error| at sigma=" << detail::fmt(cfg.sigma) << ": " << max_abs_err
            << " weight-step units\n";
        sum << "plane image: plane.bin (" << fs.geom.num_blocks << " blocks, "
            << fs.geom.ssls_per_gsl << " ssls, " << fs.geom.layers_total << " layers, "
            << fs.geom.page_size << " bitlines)\n";
    }

    {
        nlohmann::json j;
        j["seed"] = seed;
        j["sigma"] = cfg.sigma;
        j["experts"] = cfg.moe.num_experts;
        j["top_k"] = cfg.moe.top_k;
        j["functional_exact"] = exact;
        j["functional_checked"] = checked;
        nlohmann::json stage_rows = nlohmann::json::array();
        for (const auto& row : rows)
            stage_rows.push_back(detail::report_json(row));
        j["stages"] = stage_rows;
        j["layout"] = detail::layout_to_json(fs.layout);
        std::ofstream jf(out("report.json"));
        jf << j.dump(2) << '\n';
    }

    return exact == checked ? 0 : 1;
}

enum class SweepAxis { Sigma, States, Granularity, NumExperts };

inline SweepAxis sweep_axis_from_string(const std::string& s) {
    if (s == "sigma") return SweepAxis::Sigma;
    if (s == "m") return SweepAxis::States;
    if (s == "granularity") return SweepAxis::Granularity;
    if (s == "num_experts") return SweepAxis::NumExperts;
    throw SchemaError("axis", "unknown sweep axis '" + s + "' (sigma, m, granularity, "
                              "num_experts)");
}

/// `sweep`: one ablation per axis value, concatenated CSV.
inline int cmd_sweep(const std::string& config_path, std::uint64_t seed, SweepAxis axis,
                     const std::vector<double>& values, const std::string& out_path) {
    const RunConfig cfg = load_config(config_path);
    std::ofstream csv(out_path);
    if (!csv)
        throw std::runtime_error("cannot open output file " + out_path);
    csv << "axis,value," << detail::csv_header() << '\n';
    const char* axis_name = axis == SweepAxis::Sigma ? "sigma"
                            : axis == SweepAxis::States ? "m"
                            : axis == SweepAxis::Granularity ? "granularity"
                                                             : "num_experts";
    for (double v : values) {
        PerfInputs in = cfg.perf_inputs(seed);
        std::vector<Stage> stages = cfg.stages;
        switch (axis) {
        case SweepAxis::Sigma:
            in.sigma = v;
            break;
        case SweepAxis::States: {
            const int m = static_cast<int>(v);
            if (m < 2)
                throw SchemaError("values", "cell states must be >= 2");
            // two states is the plain block-parallel cell
            stages = {m == 2 ? Stage::BlockParallel : Stage::MultibitCell};
            if (m >= 3)
                in.multibit_states = m;
            break;
        }
        case SweepAxis::Granularity:
            in.granularity = static_cast<int>(v);
            break;
        case SweepAxis::NumExperts:
            in.moe.num_experts = static_cast<int>(v);
            break;
        }
        for (const auto& row : ablation(stages, in))
            csv << axis_name << ',' << detail::fmt(v) << ',' << detail::csv_row(row) << '\n';
    }
    return 0;
}

/// `verify`: match tables, codec roundtrips and product grids, then N
/// random ideal-device products against the integer reference. Fails on
/// the first mismatch with a minimal reproducer.
inline int cmd_verify(std::uint64_t seed, int instances, std::FILE* log = stdout) {
    if (instances < 0)
        throw ContractError("verify: instances must be >= 0");
    bool all_ok = true;
    std::string why;

    if (check_match_tables(6, &why))
        std::fprintf(log, "[PASS] match tables exhaustive to 6 bits\n");
    else {
        std::fprintf(log, "[FAIL] %s\n", why.c_str());
        all_ok = false;
    }

    if (check_codec(&why))
        std::fprintf(log, "[PASS] weight/input codec roundtrips and product grids\n");
    else {
        std::fprintf(log, "[FAIL] %s\n", why.c_str());
        all_ok = false;
    }

    if (instances == 0) {
        std::fprintf(log, "[PASS] gemv oracle equivalence skipped (0 instances requested)\n");
    } else {
        const GemvCheck check = check_random_gemv(seed, instances);
        if (check.ok)
            std::fprintf(log, "[PASS] %s\n", check.describe().c_str());
        else {
            std::fprintf(log, "[FAIL] %s (seed %llu, instance %d)\n", check.describe().c_str(),
                         static_cast<unsigned long long>(seed), check.instances - 1);
            all_ok = false;
        }
    }
    return all_ok ? 0 : 1;
}

/// `truth-table`: full match table of a layer plan as CSV.
inline int cmd_truth_table(const std::vector<int>& plan, std::FILE* out) {
    int bits = 0;
    for (int w : plan) {
        if (w < 1 || w > kMaxCamBitsPerLayer)
            throw UnsupportedConfigError("truth-table: layer widths must be in [1, 3]");
        bits += w;
    }
    if (bits == 0 || bits > 12)
        throw UnsupportedConfigError("truth-table: total width must be in [1, 12]");
    std::fprintf(out, "entry,query,match\n");
    const int span = 1 << bits;
    for (int e = 0; e < span; ++e) {
        const CamEntry entry = encode_entry(e, plan);
        for (int q = 0; q < span; ++q)
            std::fprintf(out, "%d,%d,%d\n", e, q, cam_match(entry, encode_entry(q, plan)));
    }
    return 0;
}

/// `codec`: weight code table and the full signed product grid as CSV.
inline int cmd_codec(const CodeSpace& space, std::FILE* out) {
    std::fprintf(out, "table,w,x,value,pos_levels,neg_levels\n");
    const int wmax = space.weight_max();
    for (int w = -wmax; w <= wmax; ++w) {
        const WeightCode code = encode_weight(w, space);
        std::string pos, neg;
        for (const auto& c : code.pos_block)
            pos += std::to_string(c.level);
        for (const auto& c : code.neg_block)
            neg += std::to_string(c.level);
        std::fprintf(out, "code,%d,,%d,%s,%s\n", w, code.pos_pulse_sum(), pos.c_str(),
                     neg.c_str());
    }
    for (int x = -space.input_max(); x <= space.input_max(); ++x)
        for (int w = -wmax; w <= wmax; ++w)
            std::fprintf(out, "product,%d,%d,%d,,\n", w, x, signed_product_model(x, w, space));
    return 0;
}

} // namespace nandcim
