// Command-line front end: run / sweep / verify / truth-table / codec.

#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nandcim/cli.hpp"

namespace {

std::vector<int> parse_plan(const std::string& csv) {
    std::vector<int> plan;
    std::string cur;
    for (char c : csv) {
        if (c == ',') {
            plan.push_back(std::stoi(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty())
        plan.push_back(std::stoi(cur));
    return plan;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"behavioral and performance simulator of identifier-gated multibit "
                 "compute-in-memory on 3D NAND"};
    app.require_subcommand(1);

    std::string config_path, out_dir = "out", out_file = "sweep.csv";
    std::uint64_t seed = 1;
    int instances = 100;
    std::string axis_name = "sigma", values_csv, plan_csv = "1,2", space_csv = "4,2,2";

    auto* run = app.add_subcommand("run", "evaluate all configured stages and write reports");
    run->add_option("--config", config_path, "JSON run configuration")->required();
    run->add_option("--seed", seed, "simulation seed");
    run->add_option("--out", out_dir, "output directory");

    auto* sweep = app.add_subcommand("sweep", "sweep one axis, one ablation per value");
    sweep->add_option("--config", config_path, "JSON run configuration")->required();
    sweep->add_option("--axis", axis_name, "sigma | m | granularity | num_experts");
    sweep->add_option("--values", values_csv, "comma-separated axis values")->required();
    sweep->add_option("--seed", seed, "simulation seed");
    sweep->add_option("--out", out_file, "output CSV path");

    auto* verify = app.add_subcommand("verify", "match tables, codec grids, gemv oracle checks");
    verify->add_option("--instances", instances, "number of random gemv instances");
    verify->add_option("--seed", seed, "instance seed");

    auto* table = app.add_subcommand("truth-table", "dump the match table of a layer plan");
    table->add_option("--plan", plan_csv, "layer widths, e.g. 1,2");

    auto* codec = app.add_subcommand("codec", "dump weight codes and the signed product grid");
    codec->add_option("--space", space_csv, "S,m,L");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed())
            return nandcim::cmd_run(config_path, seed, out_dir);
        if (sweep->parsed()) {
            std::vector<double> values;
            std::string cur;
            for (char c : values_csv + ",") {
                if (c == ',') {
                    if (!cur.empty())
                        values.push_back(std::stod(cur));
                    cur.clear();
                } else {
                    cur += c;
                }
            }
            return nandcim::cmd_sweep(config_path, seed, nandcim::sweep_axis_from_string(axis_name),
                                      values, out_file);
        }
        if (verify->parsed())
            return nandcim::cmd_verify(seed, instances);
        if (table->parsed())
            return nandcim::cmd_truth_table(parse_plan(plan_csv), stdout);
        if (codec->parsed()) {
            const std::vector<int> v = parse_plan(space_csv);
            if (v.size() != 3)
                throw nandcim::SchemaError("space", "expected S,m,L");
            return nandcim::cmd_codec(nandcim::CodeSpace(v[0], v[1], v[2]), stdout);
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
