// Command-line front end: gen-synth | run | eval.
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "icmh/commands.hpp"
#include "icmh/io.hpp"

namespace {

using icmh::commands::ConfigMap;

// File config first, then command-line overrides on top.
ConfigMap assemble_config(const std::string& config_path, const ConfigMap& overrides) {
    ConfigMap cfg;
    if (!config_path.empty()) cfg = icmh::io::load_keyvalue(config_path);
    for (const auto& [k, v] : overrides) cfg[k] = v;
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Incremental cross-modal hashing pipeline"};
    app.require_subcommand(1);

    std::string config_path, out_dir;
    std::int64_t seed = -1;
    bool porcelain = false;
    app.add_option("--config", config_path, "key=value configuration file");
    app.add_option("--seed", seed, "master seed (overrides the config file)");
    app.add_option("--out", out_dir, "output directory (overrides the config file)");
    app.add_flag("--porcelain", porcelain, "machine-readable key=value output");

    auto* gen = app.add_subcommand("gen-synth", "write a synthetic paired dataset");
    auto* run = app.add_subcommand("run", "run the phase protocols and emit result tables");
    auto* eval = app.add_subcommand("eval", "compute MAP between stored code files");
    for (auto* sub : {gen, run, eval}) sub->fallthrough();

    icmh::commands::EvalArgs eval_args;
    eval->add_option("--query-x", eval_args.query_x, "query codes, x modality")->required();
    eval->add_option("--query-y", eval_args.query_y, "query codes, y modality")->required();
    eval->add_option("--gallery-x", eval_args.gallery_x, "gallery codes, x modality")->required();
    eval->add_option("--gallery-y", eval_args.gallery_y, "gallery codes, y modality")->required();
    eval->add_option("--query-labels", eval_args.query_labels, "query label file")->required();
    eval->add_option("--gallery-labels", eval_args.gallery_labels, "gallery label file")
        ->required();
    eval->add_option("-k,--k", eval_args.k, "ranking cutoff (0 = whole gallery)");

    CLI11_PARSE(app, argc, argv);

    try {
        ConfigMap overrides;
        if (seed >= 0) overrides["seed"] = std::to_string(seed);
        if (!out_dir.empty()) overrides["out"] = out_dir;

        if (gen->parsed())
            return icmh::commands::cmd_gen_synth(assemble_config(config_path, overrides),
                                                 std::cout, std::cerr);
        if (run->parsed())
            return icmh::commands::cmd_run(assemble_config(config_path, overrides), std::cout,
                                           std::cerr);
        eval_args.porcelain = porcelain;
        return icmh::commands::cmd_eval(eval_args, std::cout, std::cerr);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
