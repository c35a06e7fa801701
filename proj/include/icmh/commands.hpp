#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "icmh/protocol.hpp"

namespace icmh::commands {

using ConfigMap = std::map<std::string, std::string>;

// Fully resolved configuration with defaults applied. See README for
// the key list; unknown keys are rejected.
struct RunConfig {
    std::string manifest;  // empty -> generate the synthetic dataset below
    int synth_classes = 8;
    int synth_per_class = 100;
    int synth_dx = 16;
    int synth_dy = 12;
    double synth_spread = 0.3;
    std::uint64_t synth_seed = 7;

    double train_fraction = 0.7;
    std::uint64_t split_seed = 13;

    std::size_t q = 128;
    double lambda_h = 1.0;
    std::size_t code_iters = 500;
    double code_tol = 1e-6;
    double code_eta = 1e-2;
    int samples_per_class = 10;

    std::vector<int> phase_sizes = {3, 2, 3};
    int shuffles = 3;
    std::vector<std::string> protocols = {"P1", "P2", "P3"};
    std::string method = "lr1";
    std::uint64_t seed = 42;
    std::string out;

    int cv_folds = 5;
    int cv_per_class = 5;
    std::vector<double> cv_lambda_grid;  // empty -> built-in log grid
    std::vector<double> cv_gamma_grid;

    std::size_t mlp_h1 = 64, mlp_h2 = 32;
    int mlp_epochs = 200;
    int mlp_batch = 32;
    double mlp_lr = 0.05;
    double mlp_dropout = 0.2;

    protocol::RunSettings settings() const;
};

RunConfig parse_run_config(const ConfigMap& kv);

// Per-shuffle seeds derived from the master seed.
std::vector<std::uint64_t> shuffle_seeds(std::uint64_t master, int count);

int cmd_gen_synth(const ConfigMap& cfg, std::ostream& out, std::ostream& err);
int cmd_run(const ConfigMap& cfg, std::ostream& out, std::ostream& err);

struct EvalArgs {
    std::string query_x, query_y, gallery_x, gallery_y;  // code matrix paths
    std::string query_labels, gallery_labels;
    std::size_t k = 0;  // 0 -> whole gallery
    bool porcelain = false;
};
int cmd_eval(const EvalArgs& args, std::ostream& out, std::ostream& err);

}  // namespace icmh::commands
