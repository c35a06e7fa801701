#include "icmh/commands.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <type_traits>

#include "icmh/eval.hpp"
#include "icmh/io.hpp"
#include "icmh/rng.hpp"
#include "icmh/synth.hpp"

namespace icmh::commands {
namespace fs = std::filesystem;

namespace {

constexpr const char* kVersion = "1.0.0";

const std::set<std::string>& known_keys() {
    static const std::set<std::string> keys = {
        "manifest",     "synth_classes", "synth_per_class", "synth_dx",
        "synth_dy",     "synth_spread",  "synth_seed",      "train_fraction",
        "split_seed",   "q",             "lambda_h",        "code_iters",
        "code_tol",     "code_eta",      "samples_per_class", "phase_sizes",
        "shuffles",     "protocols",     "method",          "seed",
        "out",          "cv_folds",      "cv_per_class",    "cv_lambda_grid",
        "cv_gamma_grid", "mlp_h1",       "mlp_h2",          "mlp_epochs",
        "mlp_batch",    "mlp_lr",        "mlp_dropout",
    };
    return keys;
}

template <typename T>
T parse_number(const std::string& key, const std::string& value);

template <>
double parse_number<double>(const std::string& key, const std::string& value) {
    std::size_t used = 0;
    double v = 0;
    try {
        v = std::stod(value, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != value.size())
        throw std::invalid_argument("config key '" + key + "': cannot parse '" + value +
                                    "' as a number");
    return v;
}

template <>
long long parse_number<long long>(const std::string& key, const std::string& value) {
    std::size_t used = 0;
    long long v = 0;
    try {
        v = std::stoll(value, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != value.size())
        throw std::invalid_argument("config key '" + key + "': cannot parse '" + value +
                                    "' as an integer");
    return v;
}

template <>
std::uint64_t parse_number<std::uint64_t>(const std::string& key, const std::string& value) {
    std::size_t used = 0;
    unsigned long long v = 0;
    try {
        v = std::stoull(value, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != value.size())
        throw std::invalid_argument("config key '" + key + "': cannot parse '" + value +
                                    "' as an unsigned integer");
    return v;
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, ',')) {
        const auto a = item.find_first_not_of(" \t");
        if (a == std::string::npos) continue;
        const auto b = item.find_last_not_of(" \t");
        out.push_back(item.substr(a, b - a + 1));
    }
    return out;
}

std::string format_value(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

}  // namespace

protocol::RunSettings RunConfig::settings() const {
    protocol::RunSettings s;
    s.bits = q;
    s.lambda_h = lambda_h;
    s.code_iters = code_iters;
    s.code_tol = code_tol;
    s.code_eta = code_eta;
    s.samples_per_class = samples_per_class;
    s.cv.folds = cv_folds;
    s.cv.per_class_validation_count = cv_per_class;
    s.cv.lambda_grid = cv_lambda_grid;
    s.cv.gamma_grid = cv_gamma_grid;
    s.mlp_train.epochs = mlp_epochs;
    s.mlp_train.batch_size = mlp_batch;
    s.mlp_train.learning_rate = mlp_lr;
    s.mlp_h1 = mlp_h1;
    s.mlp_h2 = mlp_h2;
    s.mlp_dropout = mlp_dropout;
    return s;
}

RunConfig parse_run_config(const ConfigMap& kv) {
    for (const auto& [key, value] : kv) {
        (void)value;
        if (!known_keys().count(key))
            throw std::invalid_argument("unknown config key '" + key + "'");
    }
    RunConfig c;
    const auto str = [&](const char* k, std::string& dst) {
        if (auto it = kv.find(k); it != kv.end()) dst = it->second;
    };
    const auto num = [&](const char* k, auto& dst) {
        using T = std::remove_reference_t<decltype(dst)>;
        if (auto it = kv.find(k); it != kv.end()) {
            if constexpr (std::is_same_v<T, double>)
                dst = parse_number<double>(k, it->second);
            else if constexpr (std::is_same_v<T, std::uint64_t>)
                dst = parse_number<std::uint64_t>(k, it->second);
            else
                dst = static_cast<T>(parse_number<long long>(k, it->second));
        }
    };

    str("manifest", c.manifest);
    num("synth_classes", c.synth_classes);
    num("synth_per_class", c.synth_per_class);
    num("synth_dx", c.synth_dx);
    num("synth_dy", c.synth_dy);
    num("synth_spread", c.synth_spread);
    num("synth_seed", c.synth_seed);
    num("train_fraction", c.train_fraction);
    num("split_seed", c.split_seed);
    num("q", c.q);
    num("lambda_h", c.lambda_h);
    num("code_iters", c.code_iters);
    num("code_tol", c.code_tol);
    num("code_eta", c.code_eta);
    num("samples_per_class", c.samples_per_class);
    num("shuffles", c.shuffles);
    str("method", c.method);
    num("seed", c.seed);
    str("out", c.out);
    num("cv_folds", c.cv_folds);
    num("cv_per_class", c.cv_per_class);
    num("mlp_h1", c.mlp_h1);
    num("mlp_h2", c.mlp_h2);
    num("mlp_epochs", c.mlp_epochs);
    num("mlp_batch", c.mlp_batch);
    num("mlp_lr", c.mlp_lr);
    num("mlp_dropout", c.mlp_dropout);

    if (auto it = kv.find("phase_sizes"); it != kv.end()) {
        c.phase_sizes.clear();
        for (const auto& tok : split_list(it->second))
            c.phase_sizes.push_back(static_cast<int>(parse_number<long long>("phase_sizes", tok)));
        if (c.phase_sizes.empty())
            throw std::invalid_argument("config key 'phase_sizes': empty list");
    }
    if (auto it = kv.find("protocols"); it != kv.end()) {
        c.protocols = split_list(it->second);
        if (c.protocols.empty())
            throw std::invalid_argument("config key 'protocols': empty list");
    }
    if (auto it = kv.find("cv_lambda_grid"); it != kv.end())
        for (const auto& tok : split_list(it->second))
            c.cv_lambda_grid.push_back(parse_number<double>("cv_lambda_grid", tok));
    if (auto it = kv.find("cv_gamma_grid"); it != kv.end())
        for (const auto& tok : split_list(it->second))
            c.cv_gamma_grid.push_back(parse_number<double>("cv_gamma_grid", tok));

    for (const auto& p : c.protocols) protocol::parse_protocol(p);
    protocol::parse_method(c.method);
    if (c.train_fraction <= 0.0 || c.train_fraction >= 1.0)
        throw std::invalid_argument("config key 'train_fraction': must be in (0,1)");
    if (c.shuffles < 1) throw std::invalid_argument("config key 'shuffles': must be >= 1");
    if (c.q < 1) throw std::invalid_argument("config key 'q': must be >= 1");
    return c;
}

std::vector<std::uint64_t> shuffle_seeds(std::uint64_t master, int count) {
    std::vector<std::uint64_t> seeds;
    for (int i = 0; i < count; ++i)
        seeds.push_back(derive_seed(master, 1000 + static_cast<std::uint64_t>(i)));
    return seeds;
}

namespace {

void require_out_dir(const std::string& out) {
    if (out.empty()) throw std::invalid_argument("no output directory given (key 'out' or --out)");
    if (!fs::is_directory(out))
        throw std::invalid_argument("output directory '" + out + "' does not exist");
}

void notice_for_q(const RunConfig& cfg, std::ostream& err) {
    if (cfg.q != 16 && cfg.q != 32 && cfg.q != 64 && cfg.q != 128)
        err << "notice: q=" << cfg.q << " is outside the usual {16, 32, 64, 128} range\n";
}

struct NamedResult {
    protocol::Protocol protocol;
    protocol::ProtocolResult result;
};

void write_csv(const std::string& path, const std::vector<NamedResult>& all,
               const std::string& method) {
    std::ofstream out(path, std::ios::binary);
    out << "shuffle,phase,protocol,method,direction,metric,value\n";
    const auto row = [&](const std::string& shuffle, const protocol::PhaseResult& r) {
        const std::string prefix = shuffle + "," + std::to_string(r.phase) + "," +
                                   protocol_name(r.protocol) + "," + method + ",";
        out << prefix << "x2y,map50," << format_value(r.retrieval_x2y) << "\n";
        out << prefix << "y2x,map50," << format_value(r.retrieval_y2x) << "\n";
        out << prefix << "avg,map50," << format_value(r.retrieval_avg) << "\n";
        out << prefix << "x2y,mapall," << format_value(r.hashing_x2y) << "\n";
        out << prefix << "y2x,mapall," << format_value(r.hashing_y2x) << "\n";
        out << prefix << "avg,mapall," << format_value(r.hashing_avg) << "\n";
    };
    for (const auto& named : all) {
        for (std::size_t s = 0; s < named.result.runs.size(); ++s)
            for (const auto& r : named.result.runs[s].phases) row(std::to_string(s), r);
        for (const auto& r : named.result.averaged) row("avg", r);
    }
    if (!out) throw std::runtime_error("failed writing " + path);
}

void write_curves(const std::string& dir, const std::vector<NamedResult>& all,
                  const std::string& method) {
    for (const auto& named : all) {
        for (const auto metric : {"map50", "mapall"}) {
            const std::string path = dir + "/curve_" + protocol_name(named.protocol) + "_" +
                                     method + "_" + metric + ".txt";
            std::ofstream out(path, std::ios::binary);
            for (const auto& r : named.result.averaged)
                out << r.phase << " "
                    << format_value(std::string(metric) == "map50" ? r.retrieval_avg
                                                                   : r.hashing_avg)
                    << "\n";
            if (!out) throw std::runtime_error("failed writing " + path);
        }
    }
}

void write_summary(const std::string& path, const std::vector<NamedResult>& all,
                   const std::string& method) {
    std::map<std::string, std::string> kv;
    for (const auto& named : all) {
        const auto& final = named.result.averaged.back();
        const std::string base = protocol_name(named.protocol) + "." + method + ".final.";
        kv[base + "map50.x2y"] = format_value(final.retrieval_x2y);
        kv[base + "map50.y2x"] = format_value(final.retrieval_y2x);
        kv[base + "map50.avg"] = format_value(final.retrieval_avg);
        kv[base + "mapall.x2y"] = format_value(final.hashing_x2y);
        kv[base + "mapall.y2x"] = format_value(final.hashing_y2x);
        kv[base + "mapall.avg"] = format_value(final.hashing_avg);
    }
    io::save_keyvalue(path, kv);
}

void write_timings(const std::string& path, const std::vector<NamedResult>& all) {
    std::ofstream out(path, std::ios::binary);
    out << "protocol,shuffle,phase,seconds\n";
    for (const auto& named : all)
        for (std::size_t s = 0; s < named.result.runs.size(); ++s)
            for (const auto& r : named.result.runs[s].phases)
                out << protocol_name(named.protocol) << "," << s << "," << r.phase << ","
                    << format_value(r.seconds) << "\n";
}

void write_repro_manifest(const std::string& path, const ConfigMap& raw, const RunConfig& cfg) {
    std::map<std::string, std::string> kv;
    for (const auto& [k, v] : raw) kv["config." + k] = v;
    kv["resolved.method"] = cfg.method;
    kv["resolved.q"] = std::to_string(cfg.q);
    kv["resolved.seed"] = std::to_string(cfg.seed);
    kv["resolved.samples_per_class"] = std::to_string(cfg.samples_per_class);
    std::string phases;
    for (const int p : cfg.phase_sizes) phases += (phases.empty() ? "" : ",") + std::to_string(p);
    kv["resolved.phase_sizes"] = phases;
    const auto seeds = shuffle_seeds(cfg.seed, cfg.shuffles);
    for (std::size_t i = 0; i < seeds.size(); ++i)
        kv["resolved.shuffle_seed." + std::to_string(i)] = std::to_string(seeds[i]);
    kv["version"] = kVersion;
    io::save_keyvalue(path, kv);
}

}  // namespace

int cmd_gen_synth(const ConfigMap& raw, std::ostream& out, std::ostream& err) {
    try {
        const RunConfig cfg = parse_run_config(raw);
        require_out_dir(cfg.out);
        // synth_seed, not the master seed, so the files match what `run`
        // generates internally from the same config
        const PairedDataset data =
            generate_synthetic(cfg.synth_classes, cfg.synth_per_class, cfg.synth_dx,
                               cfg.synth_dy, cfg.synth_spread, cfg.synth_seed);
        io::save_dataset(cfg.out, data);
        out << "wrote " << data.size() << " paired samples (" << cfg.synth_classes
            << " classes) to " << cfg.out << "\n";
        return 0;
    } catch (const std::exception& e) {
        err << "gen-synth: " << e.what() << "\n";
        return 1;
    }
}

int cmd_run(const ConfigMap& raw, std::ostream& out, std::ostream& err) {
    try {
        const RunConfig cfg = parse_run_config(raw);
        require_out_dir(cfg.out);
        notice_for_q(cfg, err);

        PairedDataset data =
            cfg.manifest.empty()
                ? generate_synthetic(cfg.synth_classes, cfg.synth_per_class, cfg.synth_dx,
                                     cfg.synth_dy, cfg.synth_spread, cfg.synth_seed)
                : io::load_dataset(cfg.manifest);
        auto split = split_train_test(data, cfg.train_fraction, cfg.split_seed);
        standardize_features(split.train, split.test);

        protocol::PhasePlan plan;
        plan.phase_sizes = cfg.phase_sizes;
        plan.shuffle_seeds = shuffle_seeds(cfg.seed, cfg.shuffles);
        const auto method = protocol::parse_method(cfg.method);
        const auto settings = cfg.settings();

        std::vector<NamedResult> all;
        for (const auto& pname : cfg.protocols) {
            const auto p = protocol::parse_protocol(pname);
            out << "running " << protocol_name(p) << " / " << cfg.method << " ("
                << plan.shuffle_seeds.size() << " shuffles)\n";
            all.push_back({p, protocol::run_protocol(split.train, split.test, plan, p, method,
                                                     settings)});
        }

        write_csv(cfg.out + "/results.csv", all, cfg.method);
        write_curves(cfg.out, all, cfg.method);
        write_summary(cfg.out + "/summary.txt", all, cfg.method);
        write_timings(cfg.out + "/timings.txt", all);
        write_repro_manifest(cfg.out + "/repro_manifest.txt", raw, cfg);
        out << "results in " << cfg.out << "/results.csv\n";
        return 0;
    } catch (const std::exception& e) {
        err << "run: " << e.what() << "\n";
        return 1;
    }
}

int cmd_eval(const EvalArgs& args, std::ostream& out, std::ostream& err) {
    try {
        const auto codes = [](const std::string& path) {
            return BinaryCodeMatrix::from_signs(io::load_matrix(path));
        };
        const BinaryCodeMatrix qx = codes(args.query_x);
        const BinaryCodeMatrix qy = codes(args.query_y);
        const BinaryCodeMatrix gx = codes(args.gallery_x);
        const BinaryCodeMatrix gy = codes(args.gallery_y);
        const LabelVector ql = io::load_labels(args.query_labels);
        const LabelVector gl = io::load_labels(args.gallery_labels);
        const std::size_t k = args.k == 0 ? eval::kAll : args.k;

        const double x2y = eval::mean_ap(qx, ql, gy, gl, k);
        const double y2x = eval::mean_ap(qy, ql, gx, gl, k);
        const double avg = 0.5 * (x2y + y2x);
        if (args.porcelain) {
            out << "map.x2y=" << format_value(x2y) << "\n";
            out << "map.y2x=" << format_value(y2x) << "\n";
            out << "map.avg=" << format_value(avg) << "\n";
        } else {
            const std::string at =
                args.k == 0 ? std::string("all") : std::to_string(args.k);
            out << "MAP@" << at << " x->y: " << format_value(x2y) << "\n";
            out << "MAP@" << at << " y->x: " << format_value(y2x) << "\n";
            out << "MAP@" << at << " average: " << format_value(avg) << "\n";
        }
        return 0;
    } catch (const std::exception& e) {
        err << "eval: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace icmh::commands
