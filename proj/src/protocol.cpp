#include "icmh/protocol.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>
#include <stdexcept>

#include "icmh/eval.hpp"
#include "icmh/rng.hpp"

namespace icmh::protocol {
namespace {

constexpr std::size_t kRetrievalCutoff = 50;

// Seed streams hung off one per-shuffle seed. Phase 1 uses the same
// stream everywhere so the base model is identical across protocols
// and ridge variants.
std::uint64_t code_seed(std::uint64_t rs, int phase, bool incremental) {
    if (phase == 1) return derive_seed(rs, 0);
    return derive_seed(rs, static_cast<std::uint64_t>(phase) + (incremental ? 64 : 0));
}
std::uint64_t cv_seed(std::uint64_t rs, int phase) {
    return derive_seed(rs, 32 + static_cast<std::uint64_t>(phase));
}
std::uint64_t exemplar_seed(std::uint64_t rs, int phase) {
    return derive_seed(rs, 128 + static_cast<std::uint64_t>(phase));
}
std::uint64_t net_seed_x(std::uint64_t rs, int phase) {
    return derive_seed(rs, 160 + static_cast<std::uint64_t>(phase));
}
std::uint64_t net_seed_y(std::uint64_t rs, int phase) {
    return derive_seed(rs, 192 + static_cast<std::uint64_t>(phase));
}
std::uint64_t train_seed(std::uint64_t rs, int phase) {
    return derive_seed(rs, 224 + static_cast<std::uint64_t>(phase));
}

LabelVector labels_at(const LabelVector& labels, const std::vector<int>& rows) {
    LabelVector out(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        out[i] = labels[static_cast<std::size_t>(rows[i])];
    return out;
}

// All rows whose class is already seen, in dataset order.
std::vector<int> rows_of_seen(const LabelVector& labels, const std::vector<char>& seen) {
    std::vector<int> rows;
    for (std::size_t r = 0; r < labels.size(); ++r)
        if (seen[static_cast<std::size_t>(labels[r])]) rows.push_back(static_cast<int>(r));
    return rows;
}

struct ShuffleState {
    MethodState fns;
    CodeStore store;
    ExemplarStore exemplars;
    std::vector<char> seen_class;
    std::vector<int> remap;  // absolute class id -> order of first appearance
    int seen_count = 0;
};

codegen::CodeLearnerConfig code_cfg(const RunSettings& s, std::uint64_t seed) {
    codegen::CodeLearnerConfig cfg;
    cfg.bits = s.bits;
    cfg.lambda_h = s.lambda_h;
    cfg.max_iters = s.code_iters;
    cfg.rel_tol = s.code_tol;
    cfg.eta_init = s.code_eta;
    cfg.seed = seed;
    return cfg;
}

PairedDataset subset(const PairedDataset& d, const std::vector<int>& rows) {
    return {take_rows(d.x, rows), take_rows(d.y, rows), labels_at(d.labels, rows),
            d.class_count};
}

void fit_linear_base(ShuffleState& st, const PairedDataset& sub, const codegen::CodePair& cp,
                     const RunSettings& settings, std::uint64_t rs, int phase) {
    linfn::CvConfig cv = settings.cv;
    cv.seed = cv_seed(rs, phase);
    const auto choice = linfn::cross_validate_base(sub, cp.a, cp.b, cv);
    st.fns.fx = linfn::fit_base(sub.x, cp.a, choice.lambda);
    st.fns.fy = linfn::fit_base(sub.y, cp.b, choice.lambda);
}

void fit_mlp(ShuffleState& st, const PairedDataset& sub, const Matrix& code_a,
             const Matrix& code_b, const LabelVector& remapped, const RunSettings& settings,
             std::uint64_t rs, int phase, bool incremental) {
    mlpfn::TrainConfig tc = settings.mlp_train;
    tc.seed = train_seed(rs, phase);
    tc.use_class_weights = incremental;
    tc.use_imbalanced_sampler = incremental;
    if (incremental) {
        st.fns.mx = mlpfn::expand_classifier(st.fns.mx, st.seen_count, net_seed_x(rs, phase));
        st.fns.my = mlpfn::expand_classifier(st.fns.my, st.seen_count, net_seed_y(rs, phase));
    } else {
        st.fns.mx = mlpfn::make_mlp(sub.x.cols(), settings.mlp_h1, settings.mlp_h2,
                                    settings.bits, st.seen_count, settings.mlp_dropout,
                                    net_seed_x(rs, phase));
        st.fns.my = mlpfn::make_mlp(sub.y.cols(), settings.mlp_h1, settings.mlp_h2,
                                    settings.bits, st.seen_count, settings.mlp_dropout,
                                    net_seed_y(rs, phase));
    }
    mlpfn::train_pair(st.fns.mx, st.fns.my, sub.x, sub.y, code_a, code_b, remapped, tc);
}

// P1 phases and everyone's phase 1: learn codes and functions from
// scratch over `rows`, then overwrite the stored codes for those rows.
void train_from_scratch(ShuffleState& st, const PairedDataset& train,
                        const std::vector<int>& rows, Method method,
                        const RunSettings& settings, std::uint64_t rs, int phase) {
    const PairedDataset sub = subset(train, rows);
    const SimilarityMatrix s = build_similarity(sub.labels);
    const codegen::CodePair cp =
        codegen::learn_base(s, code_cfg(settings, code_seed(rs, phase, false)));

    if (method == Method::Mlp) {
        LabelVector remapped(sub.labels.size());
        for (std::size_t i = 0; i < remapped.size(); ++i)
            remapped[i] = st.remap[static_cast<std::size_t>(sub.labels[i])];
        fit_mlp(st, sub, cp.a, cp.b, remapped, settings, rs, phase, false);
    } else {
        fit_linear_base(st, sub, cp, settings, rs, phase);
    }
    for (std::size_t i = 0; i < rows.size(); ++i)
        st.store.put(static_cast<std::size_t>(rows[i]), cp.a.row(i), cp.b.row(i));
}

// P3 phases >= 2: incremental code learning over [exemplars; new rows],
// then incremental function adaptation.
void train_incremental(ShuffleState& st, const PairedDataset& train,
                       const std::vector<int>& new_rows, Method method,
                       const RunSettings& settings, std::uint64_t rs, int phase) {
    std::vector<int> rows = st.exemplars.indices;
    rows.insert(rows.end(), new_rows.begin(), new_rows.end());
    const PairedDataset sub = subset(train, rows);
    const SimilarityMatrix s = build_similarity(sub.labels);

    const auto inc = codegen::learn_incremental(s, st.exemplars.a_exemplar,
                                                st.exemplars.b_exemplar, new_rows.size(),
                                                code_cfg(settings, code_seed(rs, phase, true)));
    const Matrix code_a = vstack(st.exemplars.a_exemplar, inc.a_hat);
    const Matrix code_b = vstack(st.exemplars.b_exemplar, inc.b_hat);

    if (method == Method::Mlp) {
        LabelVector remapped(sub.labels.size());
        for (std::size_t i = 0; i < remapped.size(); ++i)
            remapped[i] = st.remap[static_cast<std::size_t>(sub.labels[i])];
        fit_mlp(st, sub, code_a, code_b, remapped, settings, rs, phase, true);
    } else {
        const int variant = method == Method::Lr1 ? 1 : method == Method::Lr2 ? 2 : 3;
        linfn::CvConfig cv = settings.cv;
        cv.seed = cv_seed(rs, phase);
        const auto choice =
            linfn::cross_validate(sub, code_a, code_b, st.fns.fx, st.fns.fy, variant, cv);
        st.fns.fx = linfn::fit_incremental(sub.x, code_a, st.fns.fx, choice.lambda,
                                           choice.gamma, variant);
        st.fns.fy = linfn::fit_incremental(sub.y, code_b, st.fns.fy, choice.lambda,
                                           choice.gamma, variant);
    }
    for (std::size_t i = 0; i < new_rows.size(); ++i)
        st.store.put(static_cast<std::size_t>(new_rows[i]), inc.a_hat.row(i), inc.b_hat.row(i));
}

void refresh_exemplars(ShuffleState& st, const PairedDataset& train,
                       const std::vector<int>& new_classes, const RunSettings& settings,
                       std::uint64_t rs, int phase) {
    append_exemplars(st.exemplars, train, new_classes, st.store, settings.bits,
                     settings.samples_per_class, exemplar_seed(rs, phase));
}

PhaseResult evaluate_phase(const ShuffleState& st, const PairedDataset& train,
                           const PairedDataset& test, Protocol protocol, Method method,
                           int phase) {
    const std::vector<int> test_rows = rows_of_seen(test.labels, st.seen_class);
    if (test_rows.empty())
        throw std::runtime_error("phase " + std::to_string(phase) +
                                 ": no test samples for the classes seen so far");
    const LabelVector tl = labels_at(test.labels, test_rows);
    const BinaryCodeMatrix qx = st.fns.hash_x(take_rows(test.x, test_rows));
    const BinaryCodeMatrix qy = st.fns.hash_y(take_rows(test.y, test_rows));

    PhaseResult res;
    res.phase = phase;
    res.protocol = protocol;
    res.method = method;
    res.retrieval_x2y = eval::mean_ap(qx, tl, qy, tl, kRetrievalCutoff);
    res.retrieval_y2x = eval::mean_ap(qy, tl, qx, tl, kRetrievalCutoff);
    res.retrieval_avg = 0.5 * (res.retrieval_x2y + res.retrieval_y2x);

    const std::vector<int> gal_rows = rows_of_seen(train.labels, st.seen_class);
    const bool regenerate = protocol == Protocol::P2 && phase >= 2;
    const auto [gx, gy] = gallery_codes(st.store, gal_rows, regenerate, st.fns, train);
    const LabelVector gl = labels_at(train.labels, gal_rows);
    res.hashing_x2y = eval::mean_ap(qx, tl, gy, gl, eval::kAll);
    res.hashing_y2x = eval::mean_ap(qy, tl, gx, gl, eval::kAll);
    res.hashing_avg = 0.5 * (res.hashing_x2y + res.hashing_y2x);
    return res;
}

ShuffleRun run_one_shuffle(const PairedDataset& train, const PairedDataset& test,
                           const std::vector<int>& phase_sizes, Protocol protocol,
                           Method method, const RunSettings& settings, std::uint64_t rs) {
    ShuffleRun run;
    run.shuffle_seed = rs;
    run.class_order = make_class_order(train.class_count, rs);

    ShuffleState st;
    st.store = CodeStore(train.size(), settings.bits);
    st.seen_class.assign(static_cast<std::size_t>(train.class_count), 0);
    st.remap.resize(static_cast<std::size_t>(train.class_count));
    for (std::size_t i = 0; i < run.class_order.size(); ++i)
        st.remap[static_cast<std::size_t>(run.class_order[i])] = static_cast<int>(i);
    st.fns.method = method;

    const auto by_class = rows_by_class(train.labels, train.class_count);
    std::size_t consumed = 0;
    for (int phase = 1; phase <= static_cast<int>(phase_sizes.size()); ++phase) {
        const auto t0 = std::chrono::steady_clock::now();
        const auto size = static_cast<std::size_t>(phase_sizes[static_cast<std::size_t>(phase - 1)]);
        const std::vector<int> phase_classes(run.class_order.begin() + consumed,
                                             run.class_order.begin() + consumed + size);
        consumed += size;
        std::vector<int> new_rows;
        for (const int c : phase_classes) {
            const auto& rc = by_class[static_cast<std::size_t>(c)];
            new_rows.insert(new_rows.end(), rc.begin(), rc.end());
        }
        std::sort(new_rows.begin(), new_rows.end());
        for (const int c : phase_classes) st.seen_class[static_cast<std::size_t>(c)] = 1;
        st.seen_count += static_cast<int>(size);

        if (phase == 1 || protocol == Protocol::P1) {
            const std::vector<int> rows = rows_of_seen(train.labels, st.seen_class);
            train_from_scratch(st, train, rows, method, settings, rs, phase);
        } else if (protocol == Protocol::P3) {
            train_incremental(st, train, new_rows, method, settings, rs, phase);
        }
        // P2 past phase 1: the frozen model carries over untouched.

        if (protocol == Protocol::P3) refresh_exemplars(st, train, phase_classes, settings, rs, phase);

        PhaseResult res = evaluate_phase(st, train, test, protocol, method, phase);
        res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        run.phases.push_back(res);
    }
    return run;
}

}  // namespace

std::string protocol_name(Protocol p) {
    switch (p) {
        case Protocol::P1: return "P1";
        case Protocol::P2: return "P2";
        default: return "P3";
    }
}

std::string method_name(Method m) {
    switch (m) {
        case Method::Lr1: return "lr1";
        case Method::Lr2: return "lr2";
        case Method::Lr3: return "lr3";
        default: return "mlp";
    }
}

Protocol parse_protocol(const std::string& s) {
    if (s == "P1" || s == "p1") return Protocol::P1;
    if (s == "P2" || s == "p2") return Protocol::P2;
    if (s == "P3" || s == "p3") return Protocol::P3;
    throw std::invalid_argument("unknown protocol '" + s + "' (valid: P1, P2, P3)");
}

Method parse_method(const std::string& s) {
    if (s == "lr1") return Method::Lr1;
    if (s == "lr2") return Method::Lr2;
    if (s == "lr3") return Method::Lr3;
    if (s == "mlp") return Method::Mlp;
    throw std::invalid_argument("unknown method '" + s + "' (valid: lr1, lr2, lr3, mlp)");
}

ExemplarStore select_exemplars(const PairedDataset& data, const std::vector<int>& classes,
                               int samples_per_class, std::uint64_t seed) {
    if (samples_per_class < 1)
        throw std::invalid_argument("select_exemplars: samplesPerClass must be >= 1");
    const auto by_class = rows_by_class(data.labels, data.class_count);
    ExemplarStore store;
    store.samples_per_class = samples_per_class;
    for (const int c : classes) {
        auto rows = by_class.at(static_cast<std::size_t>(c));
        if (rows.empty())
            throw std::invalid_argument("select_exemplars: class " + std::to_string(c) +
                                        " has no samples");
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(c)));
        rng.shuffle(rows);
        const auto keep = std::min<std::size_t>(rows.size(),
                                                static_cast<std::size_t>(samples_per_class));
        store.indices.insert(store.indices.end(), rows.begin(), rows.begin() + keep);
    }
    return store;
}

void append_exemplars(ExemplarStore& store, const PairedDataset& train,
                      const std::vector<int>& new_classes, const CodeStore& codes,
                      std::size_t bits, int samples_per_class, std::uint64_t seed) {
    const ExemplarStore fresh = select_exemplars(train, new_classes, samples_per_class, seed);
    Matrix a_new(fresh.indices.size(), bits);
    Matrix b_new(fresh.indices.size(), bits);
    for (std::size_t i = 0; i < fresh.indices.size(); ++i) {
        const auto r = static_cast<std::size_t>(fresh.indices[i]);
        if (!codes.present[r])
            throw std::logic_error("append_exemplars: row " + std::to_string(r) +
                                   " has no stored code");
        for (std::size_t j = 0; j < bits; ++j) {
            a_new(i, j) = codes.a(r, j);
            b_new(i, j) = codes.b(r, j);
        }
    }
    store.indices.insert(store.indices.end(), fresh.indices.begin(), fresh.indices.end());
    store.a_exemplar = vstack(store.a_exemplar, a_new);
    store.b_exemplar = vstack(store.b_exemplar, b_new);
    store.samples_per_class = samples_per_class;
}

std::vector<int> make_class_order(int class_count, std::uint64_t seed) {
    std::vector<int> order(static_cast<std::size_t>(class_count));
    std::iota(order.begin(), order.end(), 0);
    Rng rng(seed);
    rng.shuffle(order);
    return order;
}

void CodeStore::put(std::size_t row, const double* arow, const double* brow) {
    present[row] = 1;
    for (std::size_t j = 0; j < a.cols(); ++j) {
        a(row, j) = arow[j];
        b(row, j) = brow[j];
    }
}

BinaryCodeMatrix MethodState::hash_x(const Matrix& feats) const {
    return method == Method::Mlp ? mlpfn::apply(mx, feats) : linfn::apply(fx, feats);
}

BinaryCodeMatrix MethodState::hash_y(const Matrix& feats) const {
    return method == Method::Mlp ? mlpfn::apply(my, feats) : linfn::apply(fy, feats);
}

std::pair<BinaryCodeMatrix, BinaryCodeMatrix> gallery_codes(const CodeStore& store,
                                                            const std::vector<int>& rows,
                                                            bool regenerate,
                                                            const MethodState& state,
                                                            const PairedDataset& train) {
    if (regenerate) {
        return {state.hash_x(take_rows(train.x, rows)), state.hash_y(take_rows(train.y, rows))};
    }
    for (const int r : rows)
        if (!store.present[static_cast<std::size_t>(r)])
            throw std::runtime_error("gallery_codes: row " + std::to_string(r) +
                                     " has no stored code and regeneration is off");
    return {BinaryCodeMatrix::from_signs(take_rows(store.a, rows)),
            BinaryCodeMatrix::from_signs(take_rows(store.b, rows))};
}

ProtocolResult run_protocol(const PairedDataset& train, const PairedDataset& test,
                            const PhasePlan& plan, Protocol protocol, Method method,
                            const RunSettings& settings) {
    validate_dataset(train);
    validate_dataset(test);
    if (plan.shuffle_seeds.empty())
        throw std::invalid_argument("run_protocol: at least one shuffle seed is required");
    int sum = 0;
    for (const int s : plan.phase_sizes) {
        if (s < 1) throw std::invalid_argument("run_protocol: every phase needs >= 1 class");
        sum += s;
    }
    if (sum != train.class_count)
        throw std::invalid_argument("run_protocol: phase sizes sum to " + std::to_string(sum) +
                                    ", expected " + std::to_string(train.class_count));

    ProtocolResult result;
    for (const auto rs : plan.shuffle_seeds)
        result.runs.push_back(
            run_one_shuffle(train, test, plan.phase_sizes, protocol, method, settings, rs));

    const std::size_t phases = plan.phase_sizes.size();
    const double inv = 1.0 / static_cast<double>(result.runs.size());
    for (std::size_t p = 0; p < phases; ++p) {
        PhaseResult avg = result.runs.front().phases[p];
        avg.retrieval_x2y = avg.retrieval_y2x = avg.retrieval_avg = 0;
        avg.hashing_x2y = avg.hashing_y2x = avg.hashing_avg = 0;
        avg.seconds = 0;
        for (const auto& run : result.runs) {
            const auto& r = run.phases[p];
            avg.retrieval_x2y += r.retrieval_x2y * inv;
            avg.retrieval_y2x += r.retrieval_y2x * inv;
            avg.retrieval_avg += r.retrieval_avg * inv;
            avg.hashing_x2y += r.hashing_x2y * inv;
            avg.hashing_y2x += r.hashing_y2x * inv;
            avg.hashing_avg += r.hashing_avg * inv;
            avg.seconds += r.seconds * inv;
        }
        result.averaged.push_back(avg);
    }
    return result;
}

}  // namespace icmh::protocol
