#include "icmh/codegen.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <stdexcept>

#include "icmh/io.hpp"
#include "icmh/kernels.hpp"
#include "icmh/rng.hpp"

namespace icmh::codegen {
namespace {

void check_shapes(const SimilarityMatrix& s, const Matrix& a, const Matrix& b) {
    if (!a.same_shape(b)) throw std::invalid_argument("codegen: A and B shapes differ");
    if (s.values.rows() != s.values.cols() || s.size() != a.rows())
        throw std::invalid_argument("codegen: S must be NxN with N = code rows");
    if (a.cols() < 1) throw std::invalid_argument("codegen: q must be >= 1");
}

// Pairing term over rows [from, N).
double pair_term(const Matrix& a, const Matrix& b, std::size_t from) {
    if (from >= a.rows()) return 0.0;
    const std::size_t len = (a.rows() - from) * a.cols();
    return kernels::sq_diff_sum(a.row(from), b.row(from), len);
}

double objective_with_frozen(const SimilarityMatrix& s, const Matrix& a, const Matrix& b,
                             double lambda_h, std::size_t frozen_rows) {
    const double q = static_cast<double>(a.cols());
    const Matrix p = matmul_nt(a, b);
    double fit = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double d = s.values.data()[i] - p.data()[i] / q;
        fit += d * d;
    }
    return fit + lambda_h * pair_term(a, b, frozen_rows);
}

Matrix random_codes(std::size_t rows, std::size_t q, std::uint64_t seed, std::uint64_t stream0,
                    std::uint64_t row_offset) {
    Matrix m(rows, q);
    for (std::size_t i = 0; i < rows; ++i) {
        Rng rng(derive_seed(seed, stream0 + 2 * (row_offset + i)));
        for (std::size_t j = 0; j < q; ++j) m(i, j) = rng.uniform_pm1();
    }
    return m;
}

// One alternating half-step updates the trailing rows of `primary`
// against fixed `other`. All products with S are hoisted out of the
// backtracking loop; trial evaluations only touch the movable rows.
class HalfStep {
public:
    HalfStep(const Matrix& s_times_other, const Matrix& gram_other, double s_frob,
             double lambda_h, std::size_t frozen, double q)
        : lin_(s_times_other), gram_(gram_other), s_frob_(s_frob), lambda_(lambda_h),
          frozen_(frozen), q_(q) {}

    double eval(const Matrix& primary, const Matrix& other) const {
        Matrix t = matmul(primary, gram_);
        const double lin = buffer_dot(primary, lin_);
        const double quad = buffer_dot(primary, t);
        return s_frob_ - (2.0 / q_) * lin + (1.0 / (q_ * q_)) * quad +
               lambda_ * pair_term(primary, other, frozen_);
    }

    // gradient rows [frozen, N); the pairing derivative w.r.t. the
    // moving side is 2*lambda*(primary - other) for either modality
    Matrix gradient(const Matrix& primary, const Matrix& other) const {
        Matrix g = matmul(primary, gram_);
        scale_inplace(g, 2.0 / (q_ * q_));
        add_scaled(g, -2.0 / q_, lin_);
        if (lambda_ != 0.0) {
            for (std::size_t i = frozen_; i < primary.rows(); ++i)
                for (std::size_t j = 0; j < primary.cols(); ++j)
                    g(i, j) += 2.0 * lambda_ * (primary(i, j) - other(i, j));
        }
        return g;
    }

private:
    const Matrix& lin_;   // S * other (or S^T * other)
    Matrix gram_;         // other^T other
    double s_frob_, lambda_;
    std::size_t frozen_;
    double q_;
};

struct PgdResult {
    std::vector<double> trace;
};

constexpr int kMaxHalvings = 60;

// Alternating projected gradient descent over rows [frozen, N) of A and
// B. Acceptance compares against a single running objective value, so
// the recorded trace is non-increasing by construction.
PgdResult pgd(const SimilarityMatrix& s, Matrix& a, Matrix& b, std::size_t frozen,
              const CodeLearnerConfig& cfg) {
    const double q = static_cast<double>(a.cols());
    const std::size_t n = a.rows();
    const double s_frob = frob_sq(s.values);

    clamp_unit_inplace(a);
    clamp_unit_inplace(b);

    double f_cur = objective_with_frozen(s, a, b, cfg.lambda_h, frozen);
    PgdResult out;
    out.trace.push_back(f_cur);
    if (frozen >= n) return out;

    double eta_a = cfg.eta_init, eta_b = cfg.eta_init;
    const double eta_cap = cfg.eta_init * 1024.0;

    // moves the trailing rows of `m` along -eta * g, projected
    const auto step_rows = [&](const Matrix& m, const Matrix& g, double eta) {
        Matrix trial = m;
        const std::size_t len = (n - frozen) * m.cols();
        kernels::axpy(-eta, g.row(frozen), trial.row(frozen), len);
        kernels::clamp_unit(trial.row(frozen), len);
        return trial;
    };

    const auto half_step = [&](Matrix& primary, const Matrix& other, const Matrix& lin,
                               double& eta) {
        HalfStep hs(lin, matmul_tn(other, other), s_frob, cfg.lambda_h, frozen, q);
        const Matrix grad = hs.gradient(primary, other);
        for (int h = 0; h <= kMaxHalvings; ++h) {
            Matrix trial = step_rows(primary, grad, eta);
            const double f_trial = hs.eval(trial, other);
            if (f_trial <= f_cur) {
                primary = std::move(trial);
                f_cur = f_trial;
                if (h == 0) eta = std::min(eta * 1.5, eta_cap);
                return true;
            }
            eta *= 0.5;
        }
        return false;
    };

    for (std::size_t it = 0; it < cfg.max_iters; ++it) {
        const double f_prev = f_cur;
        const Matrix sb = matmul(s.values, b);
        const bool moved_a = half_step(a, b, sb, eta_a);
        const Matrix sta = matmul_tn(s.values, a);  // S^T A
        const bool moved_b = half_step(b, a, sta, eta_b);
        out.trace.push_back(f_cur);
        if (!moved_a && !moved_b) break;
        if (f_prev - f_cur <= cfg.rel_tol * std::max(std::abs(f_prev), 1e-12)) break;
    }
    return out;
}

}  // namespace

double objective(const SimilarityMatrix& s, const Matrix& a, const Matrix& b, double lambda_h) {
    check_shapes(s, a, b);
    return objective_with_frozen(s, a, b, lambda_h, 0);
}

std::pair<Matrix, Matrix> gradients(const SimilarityMatrix& s, const Matrix& a, const Matrix& b,
                                    double lambda_h) {
    check_shapes(s, a, b);
    const double q = static_cast<double>(a.cols());

    Matrix da = matmul(a, matmul_tn(b, b));
    scale_inplace(da, 2.0 / (q * q));
    Matrix sb = matmul(s.values, b);
    add_scaled(da, -2.0 / q, sb);

    Matrix db = matmul(b, matmul_tn(a, a));
    scale_inplace(db, 2.0 / (q * q));
    Matrix sta = matmul_tn(s.values, a);
    add_scaled(db, -2.0 / q, sta);

    if (lambda_h != 0.0) {
        for (std::size_t i = 0; i < a.rows(); ++i)
            for (std::size_t j = 0; j < a.cols(); ++j) {
                const double diff = a(i, j) - b(i, j);
                da(i, j) += 2.0 * lambda_h * diff;
                db(i, j) -= 2.0 * lambda_h * diff;
            }
    }
    return {std::move(da), std::move(db)};
}

CodePair learn_base(const SimilarityMatrix& s, const CodeLearnerConfig& cfg) {
    const std::size_t n = s.size();
    return learn_base_from(s, random_codes(n, cfg.bits, cfg.seed, 0, 0),
                           random_codes(n, cfg.bits, cfg.seed, 1, 0), cfg);
}

CodePair learn_base_from(const SimilarityMatrix& s, Matrix a0, Matrix b0,
                         const CodeLearnerConfig& cfg) {
    check_shapes(s, a0, b0);
    CodePair out{std::move(a0), std::move(b0), {}};
    out.objective_trace = pgd(s, out.a, out.b, 0, cfg).trace;
    return out;
}

IncrementalCodes learn_incremental(const SimilarityMatrix& s_bar, const Matrix& a_exemplar,
                                   const Matrix& b_exemplar, std::size_t new_count,
                                   const CodeLearnerConfig& cfg) {
    if (!a_exemplar.same_shape(b_exemplar))
        throw std::invalid_argument("learn_incremental: exemplar code shapes differ");
    if (!within_unit_interval(a_exemplar) || !within_unit_interval(b_exemplar))
        throw std::invalid_argument("learn_incremental: exemplar codes outside [-1,1]");
    const std::size_t ne = a_exemplar.rows();
    const std::size_t q = cfg.bits;
    if (ne > 0 && a_exemplar.cols() != q)
        throw std::invalid_argument("learn_incremental: exemplar width != cfg.bits");
    if (s_bar.values.rows() != ne + new_count || s_bar.values.cols() != ne + new_count)
        throw std::invalid_argument("learn_incremental: S size != exemplar + new rows");

    Matrix a = vstack(a_exemplar, random_codes(new_count, q, cfg.seed, 0, ne));
    Matrix b = vstack(b_exemplar, random_codes(new_count, q, cfg.seed, 1, ne));
    if (a.empty()) {
        return {Matrix(0, q), Matrix(0, q), {}};
    }

    IncrementalCodes out;
    out.objective_trace = pgd(s_bar, a, b, ne, cfg).trace;
    out.a_hat = Matrix(new_count, q);
    out.b_hat = Matrix(new_count, q);
    for (std::size_t i = 0; i < new_count; ++i)
        for (std::size_t j = 0; j < q; ++j) {
            out.a_hat(i, j) = a(ne + i, j);
            out.b_hat(i, j) = b(ne + i, j);
        }
    return out;
}

BinaryCodeMatrix quantize(const Matrix& relaxed) { return BinaryCodeMatrix::from_signs(relaxed); }

void save_code_pair(const std::string& dir, const std::string& stem, const CodePair& codes,
                    const CodeLearnerConfig& cfg) {
    namespace fs = std::filesystem;
    io::save_matrix((fs::path(dir) / (stem + "_a.txt")).string(), codes.a);
    io::save_matrix((fs::path(dir) / (stem + "_b.txt")).string(), codes.b);
    char obj[40];
    std::snprintf(obj, sizeof obj, "%.17g",
                  codes.objective_trace.empty() ? 0.0 : codes.objective_trace.back());
    io::save_keyvalue((fs::path(dir) / (stem + "_meta.txt")).string(),
                      {{"q", std::to_string(codes.a.cols())},
                       {"lambda_h", std::to_string(cfg.lambda_h)},
                       {"seed", std::to_string(cfg.seed)},
                       {"iterations", std::to_string(codes.objective_trace.empty()
                                                         ? 0
                                                         : codes.objective_trace.size() - 1)},
                       {"final_objective", obj}});
}

CodePair load_code_pair(const std::string& dir, const std::string& stem) {
    namespace fs = std::filesystem;
    CodePair out;
    out.a = io::load_matrix((fs::path(dir) / (stem + "_a.txt")).string());
    out.b = io::load_matrix((fs::path(dir) / (stem + "_b.txt")).string());
    const auto meta = io::load_keyvalue((fs::path(dir) / (stem + "_meta.txt")).string());
    if (auto it = meta.find("final_objective"); it != meta.end())
        out.objective_trace.push_back(std::stod(it->second));
    return out;
}

}  // namespace icmh::codegen
