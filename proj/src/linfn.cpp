#include "icmh/linfn.hpp"

#include <algorithm>
#include <cstdio>
#include <stdexcept>

#include "icmh/io.hpp"
#include "icmh/rng.hpp"

namespace icmh::linfn {
namespace {

void add_diag(Matrix& m, double v) {
    for (std::size_t i = 0; i < m.rows(); ++i) m(i, i) += v;
}

// Solves M W = R column-by-column through one Cholesky factorization.
Matrix solve_spd(Matrix m, const Matrix& rhs) {
    if (!cholesky_factor(m))
        throw std::runtime_error("linfn: normal-equation matrix is not positive definite");
    Matrix w(rhs.rows(), rhs.cols());
    std::vector<double> col(rhs.rows());
    for (std::size_t j = 0; j < rhs.cols(); ++j) {
        for (std::size_t i = 0; i < rhs.rows(); ++i) col[i] = rhs(i, j);
        const auto sol = cholesky_solve(m, col);
        for (std::size_t i = 0; i < rhs.rows(); ++i) w(i, j) = sol[i];
    }
    return w;
}

void check_fit_inputs(const Matrix& x, const Matrix& codes, double lambda) {
    if (x.rows() != codes.rows())
        throw std::invalid_argument("linfn: feature and code row counts differ");
    if (x.rows() == 0) throw std::invalid_argument("linfn: empty training set");
    if (lambda < 0.0) throw std::invalid_argument("linfn: lambda must be >= 0");
}

}  // namespace

std::vector<double> default_log_grid() {
    return {1e-3, 1e-2, 1e-1, 1.0, 1e1, 1e2, 1e3};
}

LinearHashFunction fit_base(const Matrix& x, const Matrix& codes, double lambda) {
    check_fit_inputs(x, codes, lambda);
    Matrix m = matmul_tn(x, x);
    add_diag(m, lambda);
    LinearHashFunction f;
    f.weights = solve_spd(std::move(m), matmul_tn(x, codes));
    f.reg_lambda = lambda;
    return f;
}

LinearHashFunction fit_incremental(const Matrix& x, const Matrix& codes,
                                   const LinearHashFunction& old, double lambda, double gamma,
                                   int variant) {
    check_fit_inputs(x, codes, lambda);
    if (gamma < 0.0) throw std::invalid_argument("linfn: gamma must be >= 0");
    if (variant < 1 || variant > 3)
        throw std::invalid_argument("linfn: unknown variant (expected 1, 2 or 3)");
    if (old.weights.rows() != x.cols() || old.weights.cols() != codes.cols())
        throw std::invalid_argument("linfn: previous function shape mismatch");

    const Matrix xtx = matmul_tn(x, x);
    Matrix m = xtx;
    Matrix rhs = matmul_tn(x, codes);
    if (variant == 2 || variant == 3) scale_inplace(m, 1.0 + gamma);
    add_diag(m, variant == 2 ? lambda : lambda + gamma);
    if (variant == 1 || variant == 3) add_scaled(rhs, gamma, old.weights);
    if (variant == 2 || variant == 3) add_scaled(rhs, gamma, matmul(xtx, old.weights));

    LinearHashFunction f;
    f.weights = solve_spd(std::move(m), rhs);
    f.reg_lambda = lambda;
    f.variant_gamma = gamma;
    return f;
}

Matrix project(const LinearHashFunction& f, const Matrix& x) {
    if (x.cols() != f.weights.rows())
        throw std::invalid_argument("linfn: feature width does not match weights");
    return matmul(x, f.weights);
}

BinaryCodeMatrix apply(const LinearHashFunction& f, const Matrix& x) {
    return BinaryCodeMatrix::from_signs(project(f, x));
}

namespace {

struct FoldCache {
    std::vector<int> fit_rows, val_rows;
    // per modality: X^T X, X^T A, X^T X W_old over the fit rows
    Matrix xtx[2], xta[2], xtx_wold[2];
};

// variant 0 = base fit (gamma forced to 0, old functions unused)
CvChoice cv_impl(const PairedDataset& train, const Matrix& code_a, const Matrix& code_b,
                 const LinearHashFunction* old_x, const LinearHashFunction* old_y, int variant,
                 const CvConfig& cfg, std::vector<double> lambda_grid,
                 std::vector<double> gamma_grid) {
    if (cfg.folds < 2) throw std::invalid_argument("cross_validate: folds must be >= 2");
    if (lambda_grid.empty() || gamma_grid.empty())
        throw std::invalid_argument("cross_validate: empty hyperparameter grid");
    if (cfg.per_class_validation_count < 1)
        throw std::invalid_argument("cross_validate: perClassValidationCount must be >= 1");
    const std::size_t n = train.size();
    if (code_a.rows() != n || code_b.rows() != n)
        throw std::invalid_argument("cross_validate: code rows do not match training rows");

    std::sort(lambda_grid.begin(), lambda_grid.end());
    std::sort(gamma_grid.begin(), gamma_grid.end());

    // Balanced pool: per_class_validation_count seeded draws from every
    // class present, then round-robin fold assignment in pool order (so
    // classes spread evenly over folds).
    const auto by_class = rows_by_class(train.labels, train.class_count);
    std::vector<int> pool;
    for (int c = 0; c < train.class_count; ++c) {
        auto rows = by_class[static_cast<std::size_t>(c)];
        if (rows.empty()) continue;
        if (static_cast<int>(rows.size()) < cfg.per_class_validation_count)
            throw std::invalid_argument("cross_validate: class " + std::to_string(c) +
                                        " has too few samples for the validation pool");
        Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(c)));
        rng.shuffle(rows);
        pool.insert(pool.end(), rows.begin(), rows.begin() + cfg.per_class_validation_count);
    }
    if (pool.empty()) throw std::invalid_argument("cross_validate: no classes present");

    const int folds = cfg.folds;
    std::vector<FoldCache> caches(static_cast<std::size_t>(folds));
    std::vector<char> fold_of_row(n, -1);
    for (std::size_t i = 0; i < pool.size(); ++i)
        fold_of_row[static_cast<std::size_t>(pool[i])] = static_cast<char>(i % folds);

    const Matrix* codes[2] = {&code_a, &code_b};
    const Matrix* feats[2] = {&train.x, &train.y};
    const LinearHashFunction* olds[2] = {old_x, old_y};
    for (int f = 0; f < folds; ++f) {
        auto& cache = caches[static_cast<std::size_t>(f)];
        for (std::size_t r = 0; r < n; ++r) {
            if (fold_of_row[r] == f)
                cache.val_rows.push_back(static_cast<int>(r));
            else
                cache.fit_rows.push_back(static_cast<int>(r));
        }
        for (int mo = 0; mo < 2; ++mo) {
            const Matrix xf = take_rows(*feats[mo], cache.fit_rows);
            cache.xtx[mo] = matmul_tn(xf, xf);
            cache.xta[mo] = matmul_tn(xf, take_rows(*codes[mo], cache.fit_rows));
            if (variant == 2 || variant == 3)
                cache.xtx_wold[mo] = matmul(cache.xtx[mo], olds[mo]->weights);
        }
    }

    CvChoice best;
    bool have_best = false;
    for (const double lambda : lambda_grid) {
        for (const double gamma : gamma_grid) {
            double err = 0.0;
            for (const auto& cache : caches) {
                for (int mo = 0; mo < 2; ++mo) {
                    Matrix m = cache.xtx[mo];
                    Matrix rhs = cache.xta[mo];
                    if (variant == 2 || variant == 3) scale_inplace(m, 1.0 + gamma);
                    add_diag(m, variant == 2 || variant == 0 ? lambda : lambda + gamma);
                    if (variant == 1 || variant == 3) add_scaled(rhs, gamma, olds[mo]->weights);
                    if (variant == 2 || variant == 3)
                        add_scaled(rhs, gamma, cache.xtx_wold[mo]);
                    const Matrix w = solve_spd(std::move(m), rhs);
                    err += frob_sq_diff(matmul(take_rows(*feats[mo], cache.val_rows), w),
                                        take_rows(*codes[mo], cache.val_rows));
                }
            }
            const double score =
                err / (2.0 * static_cast<double>(pool.size() * code_a.cols()));
            if (!have_best || score < best.score) {
                best = {lambda, gamma, score};
                have_best = true;
            }
        }
    }
    return best;
}

}  // namespace

CvChoice cross_validate(const PairedDataset& train, const Matrix& code_a, const Matrix& code_b,
                        const LinearHashFunction& old_x, const LinearHashFunction& old_y,
                        int variant, const CvConfig& cfg) {
    if (variant < 1 || variant > 3)
        throw std::invalid_argument("cross_validate: unknown variant (expected 1, 2 or 3)");
    auto lambda_grid = cfg.lambda_grid.empty() ? default_log_grid() : cfg.lambda_grid;
    auto gamma_grid = cfg.gamma_grid.empty() ? default_log_grid() : cfg.gamma_grid;
    return cv_impl(train, code_a, code_b, &old_x, &old_y, variant, cfg, std::move(lambda_grid),
                   std::move(gamma_grid));
}

CvChoice cross_validate_base(const PairedDataset& train, const Matrix& code_a,
                             const Matrix& code_b, const CvConfig& cfg) {
    auto lambda_grid = cfg.lambda_grid.empty() ? default_log_grid() : cfg.lambda_grid;
    return cv_impl(train, code_a, code_b, nullptr, nullptr, 0, cfg, std::move(lambda_grid),
                   {0.0});
}

void save_linear(const std::string& path_stem, const LinearHashFunction& f, int variant) {
    io::save_matrix(path_stem + "_w.txt", f.weights);
    char lam[40], gam[40];
    std::snprintf(lam, sizeof lam, "%.17g", f.reg_lambda);
    std::snprintf(gam, sizeof gam, "%.17g", f.variant_gamma);
    io::save_keyvalue(path_stem + "_meta.txt",
                      {{"lambda", lam}, {"gamma", gam}, {"variant", std::to_string(variant)}});
}

LinearHashFunction load_linear(const std::string& path_stem) {
    LinearHashFunction f;
    f.weights = io::load_matrix(path_stem + "_w.txt");
    const auto meta = io::load_keyvalue(path_stem + "_meta.txt");
    if (auto it = meta.find("lambda"); it != meta.end()) f.reg_lambda = std::stod(it->second);
    if (auto it = meta.find("gamma"); it != meta.end()) f.variant_gamma = std::stod(it->second);
    return f;
}

}  // namespace icmh::linfn
