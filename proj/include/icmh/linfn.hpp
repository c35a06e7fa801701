#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "icmh/codegen.hpp"
#include "icmh/types.hpp"

namespace icmh::linfn {

// Per-bit ridge-regression hash function: column l of `weights` maps a
// d-dimensional feature row to bit l's relaxed response.
struct LinearHashFunction {
    Matrix weights;            // d x q
    double reg_lambda = 0.0;
    double variant_gamma = 0.0;  // 0 for base fits
};

struct CvConfig {
    int folds = 5;
    std::vector<double> lambda_grid;  // positive, searched ascending
    std::vector<double> gamma_grid;   // positive, searched ascending
    int per_class_validation_count = 5;
    std::uint64_t seed = 0;
};

// 1e-3 .. 1e3, one point per decade.
std::vector<double> default_log_grid();

// Minimizes ||X f - a||^2 + lambda ||f||^2 per code column:
//   f = (X^T X + lambda I)^-1 X^T a.
// Throws when the normal-equation matrix is not positive definite
// (possible only at lambda = 0 with rank-deficient X).
LinearHashFunction fit_base(const Matrix& x, const Matrix& codes, double lambda);

// Closed-form adaptation toward the previous phase's function. The
// three variants minimize, per column (f_o = old column):
//   1: ||Xf-a||^2 + lambda||f||^2 + gamma||f - f_o||^2
//   2: ||Xf-a||^2 + lambda||f||^2 + gamma||X f - X f_o||^2
//   3: ||Xf-a||^2 + lambda||f||^2 + gamma||f - f_o||^2 + gamma||X f - X f_o||^2
LinearHashFunction fit_incremental(const Matrix& x, const Matrix& codes,
                                   const LinearHashFunction& old, double lambda, double gamma,
                                   int variant);

// Real-valued responses X * weights (used by validation scoring).
Matrix project(const LinearHashFunction& f, const Matrix& x);

// sign(X * weights) as packed codes.
BinaryCodeMatrix apply(const LinearHashFunction& f, const Matrix& x);

struct CvChoice {
    double lambda = 0.0;
    double gamma = 0.0;
    double score = 0.0;  // mean squared validation error of the winner
};

// Balanced-validation grid search shared by both modalities: draws
// per_class_validation_count samples from every class into a pool,
// rotates the pool through `folds` round-robin folds, fits x->A and
// y->B on everything outside the held-out fold, and scores summed MSE
// against the relaxed codes. Ties break toward the smallest lambda,
// then gamma. `old_x`/`old_y` feed fit_incremental; cross_validate_base
// pins gamma = 0 so the previous functions are irrelevant.
CvChoice cross_validate(const PairedDataset& train, const Matrix& code_a, const Matrix& code_b,
                        const LinearHashFunction& old_x, const LinearHashFunction& old_y,
                        int variant, const CvConfig& cfg);

CvChoice cross_validate_base(const PairedDataset& train, const Matrix& code_a,
                             const Matrix& code_b, const CvConfig& cfg);

void save_linear(const std::string& path_stem, const LinearHashFunction& f, int variant);
LinearHashFunction load_linear(const std::string& path_stem);

}  // namespace icmh::linfn
