#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "icmh/types.hpp"

namespace icmh::codegen {

struct CodeLearnerConfig {
    std::size_t bits = 128;     // q
    double lambda_h = 1.0;      // pairing weight between the two modalities
    std::size_t max_iters = 500;
    double rel_tol = 1e-6;
    double eta_init = 1e-2;
    std::uint64_t seed = 0;
};

struct CodePair {
    RelaxedCodeMatrix a;  // modality X
    RelaxedCodeMatrix b;  // modality Y
    std::vector<double> objective_trace;  // non-increasing, one entry per accepted iteration
};

// ||S - (1/q) A B^T||_F^2 + lambda_h ||A - B||_F^2, with q = a.cols().
double objective(const SimilarityMatrix& s, const Matrix& a, const Matrix& b, double lambda_h);

// Gradients of `objective` with respect to A and B:
//   dA = (2/q^2) A B^T B - (2/q) S B   + 2 lambda_h (A - B)
//   dB = (2/q^2) B A^T A - (2/q) S^T A - 2 lambda_h (A - B)
std::pair<Matrix, Matrix> gradients(const SimilarityMatrix& s, const Matrix& a, const Matrix& b,
                                    double lambda_h);

// Alternating projected gradient descent from a uniform [-1,1] random
// start (one seeded stream per row). Each half-step backtracks the step
// size until the objective does not increase, so the trace is
// non-increasing and every accepted iterate stays inside [-1,1].
CodePair learn_base(const SimilarityMatrix& s, const CodeLearnerConfig& cfg);

// Same optimizer from explicit starting matrices (clamped first).
CodePair learn_base_from(const SimilarityMatrix& s, Matrix a0, Matrix b0,
                         const CodeLearnerConfig& cfg);

struct IncrementalCodes {
    RelaxedCodeMatrix a_hat;  // codes for the new rows only
    RelaxedCodeMatrix b_hat;
    std::vector<double> objective_trace;
};

// Learns codes for the trailing `new_count` rows of s_bar while the
// exemplar codes stay fixed; the pairing term covers the new rows only.
// Exemplar inputs are never modified.
IncrementalCodes learn_incremental(const SimilarityMatrix& s_bar, const Matrix& a_exemplar,
                                   const Matrix& b_exemplar, std::size_t new_count,
                                   const CodeLearnerConfig& cfg);

// sign quantization; value >= 0 maps to +1
BinaryCodeMatrix quantize(const Matrix& relaxed);

// Codes persist in the matrix text format with a key=value metadata
// sidecar (q, lambda_h, seed, iterations, final objective).
void save_code_pair(const std::string& dir, const std::string& stem, const CodePair& codes,
                    const CodeLearnerConfig& cfg);
CodePair load_code_pair(const std::string& dir, const std::string& stem);

}  // namespace icmh::codegen
