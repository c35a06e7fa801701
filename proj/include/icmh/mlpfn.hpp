#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "icmh/rng.hpp"
#include "icmh/types.hpp"

namespace icmh::mlpfn {

struct LinearLayer {
    Matrix w;  // fan_in x fan_out
    std::vector<double> b;
};

// Two hidden layers (relu + dropout each), then a tanh hash head and a
// softmax classifier head off the shared latent.
struct MlpHashFunction {
    LinearLayer fc1, fc2, hash_head, ce_head;
    double dropout_rate = 0.5;

    std::size_t in_dim() const { return fc1.w.rows(); }
    std::size_t code_bits() const { return hash_head.w.cols(); }
    int class_count() const { return static_cast<int>(ce_head.w.cols()); }
};

// Seeded init, weights and biases uniform in +-1/sqrt(fan_in).
MlpHashFunction make_mlp(std::size_t d, std::size_t h1, std::size_t h2, std::size_t q,
                         int class_count, double dropout_rate, std::uint64_t seed);

struct ForwardResult {
    Matrix latent;    // N x h2, post-dropout in training mode
    Matrix hash_out;  // N x q, entries strictly inside (-1, 1)
    Matrix ce_out;    // N x C, rows sum to 1
};

// Training mode applies inverted dropout driven by `dropout_seed`;
// evaluation mode is deterministic.
ForwardResult forward(const MlpHashFunction& net, const Matrix& x, bool training,
                      std::uint64_t dropout_seed = 0);

// Squared-error pull of both networks' hash outputs toward the relaxed
// codes: sum over all entries of both modalities.
double hash_loss(const Matrix& hash_x, const Matrix& target_a, const Matrix& hash_y,
                 const Matrix& target_b);

using ClassWeights = std::vector<double>;

ClassWeights uniform_class_weights(int class_count);
// w_j = total/n_j, the inverse-frequency weights.
ClassWeights compute_class_weights(const LabelVector& labels, int class_count);

// -sum_i w_{l_i} (log ceX(i,l_i) + log ceY(i,l_i)), probabilities
// clamped at 1e-12 before the log.
double weighted_ce_loss(const Matrix& ce_x, const Matrix& ce_y, const LabelVector& labels,
                        const ClassWeights& weights);

struct TrainConfig {
    int epochs = 150;
    int batch_size = 32;
    double learning_rate = 0.05;
    std::uint64_t seed = 0;
    bool use_class_weights = false;
    bool use_imbalanced_sampler = false;
};

// Extension point for an additional loss on the batch hash outputs
// (e.g. a distillation penalty). Receives the two outputs, accumulates
// d(loss)/d(hash_out) into the gradient matrices (which already hold
// the hash-loss gradient), and returns the loss value.
using ExtraLossFn = std::function<double(const Matrix& hash_x, const Matrix& hash_y,
                                         Matrix& grad_hash_x, Matrix& grad_hash_y)>;

struct TrainTrace {
    std::vector<double> epoch_loss;  // summed batch losses per epoch
};

// Joint plain-SGD training of both modality networks over shared
// mini-batch indices; parameter updates use the batch-mean gradient.
// Throws on a non-finite loss.
TrainTrace train_pair(MlpHashFunction& net_x, MlpHashFunction& net_y, const Matrix& x,
                      const Matrix& y, const Matrix& code_a, const Matrix& code_b,
                      const LabelVector& labels, const TrainConfig& cfg,
                      const ExtraLossFn& extra = nullptr);

// Widens the classifier head; every non-ce parameter and the old-class
// ce columns are copied bit-exactly, new columns seeded small-uniform.
MlpHashFunction expand_classifier(const MlpHashFunction& old, int new_class_count,
                                  std::uint64_t seed);

// With-replacement draw of batch_size indices, each sample weighted by
// the inverse of its class frequency.
std::vector<int> imbalanced_sample_indices(const LabelVector& labels, std::size_t batch_size,
                                           Rng& rng);
std::vector<int> imbalanced_sample_indices(const LabelVector& labels, std::size_t batch_size,
                                           std::uint64_t seed);

// Evaluation-mode hash codes: sign of the tanh head.
BinaryCodeMatrix apply(const MlpHashFunction& net, const Matrix& x);

void save_mlp(const std::string& dir, const std::string& stem, const MlpHashFunction& net);
MlpHashFunction load_mlp(const std::string& dir, const std::string& stem);

}  // namespace icmh::mlpfn
