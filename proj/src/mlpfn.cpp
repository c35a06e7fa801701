#include "icmh/mlpfn.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <stdexcept>

#include "icmh/io.hpp"

namespace icmh::mlpfn {
namespace {

constexpr double kLogFloor = 1e-12;

void init_layer(LinearLayer& layer, std::size_t fan_in, std::size_t fan_out, Rng& rng) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    layer.w = Matrix(fan_in, fan_out);
    for (std::size_t i = 0; i < layer.w.size(); ++i) layer.w.data()[i] = rng.uniform(-bound, bound);
    layer.b.resize(fan_out);
    for (auto& v : layer.b) v = rng.uniform(-bound, bound);
}

Matrix affine(const Matrix& x, const LinearLayer& layer) {
    Matrix z = matmul(x, layer.w);
    for (std::size_t i = 0; i < z.rows(); ++i)
        for (std::size_t j = 0; j < z.cols(); ++j) z(i, j) += layer.b[j];
    return z;
}

void relu_inplace(Matrix& z) {
    for (std::size_t i = 0; i < z.size(); ++i)
        if (z.data()[i] < 0.0) z.data()[i] = 0.0;
}

// Inverted dropout: kept entries scaled by 1/(1-p) so evaluation needs
// no rescaling. Returns the keep mask.
std::vector<char> dropout_inplace(Matrix& a, double rate, Rng& rng) {
    std::vector<char> mask(a.size(), 1);
    if (rate <= 0.0) return mask;
    const double scale = 1.0 / (1.0 - rate);
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (rng.uniform01() < rate) {
            mask[i] = 0;
            a.data()[i] = 0.0;
        } else {
            a.data()[i] *= scale;
        }
    }
    return mask;
}

void softmax_rows(Matrix& z) {
    for (std::size_t i = 0; i < z.rows(); ++i) {
        double* row = z.row(i);
        const double m = *std::max_element(row, row + z.cols());
        double sum = 0.0;
        for (std::size_t j = 0; j < z.cols(); ++j) sum += (row[j] = std::exp(row[j] - m));
        for (std::size_t j = 0; j < z.cols(); ++j) row[j] /= sum;
    }
}

// Everything backward needs from one network's forward pass.
struct Activations {
    Matrix z1, d1, z2, lat, hash, ce;
    std::vector<char> m1, m2;
};

void forward_cached(const MlpHashFunction& net, const Matrix& x, bool training, Rng* drop_rng,
                    Activations& act) {
    if (x.cols() != net.in_dim()) throw std::invalid_argument("mlp: feature width mismatch");
    act.z1 = affine(x, net.fc1);
    act.d1 = act.z1;
    relu_inplace(act.d1);
    if (training) act.m1 = dropout_inplace(act.d1, net.dropout_rate, *drop_rng);
    act.z2 = affine(act.d1, net.fc2);
    act.lat = act.z2;
    relu_inplace(act.lat);
    if (training) act.m2 = dropout_inplace(act.lat, net.dropout_rate, *drop_rng);
    act.hash = affine(act.lat, net.hash_head);
    for (std::size_t i = 0; i < act.hash.size(); ++i)
        act.hash.data()[i] = std::tanh(act.hash.data()[i]);
    act.ce = affine(act.lat, net.ce_head);
    softmax_rows(act.ce);
}

std::vector<double> column_sums(const Matrix& m) {
    std::vector<double> s(m.cols(), 0.0);
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) s[j] += m(i, j);
    return s;
}

void sgd_step(LinearLayer& layer, const Matrix& gw, const std::vector<double>& gb, double step) {
    add_scaled(layer.w, -step, gw);
    for (std::size_t j = 0; j < layer.b.size(); ++j) layer.b[j] -= step * gb[j];
}

void mask_backward(Matrix& grad, const std::vector<char>& mask, double rate) {
    if (rate <= 0.0) return;
    const double scale = 1.0 / (1.0 - rate);
    for (std::size_t i = 0; i < grad.size(); ++i)
        grad.data()[i] = mask[i] ? grad.data()[i] * scale : 0.0;
}

void relu_backward(Matrix& grad, const Matrix& z) {
    for (std::size_t i = 0; i < grad.size(); ++i)
        if (z.data()[i] <= 0.0) grad.data()[i] = 0.0;
}

struct BatchLosses {
    double hash = 0.0, ce = 0.0, extra = 0.0;
    double total() const { return hash + ce + extra; }
};

// Forward + backward + SGD update for both nets on one shared batch.
BatchLosses train_batch(MlpHashFunction& net_x, MlpHashFunction& net_y, const Matrix& xb,
                        const Matrix& yb, const Matrix& ab, const Matrix& bb,
                        const std::vector<int>& batch_labels, const ClassWeights& weights,
                        double learning_rate, Rng& drop_rng, const ExtraLossFn& extra) {
    const std::size_t bs = xb.rows();
    Activations ax, ay;
    forward_cached(net_x, xb, true, &drop_rng, ax);
    forward_cached(net_y, yb, true, &drop_rng, ay);

    BatchLosses losses;
    losses.hash = hash_loss(ax.hash, ab, ay.hash, bb);

    // d(loss)/d(hash output); the extra term may append to these
    Matrix ghx = ax.hash, ghy = ay.hash;
    add_scaled(ghx, -1.0, ab);
    scale_inplace(ghx, 2.0);
    add_scaled(ghy, -1.0, bb);
    scale_inplace(ghy, 2.0);
    if (extra) losses.extra = extra(ax.hash, ay.hash, ghx, ghy);

    const auto backprop = [&](MlpHashFunction& net, const Matrix& input, Activations& act,
                              Matrix& gh) {
        // tanh head: dZ = gh * (1 - hash^2)
        for (std::size_t i = 0; i < gh.size(); ++i)
            gh.data()[i] *= 1.0 - act.hash.data()[i] * act.hash.data()[i];
        // softmax + weighted CE head: dZ = w_i (p - onehot), rescaled so
        // the CE update is normalized by the batch weight sum (the
        // usual weighted-mean convention) instead of the batch size
        double weight_sum = 0.0;
        for (std::size_t i = 0; i < bs; ++i)
            weight_sum += weights[static_cast<std::size_t>(batch_labels[i])];
        const double ce_scale = static_cast<double>(bs) / weight_sum;
        Matrix gc = act.ce;
        for (std::size_t i = 0; i < bs; ++i) {
            const double w = ce_scale * weights[static_cast<std::size_t>(batch_labels[i])];
            for (std::size_t j = 0; j < gc.cols(); ++j) gc(i, j) *= w;
            gc(i, static_cast<std::size_t>(batch_labels[i])) -= w;
        }

        Matrix dlat = matmul_nt(gh, net.hash_head.w);
        add_scaled(dlat, 1.0, matmul_nt(gc, net.ce_head.w));
        const Matrix gwh = matmul_tn(act.lat, gh);
        const Matrix gwc = matmul_tn(act.lat, gc);

        mask_backward(dlat, act.m2, net.dropout_rate);
        relu_backward(dlat, act.z2);
        const Matrix gw2 = matmul_tn(act.d1, dlat);
        const auto gb2 = column_sums(dlat);

        Matrix dd1 = matmul_nt(dlat, net.fc2.w);
        mask_backward(dd1, act.m1, net.dropout_rate);
        relu_backward(dd1, act.z1);
        const Matrix gw1 = matmul_tn(input, dd1);
        const auto gb1 = column_sums(dd1);

        const double step = learning_rate / static_cast<double>(bs);
        sgd_step(net.hash_head, gwh, column_sums(gh), step);
        sgd_step(net.ce_head, gwc, column_sums(gc), step);
        sgd_step(net.fc2, gw2, gb2, step);
        sgd_step(net.fc1, gw1, gb1, step);
    };

    losses.ce = weighted_ce_loss(ax.ce, ay.ce, batch_labels, weights);
    backprop(net_x, xb, ax, ghx);
    backprop(net_y, yb, ay, ghy);
    return losses;
}

}  // namespace

MlpHashFunction make_mlp(std::size_t d, std::size_t h1, std::size_t h2, std::size_t q,
                         int class_count, double dropout_rate, std::uint64_t seed) {
    if (d == 0 || h1 == 0 || h2 == 0 || q == 0 || class_count < 1)
        throw std::invalid_argument("make_mlp: all dimensions must be positive");
    if (dropout_rate < 0.0 || dropout_rate >= 1.0)
        throw std::invalid_argument("make_mlp: dropout rate must be in [0,1)");
    MlpHashFunction net;
    net.dropout_rate = dropout_rate;
    Rng rng(seed);
    init_layer(net.fc1, d, h1, rng);
    init_layer(net.fc2, h1, h2, rng);
    init_layer(net.hash_head, h2, q, rng);
    init_layer(net.ce_head, h2, static_cast<std::size_t>(class_count), rng);
    return net;
}

ForwardResult forward(const MlpHashFunction& net, const Matrix& x, bool training,
                      std::uint64_t dropout_seed) {
    Activations act;
    if (training) {
        Rng rng(dropout_seed);
        forward_cached(net, x, true, &rng, act);
    } else {
        forward_cached(net, x, false, nullptr, act);
    }
    return {std::move(act.lat), std::move(act.hash), std::move(act.ce)};
}

double hash_loss(const Matrix& hash_x, const Matrix& target_a, const Matrix& hash_y,
                 const Matrix& target_b) {
    if (!hash_x.same_shape(target_a) || !hash_y.same_shape(target_b))
        throw std::invalid_argument("hash_loss: shape mismatch");
    return frob_sq_diff(hash_x, target_a) + frob_sq_diff(hash_y, target_b);
}

ClassWeights uniform_class_weights(int class_count) {
    return ClassWeights(static_cast<std::size_t>(class_count), 1.0);
}

ClassWeights compute_class_weights(const LabelVector& labels, int class_count) {
    std::vector<std::size_t> counts(static_cast<std::size_t>(class_count), 0);
    for (const int l : labels) {
        if (l < 0 || l >= class_count)
            throw std::invalid_argument("compute_class_weights: label out of range");
        ++counts[static_cast<std::size_t>(l)];
    }
    ClassWeights w(static_cast<std::size_t>(class_count));
    for (std::size_t j = 0; j < w.size(); ++j) {
        if (counts[j] == 0)
            throw std::invalid_argument("compute_class_weights: class " + std::to_string(j) +
                                        " has no samples");
        w[j] = static_cast<double>(labels.size()) / static_cast<double>(counts[j]);
    }
    return w;
}

double weighted_ce_loss(const Matrix& ce_x, const Matrix& ce_y, const LabelVector& labels,
                        const ClassWeights& weights) {
    if (ce_x.rows() != labels.size() || ce_y.rows() != labels.size())
        throw std::invalid_argument("weighted_ce_loss: label count mismatch");
    double loss = 0.0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const auto l = static_cast<std::size_t>(labels[i]);
        if (l >= ce_x.cols() || l >= ce_y.cols())
            throw std::invalid_argument("weighted_ce_loss: label out of range");
        loss -= weights[l] * (std::log(std::max(ce_x(i, l), kLogFloor)) +
                              std::log(std::max(ce_y(i, l), kLogFloor)));
    }
    return loss;
}

TrainTrace train_pair(MlpHashFunction& net_x, MlpHashFunction& net_y, const Matrix& x,
                      const Matrix& y, const Matrix& code_a, const Matrix& code_b,
                      const LabelVector& labels, const TrainConfig& cfg,
                      const ExtraLossFn& extra) {
    const std::size_t n = labels.size();
    if (x.rows() != n || y.rows() != n || code_a.rows() != n || code_b.rows() != n)
        throw std::invalid_argument("train_pair: row count mismatch");
    if (cfg.epochs < 1 || cfg.batch_size < 1)
        throw std::invalid_argument("train_pair: epochs and batchSize must be >= 1");
    if (cfg.learning_rate < 0.0) throw std::invalid_argument("train_pair: negative learning rate");

    const int max_label = *std::max_element(labels.begin(), labels.end());
    if (max_label >= net_x.class_count() || max_label >= net_y.class_count())
        throw std::invalid_argument("train_pair: label exceeds classifier width");

    const ClassWeights weights = cfg.use_class_weights
                                     ? compute_class_weights(labels, net_x.class_count())
                                     : uniform_class_weights(net_x.class_count());

    Rng order_rng(derive_seed(cfg.seed, 1));
    Rng drop_rng(derive_seed(cfg.seed, 2));
    const std::size_t bs = static_cast<std::size_t>(cfg.batch_size);
    const std::size_t batches = (n + bs - 1) / bs;

    std::vector<int> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = static_cast<int>(i);

    TrainTrace trace;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        if (!cfg.use_imbalanced_sampler) order_rng.shuffle(perm);
        double epoch_loss = 0.0;
        for (std::size_t b = 0; b < batches; ++b) {
            std::vector<int> idx;
            if (cfg.use_imbalanced_sampler) {
                idx = imbalanced_sample_indices(labels, bs, order_rng);
            } else {
                const std::size_t lo = b * bs, hi = std::min(n, lo + bs);
                idx.assign(perm.begin() + lo, perm.begin() + hi);
            }
            std::vector<int> batch_labels(idx.size());
            for (std::size_t i = 0; i < idx.size(); ++i)
                batch_labels[i] = labels[static_cast<std::size_t>(idx[i])];
            const auto losses = train_batch(net_x, net_y, take_rows(x, idx), take_rows(y, idx),
                                            take_rows(code_a, idx), take_rows(code_b, idx),
                                            batch_labels, weights, cfg.learning_rate, drop_rng,
                                            extra);
            if (!std::isfinite(losses.total()))
                throw std::runtime_error("train_pair: non-finite loss at epoch " +
                                         std::to_string(epoch) + ", batch " + std::to_string(b) +
                                         " (training diverged; lower the learning rate)");
            epoch_loss += losses.total();
        }
        trace.epoch_loss.push_back(epoch_loss);
    }
    return trace;
}

MlpHashFunction expand_classifier(const MlpHashFunction& old, int new_class_count,
                                  std::uint64_t seed) {
    if (new_class_count <= old.class_count())
        throw std::invalid_argument("expand_classifier: class count must grow");
    MlpHashFunction net = old;
    const std::size_t h2 = old.ce_head.w.rows();
    const std::size_t old_c = static_cast<std::size_t>(old.class_count());
    const std::size_t new_c = static_cast<std::size_t>(new_class_count);
    const double bound = 1.0 / std::sqrt(static_cast<double>(h2));

    Rng rng(seed);
    net.ce_head.w = Matrix(h2, new_c);
    for (std::size_t i = 0; i < h2; ++i)
        for (std::size_t j = 0; j < old_c; ++j) net.ce_head.w(i, j) = old.ce_head.w(i, j);
    for (std::size_t j = old_c; j < new_c; ++j)
        for (std::size_t i = 0; i < h2; ++i) net.ce_head.w(i, j) = rng.uniform(-bound, bound);
    net.ce_head.b.resize(new_c);
    for (std::size_t j = old_c; j < new_c; ++j) net.ce_head.b[j] = rng.uniform(-bound, bound);
    return net;
}

std::vector<int> imbalanced_sample_indices(const LabelVector& labels, std::size_t batch_size,
                                           Rng& rng) {
    if (labels.empty()) throw std::invalid_argument("imbalanced_sample_indices: empty labels");
    const int max_label = *std::max_element(labels.begin(), labels.end());
    std::vector<std::size_t> counts(static_cast<std::size_t>(max_label) + 1, 0);
    for (const int l : labels) ++counts[static_cast<std::size_t>(l)];

    // cumulative per-sample weights 1/n_class, sampled by inversion
    std::vector<double> cum(labels.size());
    double total = 0.0;
    for (std::size_t i = 0; i < labels.size(); ++i)
        cum[i] = (total += 1.0 / static_cast<double>(counts[static_cast<std::size_t>(labels[i])]));

    std::vector<int> idx(batch_size);
    for (auto& out : idx) {
        const double u = rng.uniform01() * total;
        const auto it = std::upper_bound(cum.begin(), cum.end(), u);
        out = static_cast<int>(std::min<std::size_t>(it - cum.begin(), labels.size() - 1));
    }
    return idx;
}

std::vector<int> imbalanced_sample_indices(const LabelVector& labels, std::size_t batch_size,
                                           std::uint64_t seed) {
    Rng rng(seed);
    return imbalanced_sample_indices(labels, batch_size, rng);
}

BinaryCodeMatrix apply(const MlpHashFunction& net, const Matrix& x) {
    return BinaryCodeMatrix::from_signs(forward(net, x, false).hash_out);
}

namespace {

Matrix row_matrix(const std::vector<double>& v) {
    Matrix m(1, v.size());
    for (std::size_t j = 0; j < v.size(); ++j) m(0, j) = v[j];
    return m;
}

void save_layer(const std::string& stem, const LinearLayer& layer) {
    io::save_matrix(stem + "_w.txt", layer.w);
    io::save_matrix(stem + "_b.txt", row_matrix(layer.b));
}

LinearLayer load_layer(const std::string& stem) {
    LinearLayer layer;
    layer.w = io::load_matrix(stem + "_w.txt");
    const Matrix b = io::load_matrix(stem + "_b.txt");
    layer.b.assign(b.data(), b.data() + b.size());
    return layer;
}

}  // namespace

void save_mlp(const std::string& dir, const std::string& stem, const MlpHashFunction& net) {
    namespace fs = std::filesystem;
    const auto base = (fs::path(dir) / stem).string();
    save_layer(base + "_fc1", net.fc1);
    save_layer(base + "_fc2", net.fc2);
    save_layer(base + "_hash", net.hash_head);
    save_layer(base + "_ce", net.ce_head);
    char rate[40];
    std::snprintf(rate, sizeof rate, "%.17g", net.dropout_rate);
    io::save_keyvalue(base + "_manifest.txt",
                      {{"d", std::to_string(net.in_dim())},
                       {"h1", std::to_string(net.fc1.w.cols())},
                       {"h2", std::to_string(net.fc2.w.cols())},
                       {"q", std::to_string(net.code_bits())},
                       {"class_count", std::to_string(net.class_count())},
                       {"dropout_rate", rate}});
}

MlpHashFunction load_mlp(const std::string& dir, const std::string& stem) {
    namespace fs = std::filesystem;
    const auto base = (fs::path(dir) / stem).string();
    MlpHashFunction net;
    net.fc1 = load_layer(base + "_fc1");
    net.fc2 = load_layer(base + "_fc2");
    net.hash_head = load_layer(base + "_hash");
    net.ce_head = load_layer(base + "_ce");
    const auto meta = io::load_keyvalue(base + "_manifest.txt");
    if (auto it = meta.find("dropout_rate"); it != meta.end())
        net.dropout_rate = std::stod(it->second);
    return net;
}

}  // namespace icmh::mlpfn
