#include "icmh/synth.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "icmh/rng.hpp"

namespace icmh {

PairedDataset generate_synthetic(int class_count, int per_class, int dx, int dy,
                                 double spread, std::uint64_t seed) {
    if (class_count < 1 || per_class < 1) throw std::invalid_argument("generate_synthetic: counts must be >= 1");
    if (dx < 2 || dy < 2) throw std::invalid_argument("generate_synthetic: dx and dy must be >= 2");
    if (!(spread > 0.0)) throw std::invalid_argument("generate_synthetic: spread must be positive");

    const std::size_t n = static_cast<std::size_t>(class_count) * static_cast<std::size_t>(per_class);
    PairedDataset d;
    d.x = Matrix(n, static_cast<std::size_t>(dx));
    d.y = Matrix(n, static_cast<std::size_t>(dy));
    d.labels.resize(n);
    d.class_count = class_count;

    Rng rng(seed);
    std::size_t row = 0;
    for (int c = 0; c < class_count; ++c) {
        std::vector<double> cx(static_cast<std::size_t>(dx)), cy(static_cast<std::size_t>(dy));
        for (auto& v : cx) v = rng.normal();
        for (auto& v : cy) v = rng.normal();
        for (int s = 0; s < per_class; ++s, ++row) {
            d.labels[row] = c;
            for (int j = 0; j < dx; ++j)
                d.x(row, static_cast<std::size_t>(j)) = cx[static_cast<std::size_t>(j)] + spread * rng.normal();
            for (int j = 0; j < dy; ++j)
                d.y(row, static_cast<std::size_t>(j)) = cy[static_cast<std::size_t>(j)] + spread * rng.normal();
        }
    }
    return d;
}

TrainTestSplit split_train_test(const PairedDataset& d, double train_fraction, std::uint64_t seed) {
    validate_dataset(d);
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw std::invalid_argument("split_train_test: fraction must be in (0,1)");

    std::vector<int> train_idx, test_idx;
    const auto by_class = rows_by_class(d.labels, d.class_count);
    for (int c = 0; c < d.class_count; ++c) {
        auto rows = by_class[static_cast<std::size_t>(c)];
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(c)));
        rng.shuffle(rows);
        const std::size_t n_train =
            static_cast<std::size_t>(std::lround(train_fraction * static_cast<double>(rows.size())));
        const std::size_t nt = std::min(std::max<std::size_t>(n_train, 1), rows.size() - 1);
        // membership is random, order within each side follows the source
        std::sort(rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(nt));
        std::sort(rows.begin() + static_cast<std::ptrdiff_t>(nt), rows.end());
        for (std::size_t i = 0; i < rows.size(); ++i)
            (i < nt ? train_idx : test_idx).push_back(rows[i]);
    }

    const auto subset = [&](const std::vector<int>& idx) {
        PairedDataset out;
        out.x = take_rows(d.x, idx);
        out.y = take_rows(d.y, idx);
        out.labels.reserve(idx.size());
        for (int i : idx) out.labels.push_back(d.labels[static_cast<std::size_t>(i)]);
        out.class_count = d.class_count;
        return out;
    };
    return {subset(train_idx), subset(test_idx)};
}

void standardize_features(PairedDataset& train, PairedDataset& test) {
    const auto apply = [](Matrix& tr, Matrix& te) {
        const std::size_t n = tr.rows(), d = tr.cols();
        for (std::size_t j = 0; j < d; ++j) {
            double mean = 0.0;
            for (std::size_t i = 0; i < n; ++i) mean += tr(i, j);
            mean /= static_cast<double>(n);
            double var = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double c = tr(i, j) - mean;
                var += c * c;
            }
            var /= static_cast<double>(n);
            const double sd = var > 0.0 ? std::sqrt(var) : 1.0;
            for (std::size_t i = 0; i < n; ++i) tr(i, j) = (tr(i, j) - mean) / sd;
            for (std::size_t i = 0; i < te.rows(); ++i) te(i, j) = (te(i, j) - mean) / sd;
        }
    };
    apply(train.x, test.x);
    apply(train.y, test.y);
}

}  // namespace icmh
