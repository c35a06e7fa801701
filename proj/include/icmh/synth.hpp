#pragma once

#include <cstdint>

#include "icmh/types.hpp"

namespace icmh {

// Gaussian-cluster paired dataset: one random center per class per
// modality, samples are center + isotropic noise with the given
// standard deviation. Row i shares its class across both modalities.
// Deterministic under `seed`.
PairedDataset generate_synthetic(int class_count, int per_class, int dx, int dy,
                                 double spread, std::uint64_t seed);

// 70/30 per-class split, order-preserving within each side.
struct TrainTestSplit {
    PairedDataset train;
    PairedDataset test;
};
TrainTestSplit split_train_test(const PairedDataset& d, double train_fraction, std::uint64_t seed);

// Opt-in preprocessing: per-dimension zero mean / unit variance fitted
// on train, applied to both sides.
void standardize_features(PairedDataset& train, PairedDataset& test);

}  // namespace icmh
