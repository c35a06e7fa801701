#pragma once

#include <cstdint>
#include <vector>

#include "icmh/matrix.hpp"

namespace icmh {

// One modality's features, one sample per row.
using FeatureMatrix = Matrix;
// Relaxed codes, every entry in [-1, 1].
using RelaxedCodeMatrix = Matrix;
// Per-sample class index, 0-based, single label.
using LabelVector = std::vector<int>;

// Pairwise label-equality indicator. Symmetric with unit diagonal by
// construction.
struct SimilarityMatrix {
    Matrix values;  // entries in {0, 1}

    std::size_t size() const { return values.rows(); }
    double operator()(std::size_t i, std::size_t j) const { return values(i, j); }
};

SimilarityMatrix build_similarity(const LabelVector& labels);

// {-1,+1} codes stored bit-packed (bit set <=> +1); padding bits beyond
// `bits` in the last word are kept zero so XOR/popcount distances need
// no masking.
class BinaryCodeMatrix {
public:
    BinaryCodeMatrix() = default;
    BinaryCodeMatrix(std::size_t rows, std::size_t bits);

    // sign convention: value >= 0 maps to +1
    static BinaryCodeMatrix from_signs(const Matrix& m);

    std::size_t rows() const { return rows_; }
    std::size_t bits() const { return bits_; }
    std::size_t words_per_row() const { return words_; }

    int sign(std::size_t i, std::size_t j) const;
    void set(std::size_t i, std::size_t j, bool positive);

    const std::uint64_t* row_words(std::size_t i) const { return data_.data() + i * words_; }

    std::uint32_t hamming(std::size_t i, const BinaryCodeMatrix& other, std::size_t j) const;

    Matrix to_matrix() const;  // entries exactly +-1

    bool operator==(const BinaryCodeMatrix&) const = default;

private:
    std::size_t rows_ = 0, bits_ = 0, words_ = 0;
    std::vector<std::uint64_t> data_;
};

// Paired two-modality training set with shared labels.
struct PairedDataset {
    FeatureMatrix x;
    FeatureMatrix y;
    LabelVector labels;
    int class_count = 0;

    std::size_t size() const { return labels.size(); }
};

// Throws std::invalid_argument when invariants are violated (row
// counts, label range, label-class density).
void validate_dataset(const PairedDataset& d);

// Per-class sample indices, in dataset order.
std::vector<std::vector<int>> rows_by_class(const LabelVector& labels, int class_count);

}  // namespace icmh
