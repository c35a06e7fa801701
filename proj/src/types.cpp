#include "icmh/types.hpp"

#include <stdexcept>
#include <string>

#include "icmh/kernels.hpp"

namespace icmh {

SimilarityMatrix build_similarity(const LabelVector& labels) {
    if (labels.empty()) throw std::invalid_argument("build_similarity: empty labels");
    const std::size_t n = labels.size();
    SimilarityMatrix s{Matrix(n, n)};
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            s.values(i, j) = labels[i] == labels[j] ? 1.0 : 0.0;
    return s;
}

BinaryCodeMatrix::BinaryCodeMatrix(std::size_t rows, std::size_t bits)
    : rows_(rows), bits_(bits), words_((bits + 63) / 64), data_(rows * words_, 0) {}

BinaryCodeMatrix BinaryCodeMatrix::from_signs(const Matrix& m) {
    BinaryCodeMatrix out(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j)
            if (m(i, j) >= 0.0) out.data_[i * out.words_ + j / 64] |= 1ull << (j % 64);
    return out;
}

int BinaryCodeMatrix::sign(std::size_t i, std::size_t j) const {
    return (data_[i * words_ + j / 64] >> (j % 64)) & 1u ? 1 : -1;
}

void BinaryCodeMatrix::set(std::size_t i, std::size_t j, bool positive) {
    const std::uint64_t bit = 1ull << (j % 64);
    if (positive)
        data_[i * words_ + j / 64] |= bit;
    else
        data_[i * words_ + j / 64] &= ~bit;
}

std::uint32_t BinaryCodeMatrix::hamming(std::size_t i, const BinaryCodeMatrix& other, std::size_t j) const {
    if (bits_ != other.bits_) throw std::invalid_argument("hamming: code widths differ");
    return static_cast<std::uint32_t>(
        kernels::hamming_words(row_words(i), other.row_words(j), words_));
}

Matrix BinaryCodeMatrix::to_matrix() const {
    Matrix m(rows_, bits_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < bits_; ++j) m(i, j) = sign(i, j);
    return m;
}

void validate_dataset(const PairedDataset& d) {
    if (d.x.rows() != d.y.rows() || d.x.rows() != d.labels.size())
        throw std::invalid_argument("dataset: x, y and labels disagree on sample count");
    if (d.class_count < 1) throw std::invalid_argument("dataset: class_count must be >= 1");
    std::vector<bool> seen(static_cast<std::size_t>(d.class_count), false);
    for (int l : d.labels) {
        if (l < 0 || l >= d.class_count)
            throw std::invalid_argument("dataset: label " + std::to_string(l) + " out of range");
        seen[static_cast<std::size_t>(l)] = true;
    }
    for (int c = 0; c < d.class_count; ++c)
        if (!seen[static_cast<std::size_t>(c)])
            throw std::invalid_argument("dataset: class " + std::to_string(c) + " has no samples");
    if (!all_finite(d.x) || !all_finite(d.y))
        throw std::invalid_argument("dataset: non-finite feature value");
}

std::vector<std::vector<int>> rows_by_class(const LabelVector& labels, int class_count) {
    std::vector<std::vector<int>> out(static_cast<std::size_t>(class_count));
    for (std::size_t i = 0; i < labels.size(); ++i)
        out[static_cast<std::size_t>(labels[i])].push_back(static_cast<int>(i));
    return out;
}

}  // namespace icmh
