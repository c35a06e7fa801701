#include "icmh/eval.hpp"

#include <algorithm>
#include <stdexcept>

namespace icmh::eval {

std::uint32_t hamming(const BinaryCodeMatrix& u, std::size_t i, const BinaryCodeMatrix& v,
                      std::size_t j) {
    if (u.bits() != v.bits()) throw std::invalid_argument("hamming: code width mismatch");
    return u.hamming(i, v, j);
}

std::vector<int> rank_gallery(const BinaryCodeMatrix& queries, std::size_t qi,
                              const BinaryCodeMatrix& gallery, int exclude) {
    if (queries.bits() != gallery.bits())
        throw std::invalid_argument("rank_gallery: code width mismatch");
    const std::size_t n = gallery.rows();
    const std::size_t buckets = queries.bits() + 1;

    std::vector<std::uint32_t> dist(n);
    std::vector<std::size_t> count(buckets + 1, 0);
    for (std::size_t g = 0; g < n; ++g) {
        dist[g] = queries.hamming(qi, gallery, g);
        if (static_cast<int>(g) != exclude) ++count[dist[g] + 1];
    }
    for (std::size_t d = 1; d <= buckets; ++d) count[d] += count[d - 1];

    std::vector<int> ranked(exclude >= 0 && exclude < static_cast<int>(n) ? n - 1 : n);
    for (std::size_t g = 0; g < n; ++g) {
        if (static_cast<int>(g) == exclude) continue;
        ranked[count[dist[g]]++] = static_cast<int>(g);
    }
    return ranked;
}

double average_precision(const std::vector<int>& ranked, int query_label,
                         const LabelVector& gallery_labels, std::size_t k) {
    const std::size_t depth = std::min<std::size_t>(k, ranked.size());
    std::size_t hits = 0;
    double precision_sum = 0.0;
    for (std::size_t r = 0; r < depth; ++r) {
        if (gallery_labels[static_cast<std::size_t>(ranked[r])] == query_label) {
            ++hits;
            precision_sum += static_cast<double>(hits) / static_cast<double>(r + 1);
        }
    }
    return hits == 0 ? 0.0 : precision_sum / static_cast<double>(hits);
}

double mean_ap(const BinaryCodeMatrix& query_codes, const LabelVector& query_labels,
               const BinaryCodeMatrix& gallery_codes, const LabelVector& gallery_labels,
               std::size_t k, bool exclude_self) {
    if (query_codes.bits() != gallery_codes.bits())
        throw std::invalid_argument("mean_ap: code width mismatch");
    if (query_codes.rows() != query_labels.size() || gallery_codes.rows() != gallery_labels.size())
        throw std::invalid_argument("mean_ap: label count mismatch");
    if (query_codes.rows() == 0) throw std::invalid_argument("mean_ap: empty query set");

    double total = 0.0;
    for (std::size_t i = 0; i < query_codes.rows(); ++i) {
        const int excl = exclude_self ? static_cast<int>(i) : -1;
        const auto ranked = rank_gallery(query_codes, i, gallery_codes, excl);
        total += average_precision(ranked, query_labels[i], gallery_labels, k);
    }
    return total / static_cast<double>(query_codes.rows());
}

double map_score(const BinaryCodeMatrix& a_codes, const LabelVector& a_labels,
                 const BinaryCodeMatrix& b_codes, const LabelVector& b_labels, std::size_t k,
                 bool exclude_self) {
    return 0.5 * (mean_ap(a_codes, a_labels, b_codes, b_labels, k, exclude_self) +
                  mean_ap(b_codes, b_labels, a_codes, a_labels, k, exclude_self));
}

}  // namespace icmh::eval
