#pragma once

#include <cstddef>
#include <limits>
#include <vector>

#include "icmh/types.hpp"

namespace icmh::eval {

// Cutoff value meaning "the whole gallery" (MAP@all).
inline constexpr std::size_t kAll = std::numeric_limits<std::size_t>::max();

// Hamming distance between row `i` of `u` and row `j` of `v`.
// Throws on width mismatch.
std::uint32_t hamming(const BinaryCodeMatrix& u, std::size_t i, const BinaryCodeMatrix& v,
                      std::size_t j);

// Gallery indices sorted by ascending Hamming distance from query row
// `qi`; ties broken by ascending gallery index (counting sort over the
// q+1 possible distances, so the whole ranking is O(gallery + q)).
// `exclude` drops one gallery index (for self-retrieval exclusion);
// pass -1 to keep everything.
std::vector<int> rank_gallery(const BinaryCodeMatrix& queries, std::size_t qi,
                              const BinaryCodeMatrix& gallery, int exclude = -1);

// AP = (1/R_k) * sum over relevant ranks r <= k of precision@r, where
// relevance is label equality and R_k counts relevant items inside the
// top k. Returns 0 when no relevant item appears in the top k.
double average_precision(const std::vector<int>& ranked, int query_label,
                         const LabelVector& gallery_labels, std::size_t k);

// Mean AP over all queries for one retrieval direction. When
// `exclude_self` is set, gallery row i is dropped for query i (only
// meaningful when the two sets coincide).
double mean_ap(const BinaryCodeMatrix& query_codes, const LabelVector& query_labels,
               const BinaryCodeMatrix& gallery_codes, const LabelVector& gallery_labels,
               std::size_t k, bool exclude_self = false);

// Two-direction score: mean of mean_ap(a->b) and mean_ap(b->a).
double map_score(const BinaryCodeMatrix& a_codes, const LabelVector& a_labels,
                 const BinaryCodeMatrix& b_codes, const LabelVector& b_labels, std::size_t k,
                 bool exclude_self = false);

}  // namespace icmh::eval
