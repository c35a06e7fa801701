#pragma once

#include <map>
#include <string>

#include "icmh/types.hpp"

namespace icmh::io {

// Matrix text format: first line "<rows> <cols>", then `rows` lines of
// `cols` whitespace-separated reals. Loads reject NaN/Inf and any
// header/body shape disagreement.
Matrix load_matrix(const std::string& path);
void save_matrix(const std::string& path, const Matrix& m);

// Label file: one 0-based integer per line.
LabelVector load_labels(const std::string& path);
void save_labels(const std::string& path, const LabelVector& labels);

// key=value lines; '#' starts a comment line. Keys are emitted sorted,
// so saves are deterministic.
std::map<std::string, std::string> load_keyvalue(const std::string& path);
void save_keyvalue(const std::string& path, const std::map<std::string, std::string>& kv);

// Dataset manifest keys: x_path, y_path, labels_path, class_count.
// Relative paths resolve against the manifest's directory.
PairedDataset load_dataset(const std::string& manifest_path);
void save_dataset(const std::string& dir, const PairedDataset& d);

}  // namespace icmh::io
