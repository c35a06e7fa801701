#include "icmh/io.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace icmh::io {
namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw std::runtime_error(path + ": " + what);
}

std::ifstream open_in(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(path, "cannot open for reading");
    return in;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) fail(path, "cannot open for writing");
    return out;
}

double parse_real(const std::string& tok, const std::string& path) {
    std::size_t used = 0;
    double v;
    try {
        v = std::stod(tok, &used);
    } catch (const std::exception&) {
        fail(path, "unparseable token '" + tok + "'");
    }
    if (used != tok.size()) fail(path, "unparseable token '" + tok + "'");
    if (!std::isfinite(v)) fail(path, "non-finite value '" + tok + "'");
    return v;
}

}  // namespace

Matrix load_matrix(const std::string& path) {
    std::ifstream in = open_in(path);
    std::string line;
    if (!std::getline(in, line)) fail(path, "missing header line");
    long long rows = 0, cols = 0;
    {
        std::istringstream hs(line);
        std::string extra;
        if (!(hs >> rows >> cols) || (hs >> extra))
            fail(path, "header must be '<rows> <cols>'");
    }
    if (rows < 1 || cols < 1) fail(path, "header dimensions must be >= 1");
    Matrix m(static_cast<std::size_t>(rows), static_cast<std::size_t>(cols));
    for (long long i = 0; i < rows; ++i) {
        if (!std::getline(in, line))
            fail(path, "expected " + std::to_string(rows) + " rows, file ends at row " + std::to_string(i));
        std::istringstream ls(line);
        std::string tok;
        long long j = 0;
        while (ls >> tok) {
            if (j >= cols)
                fail(path, "row " + std::to_string(i + 1) + " has more than " + std::to_string(cols) + " tokens");
            m(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) = parse_real(tok, path);
            ++j;
        }
        if (j != cols)
            fail(path, "row " + std::to_string(i + 1) + " has " + std::to_string(j) +
                           (j == 1 ? " token" : " tokens") + ", expected " + std::to_string(cols));
    }
    return m;
}

void save_matrix(const std::string& path, const Matrix& m) {
    if (m.rows() < 1 || m.cols() < 1) fail(path, "refusing to save an empty matrix");
    std::ofstream out = open_out(path);
    out << m.rows() << ' ' << m.cols() << '\n';
    char buf[40];
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) {
            // %.17g round-trips doubles exactly
            std::snprintf(buf, sizeof buf, "%.17g", m(i, j));
            if (j) out << ' ';
            out << buf;
        }
        out << '\n';
    }
    if (!out) fail(path, "write failed");
}

LabelVector load_labels(const std::string& path) {
    std::ifstream in = open_in(path);
    LabelVector labels;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        long long v;
        std::string extra;
        if (!(ls >> v) || (ls >> extra)) fail(path, "expected one integer per line, got '" + line + "'");
        if (v < 0) fail(path, "negative label " + std::to_string(v));
        labels.push_back(static_cast<int>(v));
    }
    if (labels.empty()) fail(path, "no labels");
    return labels;
}

void save_labels(const std::string& path, const LabelVector& labels) {
    std::ofstream out = open_out(path);
    for (int l : labels) out << l << '\n';
    if (!out) fail(path, "write failed");
}

std::map<std::string, std::string> load_keyvalue(const std::string& path) {
    std::ifstream in = open_in(path);
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) fail(path, "expected key=value, got '" + line + "'");
        const auto trim = [](std::string s) {
            const auto a = s.find_first_not_of(" \t\r");
            if (a == std::string::npos) return std::string();
            return s.substr(a, s.find_last_not_of(" \t\r") - a + 1);
        };
        kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return kv;
}

void save_keyvalue(const std::string& path, const std::map<std::string, std::string>& kv) {
    std::ofstream out = open_out(path);
    for (const auto& [k, v] : kv) out << k << '=' << v << '\n';
    if (!out) fail(path, "write failed");
}

PairedDataset load_dataset(const std::string& manifest_path) {
    const auto kv = load_keyvalue(manifest_path);
    const auto need = [&](const char* key) -> std::string {
        auto it = kv.find(key);
        if (it == kv.end()) fail(manifest_path, std::string("missing key '") + key + "'");
        return it->second;
    };
    const auto base = std::filesystem::path(manifest_path).parent_path();
    const auto resolve = [&](const std::string& p) {
        std::filesystem::path fp(p);
        return fp.is_absolute() ? fp.string() : (base / fp).string();
    };
    PairedDataset d;
    d.x = load_matrix(resolve(need("x_path")));
    d.y = load_matrix(resolve(need("y_path")));
    d.labels = load_labels(resolve(need("labels_path")));
    d.class_count = std::stoi(need("class_count"));
    validate_dataset(d);
    return d;
}

void save_dataset(const std::string& dir, const PairedDataset& d) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) fail(dir, "output directory does not exist");
    save_matrix((fs::path(dir) / "x.txt").string(), d.x);
    save_matrix((fs::path(dir) / "y.txt").string(), d.y);
    save_labels((fs::path(dir) / "labels.txt").string(), d.labels);
    save_keyvalue((fs::path(dir) / "manifest.txt").string(),
                  {{"x_path", "x.txt"},
                   {"y_path", "y.txt"},
                   {"labels_path", "labels.txt"},
                   {"class_count", std::to_string(d.class_count)}});
}

}  // namespace icmh::io
