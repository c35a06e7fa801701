#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "icmh/codegen.hpp"
#include "icmh/linfn.hpp"
#include "icmh/mlpfn.hpp"
#include "icmh/types.hpp"

namespace icmh::protocol {

// P1 retrains from scratch every phase (upper bound), P2 freezes the
// phase-1 model (lower bound), P3 adapts incrementally with exemplars.
enum class Protocol { P1, P2, P3 };
// lr1..lr3 are the closed-form ridge variants; mlp is the deep path.
enum class Method { Lr1, Lr2, Lr3, Mlp };

std::string protocol_name(Protocol p);  // "P1" | "P2" | "P3"
std::string method_name(Method m);      // "lr1" | "lr2" | "lr3" | "mlp"
Protocol parse_protocol(const std::string& s);
Method parse_method(const std::string& s);

struct PhasePlan {
    std::vector<int> phase_sizes;              // sums to the class count
    std::vector<std::uint64_t> shuffle_seeds;  // one independent run per seed
};

struct RunSettings {
    std::size_t bits = 128;
    double lambda_h = 1.0;
    std::size_t code_iters = 500;
    double code_tol = 1e-6;
    double code_eta = 1e-2;
    int samples_per_class = 10;  // exemplars kept per old class
    linfn::CvConfig cv;          // seed field is overridden per phase
    mlpfn::TrainConfig mlp_train;
    std::size_t mlp_h1 = 64, mlp_h2 = 32;
    double mlp_dropout = 0.2;  // desk-scale nets underfit at the module's 0.5
};

struct PhaseResult {
    int phase = 0;  // 1-based
    Protocol protocol = Protocol::P1;
    Method method = Method::Lr1;
    double retrieval_x2y = 0, retrieval_y2x = 0, retrieval_avg = 0;  // MAP@50
    double hashing_x2y = 0, hashing_y2x = 0, hashing_avg = 0;        // MAP@all
    double seconds = 0;
};

struct ShuffleRun {
    std::uint64_t shuffle_seed = 0;
    std::vector<int> class_order;
    std::vector<PhaseResult> phases;
};

struct ProtocolResult {
    std::vector<ShuffleRun> runs;
    std::vector<PhaseResult> averaged;  // element-wise mean over runs
};

// Retained old-category samples with their frozen relaxed codes.
// Previously chosen exemplars stay put across refreshes; only
// newly-seen classes add rows.
struct ExemplarStore {
    std::vector<int> indices;  // training-set rows, grouped per class
    Matrix a_exemplar, b_exemplar;
    int samples_per_class = 0;
};

// Uniform without-replacement pick of samples_per_class rows per class
// (a whole class if it is smaller). Codes are filled in by the caller.
ExemplarStore select_exemplars(const PairedDataset& data, const std::vector<int>& classes,
                               int samples_per_class, std::uint64_t seed);

struct CodeStore;

// Grows `store` with exemplars for `new_classes`, copying their relaxed
// codes out of `codes`. Rows already present are left bit-identical.
void append_exemplars(ExemplarStore& store, const PairedDataset& train,
                      const std::vector<int>& new_classes, const CodeStore& codes,
                      std::size_t bits, int samples_per_class, std::uint64_t seed);

std::vector<int> make_class_order(int class_count, std::uint64_t seed);

// Relaxed codes recorded at the phase each training row was learned.
struct CodeStore {
    std::vector<char> present;
    Matrix a, b;

    CodeStore() = default;
    CodeStore(std::size_t n, std::size_t q) : present(n, 0), a(n, q), b(n, q) {}
    void put(std::size_t row, const double* arow, const double* brow);
};

// The current phase's trained hash functions (one pair live per method).
struct MethodState {
    Method method = Method::Lr1;
    linfn::LinearHashFunction fx, fy;
    mlpfn::MlpHashFunction mx, my;

    BinaryCodeMatrix hash_x(const Matrix& feats) const;
    BinaryCodeMatrix hash_y(const Matrix& feats) const;
};

// Hashing-mode gallery codes for the given training rows: signs of the
// stored codes, or — when `regenerate` is set, as P2's later phases
// require — everything pushed through the current (frozen) functions.
// Throws if a row has no stored code and regeneration is off.
std::pair<BinaryCodeMatrix, BinaryCodeMatrix> gallery_codes(const CodeStore& store,
                                                            const std::vector<int>& rows,
                                                            bool regenerate,
                                                            const MethodState& state,
                                                            const PairedDataset& train);

// Runs every shuffle of the plan under one protocol/method and averages
// the per-phase metrics across shuffles.
ProtocolResult run_protocol(const PairedDataset& train, const PairedDataset& test,
                            const PhasePlan& plan, Protocol protocol, Method method,
                            const RunSettings& settings);

}  // namespace icmh::protocol
