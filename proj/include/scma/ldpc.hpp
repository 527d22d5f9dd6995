#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "scma/ops.hpp"

namespace scma {

// Messages and priors are clipped to this magnitude; it keeps tanh-domain
// check updates inside double range.
inline constexpr double kLlrClip = 38.0;

struct ParityCheckMatrix {
    int n_bits = 0;    // columns
    int n_checks = 0;  // rows
    std::vector<std::vector<int>> check_neighbors;  // per check: variables, ascending
    std::vector<std::vector<int>> var_neighbors;    // per variable: checks, ascending
    bool regular = false;
    int var_degree = 0;  // P for regular codes
    int check_degree = 0;

    int num_edges() const;
    void validate() const;  // throws std::runtime_error on inconsistency
};

// alist exchange format (1-based indices, padded or unpadded entry rows).
ParityCheckMatrix load_alist(std::istream& in);
ParityCheckMatrix load_alist(const std::string& text);
ParityCheckMatrix load_alist_file(const std::string& path);
void save_alist(const ParityCheckMatrix& pcm, std::ostream& out);

std::uint64_t pcm_structure_hash(const ParityCheckMatrix& pcm);

bool syndrome_ok(const ParityCheckMatrix& pcm, std::span<const std::uint8_t> bits);

// Systematic encoder: codeword = [info | parity]. Built by GF(2) elimination;
// requires the trailing n_checks x n_checks block of H to be invertible
// (bundled codes are stored column-permuted so it is). The dense parity
// generator can be cached to a file to skip the elimination on reload.
class LdpcEncoder {
public:
    static LdpcEncoder build(const ParityCheckMatrix& pcm);
    static LdpcEncoder load_cache(std::istream& in, const ParityCheckMatrix& pcm);
    static LdpcEncoder load_or_build(const std::string& alist_path, const ParityCheckMatrix& pcm);
    void save_cache(std::ostream& out) const;

    int info_bits() const { return n_info_; }
    int code_bits() const { return n_info_ + n_parity_; }
    std::vector<std::uint8_t> encode(std::span<const std::uint8_t> info) const;

private:
    int n_info_ = 0;
    int n_parity_ = 0;
    std::uint64_t structure_hash_ = 0;
    // Row r: packed mask over info bits; parity bit r is the GF(2) dot
    // product of the mask with the info vector.
    std::vector<std::vector<std::uint64_t>> rows_;
};

// Bit-level LLRs, convention L = log(p(b=0)/p(b=1)), natural log, with the
// decoder-output decomposition total = intrinsic + prior.
struct BitLlr {
    std::vector<double> total;
    std::vector<double> intrinsic;  // sum of check->variable messages
    std::vector<double> prior;      // the clipped input priors
};

struct DecodeOptions {
    bool min_sum = false;     // offset-free min-sum instead of the tanh rule
    bool early_exit = false;  // stop once the syndrome is satisfied
    OpCounters* counters = nullptr;
};

struct DecodeResult {
    BitLlr llr;
    std::vector<std::uint8_t> hard;  // bit = 1 iff total < 0
    bool syndrome_satisfied = false;
    int iterations_run = 0;
};

// Flooding belief propagation for exactly `iterations` rounds (fewer only
// with early_exit). Priors are clipped to +-kLlrClip on entry; the clipped
// values are what the prior part reports.
DecodeResult decode_bp(const ParityCheckMatrix& pcm, std::span<const double> prior,
                       int iterations, const DecodeOptions& opt = {});

}  // namespace scma
