#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "scma/codebook.hpp"
#include "scma/ops.hpp"

namespace scma {

// Seeded uniform random permutation; interleave: out[i] = in[perm[i]].
struct Interleaver {
    std::vector<int> perm;
    int size() const { return static_cast<int>(perm.size()); }
};

Interleaver make_interleaver(int length, std::uint64_t seed);

std::vector<double> interleave(std::span<const double> x, const Interleaver& pi);
std::vector<double> deinterleave(std::span<const double> x, const Interleaver& pi);
std::vector<std::uint8_t> interleave(std::span<const std::uint8_t> x, const Interleaver& pi);
std::vector<std::uint8_t> deinterleave(std::span<const std::uint8_t> x, const Interleaver& pi);

// Independent bit priors -> symbol prior LLRs, re-referenced so the
// all-zeros-label codeword sits at exactly 0:
//   L(x) = -sum_{i : label bit i of x is 1} Lb_i.
std::vector<double> bits_to_symbol_llr(std::span<const double> bit_priors, const Codebook& cb,
                                       int user, OpCounters* counters = nullptr);

struct BitLlrSplit {
    std::vector<double> total;
    std::vector<double> intrinsic;  // total minus the fed-in bit priors
    std::vector<double> prior;      // the fed-in bit priors
};

// Detector symbol totals -> per-bit LLRs through the two label subsets,
//   Lb_i = lse_{x: bit_i = 0}(total) - lse_{x: bit_i = 1}(total),
// then split against the bit priors that produced the detector's symbol
// prior, so only the intrinsic part travels onward.
BitLlrSplit symbol_to_bit_llr(std::span<const double> symbol_total,
                              std::span<const double> fed_bit_priors, const Codebook& cb,
                              int user, OpCounters* counters = nullptr, bool max_log = false);

}  // namespace scma
