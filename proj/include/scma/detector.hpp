#pragma once

#include <span>
#include <vector>

#include "scma/channel.hpp"
#include "scma/ops.hpp"

namespace scma {

// Symbol-level LLRs relative to each user's reference codeword. The
// reference entry of every part is 0 and total = intrinsic + prior holds by
// construction.
struct SymbolLlr {
    std::vector<std::vector<double>> total;      // [user][symbol]
    std::vector<std::vector<double>> intrinsic;  // sum of resource->user messages
    std::vector<std::vector<double>> prior;      // the fed-in symbol priors
};

// Resource->user message tables, edge-major (resources in order, neighbors
// ascending). Passing one in continues detection from that state; it is
// updated in place to the final messages.
struct DetectorState {
    std::vector<std::vector<double>> resource_to_user;
};

struct DetectorOptions {
    bool max_log = false;             // drop the Jacobian correction term
    OpCounters* counters = nullptr;   // incremented, never reset
    DetectorState* state = nullptr;   // optional in/out message state
};

// Numerically stable log(sum(exp(values))) built from pairwise reductions of
// log(e^a + e^b) = max(a,b) + log(1 + e^-|a-b|). Throws on empty input.
double jacobian_logsumexp(std::span<const double> values, OpCounters* counters = nullptr,
                          bool max_log = false);

// MPA multiuser detection in the probability domain: T rounds of user-node
// then resource-node updates with Gaussian kernels exp(-||.||^2 / N0).
// Returns the normalized belief V_j(x) per user. Messages are rescaled per
// edge to keep products representable; scale cancels in the outputs.
// prior_pmf entries must each sum to 1; null means uniform. T = 0 returns
// the priors (pass-through).
std::vector<std::vector<double>> detect_prob(const Codebook& cb, const FactorGraph& fg,
                                             std::span<const cplx> y,
                                             const ChannelRealization& ch,
                                             const std::vector<std::vector<double>>* prior_pmf,
                                             int iterations, const DetectorOptions& opt = {});

// Log-domain MPA with symbol-level prior LLRs (reference entries must be 0).
// Output: total = prior + sum of final resource->user messages, with the
// intrinsic sum stored separately.
SymbolLlr detect_log(const Codebook& cb, const FactorGraph& fg, std::span<const cplx> y,
                     const ChannelRealization& ch,
                     const std::vector<std::vector<double>>* prior_llr, int iterations,
                     const DetectorOptions& opt = {});

struct OracleResult {
    std::vector<std::vector<double>> marginals;  // [user][symbol], normalized
    std::vector<int> joint_map;                  // joint MAP configuration
    std::vector<int> marginal_map;               // per-user argmax of marginals
};

// Exhaustive enumeration of all M^J symbol combinations (guarded at 2^20);
// the brute-force reference the iterative detector is checked against.
OracleResult exact_map_oracle(const Codebook& cb, const FactorGraph& fg,
                              std::span<const cplx> y, const ChannelRealization& ch,
                              const std::vector<std::vector<double>>* prior_pmf = nullptr);

}  // namespace scma
