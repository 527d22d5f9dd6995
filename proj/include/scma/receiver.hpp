#pragma once

#include <string>
#include <vector>

#include "scma/bridge.hpp"
#include "scma/detector.hpp"
#include "scma/ldpc.hpp"

namespace scma {

// Inner/outer iteration split: each of the `outer` rounds runs
// `inner_detector` MPA iterations followed by `inner_decoder` BP iterations.
// outer == 1 is the traditional non-feedback receiver.
struct IterationSchedule {
    std::string name;
    int inner_detector = 1;  // I_T
    int inner_decoder = 1;   // I_L
    int outer = 1;           // I_O

    bool traditional() const { return outer == 1; }
    void validate() const;  // throws std::invalid_argument
};

struct ReceiverOptions {
    bool persist_messages = false;  // keep MPA messages across outer rounds
    bool max_log = false;
    bool min_sum = false;
    bool early_exit = false;
};

struct ReceiverComponents {
    const Codebook* codebook = nullptr;
    const FactorGraph* graph = nullptr;
    const ParityCheckMatrix* pcm = nullptr;
    const std::vector<Interleaver>* interleavers = nullptr;  // one per user
};

// One frame on the air: one LDPC codeword per user, one channel draw and one
// received vector per SCMA symbol interval.
struct FrameObservation {
    std::vector<std::vector<cplx>> y;
    std::vector<ChannelRealization> channels;
};

struct OuterDiagnostics {
    std::vector<std::uint8_t> syndrome_ok;  // per user
    double mean_abs_llr = 0.0;              // over decoder totals
};

struct ReceiverDiagnostics {
    std::vector<OuterDiagnostics> outer;
    OpCounters detector;
    OpCounters decoder;
    OpCounters bridge;
};

struct ReceiverResult {
    std::vector<std::vector<std::uint8_t>> info_bits;   // per user
    std::vector<std::vector<std::uint8_t>> coded_bits;  // per user, full codeword
    ReceiverDiagnostics diag;
};

// bit = 0 iff LLR >= 0 (ties decide 0).
std::vector<std::uint8_t> hard_decide(std::span<const double> total_llr);

// The joint iterative receiver: per outer round the detector runs with
// symbol priors built from the decoder's previous intrinsic output (uniform
// first), detector intrinsic bit LLRs are deinterleaved into the decoder
// prior, and the decoder's intrinsic output is interleaved back. Detector
// messages reset between rounds unless persist_messages is set.
ReceiverResult run_receiver(const FrameObservation& frame, const IterationSchedule& sched,
                            const ReceiverComponents& comp, const ReceiverOptions& opt = {});

}  // namespace scma
