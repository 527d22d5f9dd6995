#include "scma/receiver.hpp"

#include <cmath>
#include <stdexcept>

namespace scma {

void IterationSchedule::validate() const {
    if (inner_detector < 1 || inner_decoder < 1 || outer < 1)
        throw std::invalid_argument("schedule: all iteration counts must be >= 1");
}

std::vector<std::uint8_t> hard_decide(std::span<const double> total_llr) {
    std::vector<std::uint8_t> bits(total_llr.size());
    for (std::size_t i = 0; i < total_llr.size(); ++i) bits[i] = total_llr[i] < 0.0 ? 1 : 0;
    return bits;
}

ReceiverResult run_receiver(const FrameObservation& frame, const IterationSchedule& sched,
                            const ReceiverComponents& comp, const ReceiverOptions& opt) {
    sched.validate();
    if (comp.codebook == nullptr || comp.graph == nullptr || comp.pcm == nullptr ||
        comp.interleavers == nullptr)
        throw std::invalid_argument("receiver: missing components");
    const Codebook& cb = *comp.codebook;
    const FactorGraph& fg = *comp.graph;
    const ParityCheckMatrix& pcm = *comp.pcm;
    const auto& interleavers = *comp.interleavers;

    const int J = cb.num_users;
    const int B = cb.bits_per_symbol();
    const int m_bits = pcm.n_bits;
    const int n_info = pcm.n_bits - pcm.n_checks;
    if (m_bits % B != 0)
        throw std::invalid_argument("receiver: code length not divisible by bits per symbol");
    const int slots = m_bits / B;
    if (static_cast<int>(frame.y.size()) != slots ||
        static_cast<int>(frame.channels.size()) != slots)
        throw std::invalid_argument("receiver: frame does not cover a whole codeword per user");
    if (static_cast<int>(interleavers.size()) != J)
        throw std::invalid_argument("receiver: one interleaver per user required");
    for (const auto& pi : interleavers)
        if (pi.size() != m_bits)
            throw std::invalid_argument("receiver: interleaver length mismatch");

    ReceiverResult res;
    res.diag.outer.reserve(sched.outer);

    // decoder intrinsic output, interleaved into detector bit order
    std::vector<std::vector<double>> fed_priors(J, std::vector<double>(m_bits, 0.0));
    std::vector<DetectorState> states(opt.persist_messages ? slots : 0);
    std::vector<DecodeResult> decoded(J);

    std::vector<std::vector<double>> slot_prior(J, std::vector<double>(cb.num_symbols, 0.0));
    std::vector<std::vector<double>> det_intrinsic_bits(J, std::vector<double>(m_bits, 0.0));

    for (int outer = 0; outer < sched.outer; ++outer) {
        // detection stage
        for (int s = 0; s < slots; ++s) {
            for (int j = 0; j < J; ++j) {
                const std::span<const double> seg(fed_priors[j].data() + s * B, B);
                slot_prior[j] = bits_to_symbol_llr(seg, cb, j, &res.diag.bridge);
            }
            DetectorOptions det_opt;
            det_opt.max_log = opt.max_log;
            det_opt.counters = &res.diag.detector;
            det_opt.state = opt.persist_messages ? &states[s] : nullptr;
            const SymbolLlr det = detect_log(cb, fg, frame.y[s], frame.channels[s], &slot_prior,
                                             sched.inner_detector, det_opt);
            for (int j = 0; j < J; ++j) {
                const std::span<const double> seg(fed_priors[j].data() + s * B, B);
                const BitLlrSplit split =
                    symbol_to_bit_llr(det.total[j], seg, cb, j, &res.diag.bridge, opt.max_log);
                for (int i = 0; i < B; ++i) det_intrinsic_bits[j][s * B + i] = split.intrinsic[i];
            }
        }

        // decoding stage; only intrinsic information crosses in either direction
        OuterDiagnostics diag;
        diag.syndrome_ok.resize(J);
        double abs_sum = 0.0;
        for (int j = 0; j < J; ++j) {
            const std::vector<double> dec_prior =
                deinterleave(std::span<const double>(det_intrinsic_bits[j]), interleavers[j]);
            DecodeOptions dec_opt;
            dec_opt.min_sum = opt.min_sum;
            dec_opt.early_exit = opt.early_exit;
            dec_opt.counters = &res.diag.decoder;
            decoded[j] = decode_bp(pcm, dec_prior, sched.inner_decoder, dec_opt);
            diag.syndrome_ok[j] = decoded[j].syndrome_satisfied ? 1 : 0;
            for (double v : decoded[j].llr.total) abs_sum += std::abs(v);
            if (outer + 1 < sched.outer)
                fed_priors[j] =
                    interleave(std::span<const double>(decoded[j].llr.intrinsic), interleavers[j]);
        }
        diag.mean_abs_llr = abs_sum / (static_cast<double>(J) * m_bits);
        res.diag.outer.push_back(std::move(diag));
    }

    res.info_bits.resize(J);
    res.coded_bits.resize(J);
    for (int j = 0; j < J; ++j) {
        res.coded_bits[j] = hard_decide(decoded[j].llr.total);
        res.info_bits[j].assign(res.coded_bits[j].begin(), res.coded_bits[j].begin() + n_info);
    }
    return res;
}

}  // namespace scma
