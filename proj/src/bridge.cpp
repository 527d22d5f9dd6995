#include "scma/bridge.hpp"

#include <cassert>
#include <stdexcept>

#include "scma/detector.hpp"
#include "scma/rng.hpp"

namespace scma {

Interleaver make_interleaver(int length, std::uint64_t seed) {
    if (length < 1) throw std::invalid_argument("interleaver: length must be positive");
    Interleaver pi;
    pi.perm.resize(length);
    for (int i = 0; i < length; ++i) pi.perm[i] = i;
    Rng rng(seed);
    for (int i = length - 1; i > 0; --i) {
        const int r = static_cast<int>(rng.below(static_cast<std::uint64_t>(i) + 1));
        std::swap(pi.perm[i], pi.perm[r]);
    }
    return pi;
}

namespace {

template <typename T>
std::vector<T> apply_perm(std::span<const T> x, const Interleaver& pi) {
    if (static_cast<int>(x.size()) != pi.size())
        throw std::invalid_argument("interleaver: length mismatch");
    std::vector<T> out(x.size());
    for (int i = 0; i < pi.size(); ++i) out[i] = x[pi.perm[i]];
    return out;
}

template <typename T>
std::vector<T> apply_perm_inverse(std::span<const T> x, const Interleaver& pi) {
    if (static_cast<int>(x.size()) != pi.size())
        throw std::invalid_argument("interleaver: length mismatch");
    std::vector<T> out(x.size());
    for (int i = 0; i < pi.size(); ++i) out[pi.perm[i]] = x[i];
    return out;
}

}  // namespace

std::vector<double> interleave(std::span<const double> x, const Interleaver& pi) {
    return apply_perm(x, pi);
}
std::vector<double> deinterleave(std::span<const double> x, const Interleaver& pi) {
    return apply_perm_inverse(x, pi);
}
std::vector<std::uint8_t> interleave(std::span<const std::uint8_t> x, const Interleaver& pi) {
    return apply_perm(x, pi);
}
std::vector<std::uint8_t> deinterleave(std::span<const std::uint8_t> x, const Interleaver& pi) {
    return apply_perm_inverse(x, pi);
}

std::vector<double> bits_to_symbol_llr(std::span<const double> bit_priors, const Codebook& cb,
                                       int user, OpCounters* counters) {
    (void)counters;  // additions only
    const int bits = cb.bits_per_symbol();
    if (static_cast<int>(bit_priors.size()) != bits)
        throw std::invalid_argument("bridge: one bit LLR per label position required");
    std::vector<double> out(cb.num_symbols, 0.0);
    for (int m = 0; m < cb.num_symbols; ++m) {
        double s = 0.0;
        const auto& label = cb.bit_labels[user][m];
        for (int i = 0; i < bits; ++i)
            if (label[i]) s -= bit_priors[i];
        out[m] = s;
    }
    return out;
}

BitLlrSplit symbol_to_bit_llr(std::span<const double> symbol_total,
                              std::span<const double> fed_bit_priors, const Codebook& cb,
                              int user, OpCounters* counters, bool max_log) {
    const int bits = cb.bits_per_symbol();
    const int M = cb.num_symbols;
    if (static_cast<int>(symbol_total.size()) != M)
        throw std::invalid_argument("bridge: symbol LLR vector has wrong length");
    if (static_cast<int>(fed_bit_priors.size()) != bits)
        throw std::invalid_argument("bridge: fed bit priors have wrong length");

    BitLlrSplit out;
    out.total.resize(bits);
    out.intrinsic.resize(bits);
    out.prior.assign(fed_bit_priors.begin(), fed_bit_priors.end());

    std::vector<double> zeros, ones;
    zeros.reserve(M);
    ones.reserve(M);
    for (int i = 0; i < bits; ++i) {
        zeros.clear();
        ones.clear();
        for (int m = 0; m < M; ++m) {
            if (cb.bit_labels[user][m][i])
                ones.push_back(symbol_total[m]);
            else
                zeros.push_back(symbol_total[m]);
        }
        assert(!zeros.empty() && !ones.empty());  // bijective labels cover both subsets
        const double t = jacobian_logsumexp(zeros, counters, max_log) -
                         jacobian_logsumexp(ones, counters, max_log);
        out.total[i] = t;
        out.intrinsic[i] = t - fed_bit_priors[i];
    }
    return out;
}

}  // namespace scma
