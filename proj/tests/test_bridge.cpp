#include <cmath>
#include <set>

#include "doctest.h"
#include "scma/bridge.hpp"
#include "scma/ldpc.hpp"
#include "scma/rng.hpp"
#include "testutil.hpp"

using namespace scma;

namespace {

// probability-domain reference for the Eq.-(18) conversion: p(x) from
// independent bit probabilities, re-referenced log ratios
std::vector<double> symbol_llr_by_hand(const Codebook& cb, int user,
                                       const std::vector<double>& bit_llr) {
    const int M = cb.num_symbols;
    const int B = cb.bits_per_symbol();
    std::vector<long double> p(M, 1.0L);
    for (int m = 0; m < M; ++m) {
        for (int i = 0; i < B; ++i) {
            const long double p1 = 1.0L / (1.0L + std::exp((long double)bit_llr[i]));
            p[m] *= cb.bit_labels[user][m][i] ? p1 : 1.0L - p1;
        }
    }
    const int ref = cb.reference_symbol(user);
    std::vector<double> out(M);
    for (int m = 0; m < M; ++m) out[m] = static_cast<double>(std::log(p[m] / p[ref]));
    return out;
}

// probability-domain reference for the Eq.-(19) conversion
std::vector<double> bit_llr_by_hand(const Codebook& cb, int user,
                                    const std::vector<double>& symbol_llr) {
    const int M = cb.num_symbols;
    const int B = cb.bits_per_symbol();
    std::vector<double> out(B);
    for (int i = 0; i < B; ++i) {
        long double p0 = 0.0L, p1 = 0.0L;
        for (int m = 0; m < M; ++m) {
            const long double e = std::exp((long double)symbol_llr[m]);
            if (cb.bit_labels[user][m][i])
                p1 += e;
            else
                p0 += e;
        }
        out[i] = static_cast<double>(std::log(p0 / p1));
    }
    return out;
}

}  // namespace

TEST_CASE("interleaver round-trips and differs across users") {
    Rng rng(3);
    std::vector<double> x(257);
    for (double& v : x) v = rng.uniform();

    const Interleaver id{.perm = [] {
        std::vector<int> p(257);
        for (int i = 0; i < 257; ++i) p[i] = i;
        return p;
    }()};
    CHECK(interleave(std::span<const double>(x), id) == x);

    std::set<std::vector<int>> perms;
    for (int j = 0; j < 6; ++j) {
        const Interleaver pi = make_interleaver(257, derive_seed(0x5c3a, j, 0x1eaf));
        CHECK(perms.insert(pi.perm).second);  // distinct across users
        const auto fwd = interleave(std::span<const double>(x), pi);
        CHECK(deinterleave(std::span<const double>(fwd), pi) == x);
    }

    const Interleaver pi = make_interleaver(8, 1);
    CHECK_THROWS_AS(interleave(std::span<const double>(x), pi), std::invalid_argument);
}

TEST_CASE("zero bit priors give zero symbol priors") {
    const Codebook cb = make_default_codebook();
    const std::vector<double> bits(2, 0.0);
    const auto out = bits_to_symbol_llr(bits, cb, 0);
    CHECK(out == std::vector<double>(4, 0.0));
}

TEST_CASE("bit-to-symbol conversion matches the probability-domain oracle") {
    const Codebook cb = make_default_codebook();
    Rng rng(11);
    for (int rep = 0; rep < 100; ++rep) {
        const int user = static_cast<int>(rng.below(6));
        std::vector<double> bits(2);
        for (double& v : bits) v = 10.0 * (rng.uniform() - 0.5);
        const auto got = bits_to_symbol_llr(bits, cb, user);
        const auto expect = symbol_llr_by_hand(cb, user, bits);
        CHECK(got[cb.reference_symbol(user)] == 0.0);
        for (int m = 0; m < 4; ++m) CHECK(got[m] == doctest::Approx(expect[m]).epsilon(1e-9));
    }
}

TEST_CASE("a clipped-certain bit pins the symbols carrying its complement") {
    const Codebook cb = make_default_codebook();
    const std::vector<double> bits = {kLlrClip, 0.0};  // first label bit surely 0
    const auto out = bits_to_symbol_llr(bits, cb, 0);
    for (int m = 0; m < 4; ++m) {
        if (cb.bit_labels[0][m][0])
            CHECK(out[m] <= -kLlrClip + 1e-12);
        else
            CHECK(std::abs(out[m]) < 1e-12);
    }
}

TEST_CASE("uniform detector output gives zero bit LLRs") {
    const Codebook cb = make_default_codebook();
    const std::vector<double> flat(4, 0.0);
    const std::vector<double> prior(2, 0.0);
    const auto split = symbol_to_bit_llr(flat, prior, cb, 0);
    CHECK(split.total == std::vector<double>(2, 0.0));
    CHECK(split.intrinsic == std::vector<double>(2, 0.0));
}

TEST_CASE("all mass on one symbol reproduces its label with large magnitudes") {
    const Codebook cb = make_default_codebook();
    for (int m = 0; m < 4; ++m) {
        std::vector<double> sym(4, 0.0);
        sym[m] = 80.0;  // Eq.-(19) totals are shift invariant per bit
        const std::vector<double> prior(2, 0.0);
        const auto split = symbol_to_bit_llr(sym, prior, cb, 0);
        for (int i = 0; i < 2; ++i) {
            if (cb.bit_labels[0][m][i])
                CHECK(split.total[i] < -39.0);
            else
                CHECK(split.total[i] > 39.0);
        }
    }
}

TEST_CASE("symbol-to-bit conversion matches the probability-domain oracle") {
    const Codebook cb = make_default_codebook();
    Rng rng(13);
    for (int rep = 0; rep < 200; ++rep) {
        const int user = static_cast<int>(rng.below(6));
        std::vector<double> sym(4);
        const int ref = cb.reference_symbol(user);
        for (int m = 0; m < 4; ++m) sym[m] = m == ref ? 0.0 : 12.0 * (rng.uniform() - 0.5);
        std::vector<double> fed(2);
        for (double& v : fed) v = 6.0 * (rng.uniform() - 0.5);

        const auto split = symbol_to_bit_llr(sym, fed, cb, user);
        const auto expect = bit_llr_by_hand(cb, user, sym);
        for (int i = 0; i < 2; ++i) {
            CHECK(split.total[i] == doctest::Approx(expect[i]).epsilon(1e-9));
            CHECK(split.total[i] - split.prior[i] == split.intrinsic[i]);  // exact by construction
            CHECK(split.prior[i] == fed[i]);
        }
    }
}

TEST_CASE("the decomposition removes exactly the fed-in prior") {
    // a bit's intrinsic equals its total recomputed with only that bit's own
    // prior zeroed; the other bits' priors legitimately act as intrinsic
    const Codebook cb = make_default_codebook();
    Rng rng(17);
    std::vector<double> intrinsic_sym(4);
    const int ref = cb.reference_symbol(2);
    for (int m = 0; m < 4; ++m)
        intrinsic_sym[m] = m == ref ? 0.0 : 8.0 * (rng.uniform() - 0.5);
    std::vector<double> fed(2);
    for (double& v : fed) v = 4.0 * (rng.uniform() - 0.5);

    // detector total = intrinsic + symbol prior built from the fed bits
    const auto sym_prior = bits_to_symbol_llr(fed, cb, 2);
    std::vector<double> total_sym(4);
    for (int m = 0; m < 4; ++m) total_sym[m] = intrinsic_sym[m] + sym_prior[m];
    const auto with_prior = symbol_to_bit_llr(total_sym, fed, cb, 2);

    for (int i = 0; i < 2; ++i) {
        auto fed_zeroed = fed;
        fed_zeroed[i] = 0.0;
        const auto prior_zeroed = bits_to_symbol_llr(fed_zeroed, cb, 2);
        std::vector<double> sym(4);
        for (int m = 0; m < 4; ++m) sym[m] = intrinsic_sym[m] + prior_zeroed[m];
        const auto recomputed = symbol_to_bit_llr(sym, fed_zeroed, cb, 2);
        CHECK(with_prior.intrinsic[i] == doctest::Approx(recomputed.total[i]).epsilon(1e-9));
    }
}

TEST_CASE("conversion consistency through a pass-through detector") {
    const Codebook cb = make_default_codebook();
    Rng rng(19);
    for (int user = 0; user < 6; ++user) {
        std::vector<double> bits(2);
        for (double& v : bits) v = 8.0 * (rng.uniform() - 0.5);
        const auto sym = bits_to_symbol_llr(bits, cb, user);
        const auto back = symbol_to_bit_llr(sym, bits, cb, user);
        for (int i = 0; i < 2; ++i) {
            CHECK(back.total[i] == doctest::Approx(bits[i]).epsilon(1e-9));
            CHECK(std::abs(back.intrinsic[i]) < 1e-9);  // nothing new was generated
        }
    }
}

TEST_CASE("conversions route every sum through jacobian_logsumexp") {
    const Codebook cb = make_default_codebook();
    OpCounters c;
    const std::vector<double> sym = {0.0, 1.0, -2.0, 0.5};
    const std::vector<double> fed(2, 0.0);
    (void)symbol_to_bit_llr(sym, fed, cb, 0, &c);
    // per bit: two subsets of M/2 = 2 symbols, one merge each
    CHECK(c.exp == 4);
    CHECK(c.log == 4);

    OpCounters c2;
    (void)bits_to_symbol_llr(fed, cb, 0, &c2);
    CHECK(c2.exp == 0);  // additions only
}
