#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "scma/detector.hpp"
#include "testutil.hpp"

using namespace scma;

namespace {

Codebook single_user_bpsk() {
    return load_codebook(R"(J 1
K 1
M 2
N 1
user 1
support 1
codeword (1,0)
codeword (-1,0)
label 0
label 1
)");
}

// two users colliding on one shared resource: a cycle-free star of
// unit-energy rotated QPSK points
Codebook two_user_star() {
    Codebook cb;
    cb.num_users = 2;
    cb.num_resources = 1;
    cb.num_symbols = 4;
    cb.supports = {{0}, {0}};
    cb.codewords.resize(2);
    cb.bit_labels.resize(2);
    const double rot[2] = {0.0, 0.41};
    for (int j = 0; j < 2; ++j) {
        for (int m = 0; m < 4; ++m) {
            const double a = 0.25 * 3.14159265358979323846 + m * 1.5707963267948966 + rot[j];
            cb.codewords[j].push_back({cplx(std::cos(a), std::sin(a))});
        }
        for (int m = 0; m < 4; ++m)
            cb.bit_labels[j].push_back({static_cast<std::uint8_t>((m >> 1) & 1),
                                        static_cast<std::uint8_t>(m & 1)});
    }
    cb.validate();
    return cb;
}

double rel_err(double a, double b) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300});
}

std::vector<std::vector<double>> random_priors(const Codebook& cb, Rng& rng, bool as_llr) {
    std::vector<std::vector<double>> out(cb.num_users, std::vector<double>(cb.num_symbols, 0.0));
    for (int j = 0; j < cb.num_users; ++j) {
        const int ref = cb.reference_symbol(j);
        for (int m = 0; m < cb.num_symbols; ++m)
            out[j][m] = m == ref ? 0.0 : 4.0 * (rng.uniform() - 0.5);
        if (!as_llr) {
            double sum = 0.0;
            for (double& v : out[j]) {
                v = std::exp(v);
                sum += v;
            }
            for (double& v : out[j]) v /= sum;
        }
    }
    return out;
}

}  // namespace

TEST_CASE("jacobian_logsumexp identities") {
    const double two_zeros[] = {0.0, 0.0};
    CHECK(jacobian_logsumexp(two_zeros) == doctest::Approx(std::log(2.0)).epsilon(1e-12));

    const double large[] = {1000.0, 1000.0};
    CHECK(jacobian_logsumexp(large) ==
          doctest::Approx(1000.0 + std::log(2.0)).epsilon(1e-12));

    CHECK_THROWS_AS(jacobian_logsumexp(std::span<const double>{}), std::invalid_argument);

    const double vals[] = {-3.0, 1.0, 2.5};
    CHECK(jacobian_logsumexp(vals, nullptr, true) == 2.5);  // max-log keeps the max
}

TEST_CASE("jacobian_logsumexp matches an extended-precision oracle") {
    Rng rng(17);
    for (int rep = 0; rep < 200; ++rep) {
        std::vector<double> vals(16);
        for (double& v : vals) v = 100.0 * (rng.uniform() - 0.5);
        long double shift = *std::max_element(vals.begin(), vals.end());
        long double sum = 0.0L;
        for (double v : vals) sum += std::exp((long double)v - shift);
        const double expect = static_cast<double>(shift + std::log(sum));
        CHECK(jacobian_logsumexp(vals) == doctest::Approx(expect).epsilon(1e-10));
    }
}

TEST_CASE("jacobian_logsumexp counts one exp and one log per merge") {
    OpCounters c;
    const double vals[] = {0.5, -1.0, 2.0, 3.5};
    (void)jacobian_logsumexp(vals, &c);
    CHECK(c.exp == 3);
    CHECK(c.log == 3);
}

TEST_CASE("single-user detection is the exact MAP rule") {
    const Codebook cb = single_user_bpsk();
    const FactorGraph fg = derive_factor_graph(cb);
    Rng rng(5);
    const auto ch = draw_channel(ChannelModel::awgn, 0.8, fg, rng);
    const int symbols[1] = {1};
    const auto y = transmit(cb, fg, symbols, ch, rng);

    const auto belief = detect_prob(cb, fg, y, ch, nullptr, 1);
    double expect[2];
    double sum = 0.0;
    for (int m = 0; m < 2; ++m) {
        expect[m] = std::exp(-std::norm(y[0] - cb.codewords[0][m][0]) / ch.n0);
        sum += expect[m];
    }
    for (int m = 0; m < 2; ++m)
        CHECK(belief[0][m] == doctest::Approx(expect[m] / sum).epsilon(1e-12));
}

TEST_CASE("noiseless detection recovers the transmitted symbols") {
    const Codebook cb = make_default_codebook();
    const FactorGraph fg = derive_factor_graph(cb);
    Rng rng(31);
    const std::vector<int> tx = {2, 0, 3, 1, 1, 2};
    const auto ch = draw_channel(ChannelModel::awgn, 1e-3, fg, rng);
    const auto y = transmit(cb, fg, tx, ch, rng);

    const auto belief = detect_prob(cb, fg, y, ch, nullptr, 3);
    for (int j = 0; j < cb.num_users; ++j) {
        const int arg = static_cast<int>(std::max_element(belief[j].begin(), belief[j].end()) -
                                         belief[j].begin());
        CHECK(arg == tx[j]);
    }
}

TEST_CASE("two-user star marginals match brute force") {
    const Codebook cb = two_user_star();
    const FactorGraph fg = derive_factor_graph(cb);
    Rng rng(23);
    for (int rep = 0; rep < 10; ++rep) {
        const std::vector<int> tx = {static_cast<int>(rng.below(4)),
                                     static_cast<int>(rng.below(4))};
        const auto ch = draw_channel(ChannelModel::awgn, 0.7, fg, rng);
        const auto y = transmit(cb, fg, tx, ch, rng);
        const auto priors = random_priors(cb, rng, false);

        const auto belief = detect_prob(cb, fg, y, ch, &priors, 2);
        const auto brute = testutil::brute_marginals(cb, fg, y, ch, &priors);
        const auto oracle = exact_map_oracle(cb, fg, y, ch, &priors);
        for (int j = 0; j < 2; ++j)
            for (int m = 0; m < 4; ++m) {
                CHECK(rel_err(belief[j][m], brute[j][m]) < 1e-9);
                CHECK(rel_err(oracle.marginals[j][m], brute[j][m]) < 1e-9);
            }
    }
}

TEST_CASE("cycle-free exactness on the tree fixture") {
    const Codebook cb = make_tree_codebook();
    const FactorGraph fg = derive_factor_graph(cb);
    Rng rng(41);
    for (int rep = 0; rep < 10; ++rep) {
        std::vector<int> tx(3);
        for (int& t : tx) t = static_cast<int>(rng.below(4));
        const auto ch = draw_channel(ChannelModel::rayleigh_iid, 0.5, fg, rng);
        const auto y = transmit(cb, fg, tx, ch, rng);
        const auto priors = random_priors(cb, rng, false);

        const auto belief = detect_prob(cb, fg, y, ch, &priors, 4);
        const auto brute = testutil::brute_marginals(cb, fg, y, ch, &priors);
        for (int j = 0; j < 3; ++j)
            for (int m = 0; m < 4; ++m) CHECK(rel_err(belief[j][m], brute[j][m]) < 1e-9);
    }
}

TEST_CASE("log and probability domains agree") {
    const Codebook cb = make_default_codebook();
    const FactorGraph fg = derive_factor_graph(cb);
    Rng rng(59);
    for (int t : {1, 2, 4}) {
        for (int rep = 0; rep < 5; ++rep) {
            std::vector<int> tx(6);
            for (int& s : tx) s = static_cast<int>(rng.below(4));
            const auto ch = draw_channel(ChannelModel::rayleigh_iid, 0.4, fg, rng);
            const auto y = transmit(cb, fg, tx, ch, rng);
            const auto llr = random_priors(cb, rng, true);
            std::vector<std::vector<double>> pmf(6, std::vector<double>(4));
            for (int j = 0; j < 6; ++j) {
                double sum = 0.0;
                for (int m = 0; m < 4; ++m) {
                    pmf[j][m] = std::exp(llr[j][m]);
                    sum += pmf[j][m];
                }
                for (int m = 0; m < 4; ++m) pmf[j][m] /= sum;
            }

            const auto prob = detect_prob(cb, fg, y, ch, &pmf, t);
            const auto lg = detect_log(cb, fg, y, ch, &llr, t);
            for (int j = 0; j < 6; ++j) {
                double sum = 0.0;
                std::vector<double> p(4);
                for (int m = 0; m < 4; ++m) {
                    p[m] = std::exp(lg.total[j][m]);
                    sum += p[m];
                }
                for (int m = 0; m < 4; ++m)
                    CHECK(p[m] / sum == doctest::Approx(prob[j][m]).epsilon(1e-6));
            }
        }
    }
}

TEST_CASE("resource messages match direct enumeration (Eq. 14)") {
    const Codebook cb = make_default_codebook();
    const FactorGraph fg = derive_factor_graph(cb);
    Rng rng(67);
    for (int rep = 0; rep < 50; ++rep) {
        std::vector<int> tx(6);
        for (int& s : tx) s = static_cast<int>(rng.below(4));
        const auto ch = draw_channel(ChannelModel::rayleigh_iid, 0.6, fg, rng);
        const auto y = transmit(cb, fg, tx, ch, rng);
        const auto llr = random_priors(cb, rng, true);

        // after one iteration the user->resource message is exactly the prior
        DetectorState state;
        DetectorOptions opt;
        opt.state = &state;
        (void)detect_log(cb, fg, y, ch, &llr, 1, opt);

        int edge = 0;
        for (int k = 0; k < cb.num_resources; ++k) {
            for (int j : fg.resource_neighbors[k]) {
                const auto expect = testutil::brute_resource_message(cb, fg, y, ch, k, j, llr);
                for (int m = 0; m < 4; ++m)
                    CHECK(state.resource_to_user[edge][m] ==
                          doctest::Approx(expect[m]).epsilon(1e-9));
                ++edge;
            }
        }
    }
}

TEST_CASE("zero iterations pass the prior through") {
    const Codebook cb = make_default_codebook();
    const FactorGraph fg = derive_factor_graph(cb);
    Rng rng(71);
    const auto ch = draw_channel(ChannelModel::awgn, 1.0, fg, rng);
    const std::vector<int> tx = {0, 0, 0, 0, 0, 0};
    const auto y = transmit(cb, fg, tx, ch, rng);
    const auto llr = random_priors(cb, rng, true);

    const auto out = detect_log(cb, fg, y, ch, &llr, 0);
    for (int j = 0; j < 6; ++j)
        for (int m = 0; m < 4; ++m) {
            CHECK(out.total[j][m] == llr[j][m]);
            CHECK(out.intrinsic[j][m] == 0.0);
        }
}

TEST_CASE("detector output keeps the decomposition identity") {
    const Codebook cb = make_default_codebook();
    const FactorGraph fg = derive_factor_graph(cb);
    Rng rng(73);
    const auto ch = draw_channel(ChannelModel::awgn, 0.5, fg, rng);
    const std::vector<int> tx = {1, 2, 3, 0, 1, 2};
    const auto y = transmit(cb, fg, tx, ch, rng);
    const auto llr = random_priors(cb, rng, true);

    const auto out = detect_log(cb, fg, y, ch, &llr, 3);
    for (int j = 0; j < 6; ++j) {
        const int ref = cb.reference_symbol(j);
        CHECK(out.total[j][ref] == 0.0);
        CHECK(out.intrinsic[j][ref] == 0.0);
        CHECK(out.prior[j][ref] == 0.0);
        for (int m = 0; m < 4; ++m)
            CHECK(std::abs(out.total[j][m] - out.intrinsic[j][m] - out.prior[j][m]) < 1e-9);
    }

    // uniform prior leaves the prior part at zero
    const auto flat = detect_log(cb, fg, y, ch, nullptr, 3);
    for (int j = 0; j < 6; ++j)
        for (int m = 0; m < 4; ++m) CHECK(flat.prior[j][m] == 0.0);
}

TEST_CASE("messages advance one opposite-side generation per iteration") {
    const Codebook cb = make_default_codebook();
    const FactorGraph fg = derive_factor_graph(cb);
    Rng rng(79);
    const auto ch = draw_channel(ChannelModel::rayleigh_iid, 0.5, fg, rng);
    const std::vector<int> tx = {3, 1, 0, 2, 3, 1};
    const auto y = transmit(cb, fg, tx, ch, rng);
    const auto llr = random_priors(cb, rng, true);

    const auto two = detect_log(cb, fg, y, ch, &llr, 2);

    DetectorState state;
    DetectorOptions opt;
    opt.state = &state;
    (void)detect_log(cb, fg, y, ch, &llr, 1, opt);
    const auto resumed = detect_log(cb, fg, y, ch, &llr, 1, opt);

    for (int j = 0; j < 6; ++j)
        for (int m = 0; m < 4; ++m)
            CHECK(resumed.total[j][m] == doctest::Approx(two.total[j][m]).epsilon(1e-12));
}

TEST_CASE("normalized posteriors do not depend on the reference choice") {
    const Codebook cb = make_default_codebook();
    Codebook relabeled = cb;
    for (int j = 0; j < cb.num_users; ++j)
        std::rotate(relabeled.bit_labels[j].begin(), relabeled.bit_labels[j].begin() + 1,
                    relabeled.bit_labels[j].end());
    relabeled.validate();

    const FactorGraph fg = derive_factor_graph(cb);
    Rng rng(83);
    const auto ch = draw_channel(ChannelModel::awgn, 0.5, fg, rng);
    const std::vector<int> tx = {0, 1, 2, 3, 2, 1};
    const auto y = transmit(cb, fg, tx, ch, rng);

    const auto a = detect_log(cb, fg, y, ch, nullptr, 3);
    const auto b = detect_log(relabeled, fg, y, ch, nullptr, 3);
    for (int j = 0; j < 6; ++j) {
        std::vector<double> pa(4), pb(4);
        double sa = 0.0, sb = 0.0;
        for (int m = 0; m < 4; ++m) {
            pa[m] = std::exp(a.total[j][m]);
            pb[m] = std::exp(b.total[j][m]);
            sa += pa[m];
            sb += pb[m];
        }
        for (int m = 0; m < 4; ++m)
            CHECK(pa[m] / sa == doctest::Approx(pb[m] / sb).epsilon(1e-9));
    }
}

TEST_CASE("oracle enumeration guard and degenerate cases") {
    // 11 single-resource users push M^J past 2^20
    Codebook big;
    big.num_users = 11;
    big.num_resources = 1;
    big.num_symbols = 4;
    for (int j = 0; j < 11; ++j) {
        big.supports.push_back({0});
        std::vector<std::vector<cplx>> cws;
        std::vector<std::vector<std::uint8_t>> labels;
        for (int m = 0; m < 4; ++m) {
            const double a = 0.1 * j + m * 1.5707963267948966;
            cws.push_back({cplx(std::cos(a), std::sin(a))});
            labels.push_back({static_cast<std::uint8_t>((m >> 1) & 1),
                              static_cast<std::uint8_t>(m & 1)});
        }
        big.codewords.push_back(std::move(cws));
        big.bit_labels.push_back(std::move(labels));
    }
    big.validate();
    const FactorGraph fg = derive_factor_graph(big);
    const std::vector<cplx> y = {cplx(0.3, -0.2)};
    ChannelRealization ch;
    ch.n0 = 1.0;
    ch.gains.assign(1, std::vector<cplx>(11, cplx(1.0, 0.0)));
    CHECK_THROWS_AS(exact_map_oracle(big, fg, y, ch), std::invalid_argument);

    // single user: the marginal is the single-user posterior
    const Codebook solo = single_user_bpsk();
    const FactorGraph sfg = derive_factor_graph(solo);
    Rng rng(3);
    const auto sch = draw_channel(ChannelModel::awgn, 0.6, sfg, rng);
    const int sym[1] = {0};
    const auto sy = transmit(solo, sfg, sym, sch, rng);
    const auto oracle = exact_map_oracle(solo, sfg, sy, sch);
    double e0 = std::exp(-std::norm(sy[0] - solo.codewords[0][0][0]) / sch.n0);
    double e1 = std::exp(-std::norm(sy[0] - solo.codewords[0][1][0]) / sch.n0);
    CHECK(oracle.marginals[0][0] == doctest::Approx(e0 / (e0 + e1)).epsilon(1e-12));

    // two identical users, symmetric observation: identical marginals
    Codebook twin = two_user_star();
    twin.codewords[1] = twin.codewords[0];
    twin.validate();
    const FactorGraph tfg = derive_factor_graph(twin);
    ChannelRealization tch;
    tch.n0 = 0.9;
    tch.gains.assign(1, std::vector<cplx>(2, cplx(1.0, 0.0)));
    const std::vector<cplx> ty = {cplx(0.4, 0.1)};
    const auto to = exact_map_oracle(twin, tfg, ty, tch);
    for (int m = 0; m < 4; ++m)
        CHECK(to.marginals[0][m] == doctest::Approx(to.marginals[1][m]).epsilon(1e-12));
}

TEST_CASE("detector rejects malformed inputs") {
    const Codebook cb = make_default_codebook();
    const FactorGraph fg = derive_factor_graph(cb);
    Rng rng(1);
    const auto ch = draw_channel(ChannelModel::awgn, 1.0, fg, rng);
    const std::vector<cplx> y(4, cplx(0.0, 0.0));
    const std::vector<cplx> bad_y(3, cplx(0.0, 0.0));

    CHECK_THROWS_AS((void)detect_prob(cb, fg, bad_y, ch, nullptr, 1), std::invalid_argument);
    CHECK_THROWS_AS((void)detect_prob(cb, fg, y, ch, nullptr, -1), std::invalid_argument);

    // a prior pmf that does not sum to one
    auto bad_pmf = std::vector<std::vector<double>>(6, std::vector<double>(4, 0.1));
    CHECK_THROWS_AS((void)detect_prob(cb, fg, y, ch, &bad_pmf, 1), std::invalid_argument);

    // a prior LLR whose reference entry is nonzero
    auto bad_ref = std::vector<std::vector<double>>(6, std::vector<double>(4, 0.0));
    bad_ref[0][0] = 1.0;
    CHECK_THROWS_AS((void)detect_log(cb, fg, y, ch, &bad_ref, 1), std::invalid_argument);
}
