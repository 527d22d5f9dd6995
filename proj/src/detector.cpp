#include "scma/detector.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace scma {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Edge ids are resource-major: resources in order, neighbors ascending. The
// same ids are reachable from the user side for the user-node sweeps.
struct EdgeIndex {
    std::vector<std::vector<int>> of_resource;  // [k][local] -> edge
    std::vector<std::vector<int>> of_user;      // [j][local] -> edge, aligned with user_neighbors
    int count = 0;

    explicit EdgeIndex(const FactorGraph& fg) {
        const int K = fg.num_resources();
        const int J = fg.num_users();
        of_resource.resize(K);
        of_user.resize(J);
        std::vector<std::vector<int>> edge_kj(K, std::vector<int>(J, -1));
        for (int k = 0; k < K; ++k) {
            for (int j : fg.resource_neighbors[k]) {
                edge_kj[k][j] = count;
                of_resource[k].push_back(count);
                ++count;
            }
        }
        for (int j = 0; j < J; ++j)
            for (int k : fg.user_neighbors[j]) of_user[j].push_back(edge_kj[k][j]);
    }
};

void check_inputs(const Codebook& cb, const FactorGraph& fg, std::span<const cplx> y,
                  const ChannelRealization& ch, int iterations) {
    if (iterations < 0) throw std::invalid_argument("detector: iteration count must be >= 0");
    if (static_cast<int>(y.size()) != cb.num_resources)
        throw std::invalid_argument("detector: received vector has wrong dimension");
    if (static_cast<int>(ch.gains.size()) != cb.num_resources ||
        (cb.num_resources > 0 && static_cast<int>(ch.gains[0].size()) != cb.num_users))
        throw std::invalid_argument("detector: channel gain matrix has wrong shape");
    if (fg.num_users() != cb.num_users || fg.num_resources() != cb.num_resources)
        throw std::invalid_argument("detector: factor graph does not match codebook");
}

// h_kj * x_kj for every resource, local neighbor, and symbol; fixed within
// one detection call.
std::vector<std::vector<std::vector<cplx>>> faded_components(const Codebook& cb,
                                                             const FactorGraph& fg,
                                                             const ChannelRealization& ch) {
    const int K = cb.num_resources;
    const int M = cb.num_symbols;
    std::vector<std::vector<std::vector<cplx>>> hx(K);
    for (int k = 0; k < K; ++k) {
        const auto& users = fg.resource_neighbors[k];
        hx[k].resize(users.size());
        for (std::size_t a = 0; a < users.size(); ++a) {
            const int j = users[a];
            hx[k][a].resize(M);
            for (int m = 0; m < M; ++m) hx[k][a][m] = ch.gains[k][j] * cb.codewords[j][m][k];
        }
    }
    return hx;
}

std::vector<std::vector<double>> resolve_state(DetectorState* state, int edges, int m,
                                               double init) {
    if (state != nullptr && !state->resource_to_user.empty()) {
        if (static_cast<int>(state->resource_to_user.size()) != edges ||
            static_cast<int>(state->resource_to_user[0].size()) != m)
            throw std::invalid_argument("detector: message state has wrong shape");
        return state->resource_to_user;
    }
    return std::vector<std::vector<double>>(edges, std::vector<double>(m, init));
}

}  // namespace

double jacobian_logsumexp(std::span<const double> values, OpCounters* counters, bool max_log) {
    if (values.empty()) throw std::invalid_argument("jacobian_logsumexp: empty input");
    double acc = values[0];
    for (std::size_t i = 1; i < values.size(); ++i) {
        const double a = acc;
        const double b = values[i];
        const double hi = std::max(a, b);
        if (max_log) {
            acc = hi;
            continue;
        }
        if (hi == kNegInf) {
            acc = kNegInf;
            continue;
        }
        acc = hi + std::log1p(std::exp(-std::abs(a - b)));
        if (counters != nullptr) {
            counters->exp += 1;
            counters->log += 1;
        }
    }
    return acc;
}

std::vector<std::vector<double>> detect_prob(const Codebook& cb, const FactorGraph& fg,
                                             std::span<const cplx> y,
                                             const ChannelRealization& ch,
                                             const std::vector<std::vector<double>>* prior_pmf,
                                             int iterations, const DetectorOptions& opt) {
    check_inputs(cb, fg, y, ch, iterations);
    const int J = cb.num_users;
    const int M = cb.num_symbols;
    const int K = cb.num_resources;
    OpCounters* c = opt.counters;

    std::vector<std::vector<double>> p(J, std::vector<double>(M, 1.0 / M));
    if (prior_pmf != nullptr) {
        if (static_cast<int>(prior_pmf->size()) != J)
            throw std::invalid_argument("detector: prior pmf has wrong shape");
        p = *prior_pmf;
        for (const auto& pj : p) {
            double s = 0.0;
            for (double v : pj) {
                if (v < 0.0) throw std::invalid_argument("detector: negative prior probability");
                s += v;
            }
            if (std::abs(s - 1.0) > 1e-6)
                throw std::invalid_argument("detector: prior pmf does not sum to 1");
        }
    }

    const EdgeIndex ei(fg);
    auto U = resolve_state(opt.state, ei.count, M, 1.0);
    std::vector<std::vector<double>> V(ei.count, std::vector<double>(M, 0.0));
    const auto hx = faded_components(cb, fg, ch);

    std::vector<double> exponents;
    std::vector<double> products;

    for (int t = 1; t <= iterations; ++t) {
        // user-node updates, Eq.-(10) form, then per-edge renormalization
        for (int j = 0; j < J; ++j) {
            const auto& edges = ei.of_user[j];
            for (std::size_t a = 0; a < edges.size(); ++a) {
                auto& out = V[edges[a]];
                double sum = 0.0;
                for (int m = 0; m < M; ++m) {
                    double v = p[j][m];
                    for (std::size_t b = 0; b < edges.size(); ++b) {
                        if (b == a) continue;
                        v *= U[edges[b]][m];
                        if (c != nullptr) c->mul += 1;
                    }
                    out[m] = v;
                    sum += v;
                }
                if (!(sum > 0.0) || !std::isfinite(sum))
                    throw std::runtime_error("detector: probability-domain message underflow");
                for (int m = 0; m < M; ++m) {
                    out[m] /= sum;
                    if (c != nullptr) c->div += 1;
                }
            }
        }

        // resource-node updates: enumerate every partner combination per
        // target symbol; one kernel exponential per enumerated term
        for (int k = 0; k < K; ++k) {
            const auto& users = fg.resource_neighbors[k];
            const int deg = static_cast<int>(users.size());
            for (int a = 0; a < deg; ++a) {
                const int edge = ei.of_resource[k][a];
                const int combos = [&] {
                    int n = 1;
                    for (int b = 0; b < deg - 1; ++b) n *= M;
                    return n;
                }();
                exponents.assign(static_cast<std::size_t>(M) * combos, 0.0);
                products.assign(static_cast<std::size_t>(M) * combos, 1.0);

                std::size_t idx = 0;
                for (int m = 0; m < M; ++m) {
                    const cplx base = y[k] - hx[k][a][m];
                    std::vector<int> digits(std::max(deg - 1, 0), 0);
                    for (int cix = 0; cix < combos; ++cix, ++idx) {
                        cplx resid = base;
                        double prod = 1.0;
                        bool first = true;
                        int d = 0;
                        for (int b = 0; b < deg; ++b) {
                            if (b == a) continue;
                            const int mb = digits[d++];
                            resid -= hx[k][b][mb];
                            if (first) {
                                prod = V[ei.of_resource[k][b]][mb];
                                first = false;
                            } else {
                                prod *= V[ei.of_resource[k][b]][mb];
                                if (c != nullptr) c->mul += 1;
                            }
                        }
                        exponents[idx] = -std::norm(resid) / ch.n0;
                        if (c != nullptr) c->div += 1;
                        products[idx] = first ? -1.0 : prod;  // -1 marks "no partners"
                        for (int d2 = 0; d2 < deg - 1; ++d2) {
                            if (++digits[d2] < M) break;
                            digits[d2] = 0;
                        }
                    }
                }

                // shift so the kernels stay representable; the common factor
                // cancels in the per-edge normalization below
                const double shift = *std::max_element(exponents.begin(), exponents.end());
                auto& out = U[edge];
                idx = 0;
                double sum = 0.0;
                for (int m = 0; m < M; ++m) {
                    double acc = 0.0;
                    for (int cix = 0; cix < combos; ++cix, ++idx) {
                        const double kernel = std::exp(exponents[idx] - shift);
                        if (c != nullptr) c->exp += 1;
                        if (products[idx] < 0.0) {
                            acc += kernel;
                        } else {
                            acc += kernel * products[idx];
                            if (c != nullptr) c->mul += 1;
                        }
                    }
                    out[m] = acc;
                    sum += acc;
                }
                if (!(sum > 0.0) || !std::isfinite(sum))
                    throw std::runtime_error("detector: probability-domain message underflow");
                for (int m = 0; m < M; ++m) {
                    out[m] /= sum;
                    if (c != nullptr) c->div += 1;
                }
            }
        }
    }

    // final beliefs V_j(x) = p(x) * prod_{k in dj} U_{k->j}(x), normalized
    std::vector<std::vector<double>> belief(J, std::vector<double>(M, 0.0));
    for (int j = 0; j < J; ++j) {
        double sum = 0.0;
        for (int m = 0; m < M; ++m) {
            double v = p[j][m];
            for (int e : ei.of_user[j]) {
                v *= U[e][m];
                if (c != nullptr) c->mul += 1;
            }
            belief[j][m] = v;
            sum += v;
        }
        if (!(sum > 0.0) || !std::isfinite(sum))
            throw std::runtime_error("detector: belief underflow");
        for (int m = 0; m < M; ++m) belief[j][m] /= sum;
    }

    if (opt.state != nullptr) opt.state->resource_to_user = std::move(U);
    return belief;
}

SymbolLlr detect_log(const Codebook& cb, const FactorGraph& fg, std::span<const cplx> y,
                     const ChannelRealization& ch,
                     const std::vector<std::vector<double>>* prior_llr, int iterations,
                     const DetectorOptions& opt) {
    check_inputs(cb, fg, y, ch, iterations);
    const int J = cb.num_users;
    const int M = cb.num_symbols;
    const int K = cb.num_resources;
    OpCounters* c = opt.counters;

    std::vector<std::vector<double>> prior(J, std::vector<double>(M, 0.0));
    if (prior_llr != nullptr) {
        if (static_cast<int>(prior_llr->size()) != J)
            throw std::invalid_argument("detector: prior LLRs have wrong shape");
        prior = *prior_llr;
        for (int j = 0; j < J; ++j) {
            if (static_cast<int>(prior[j].size()) != M)
                throw std::invalid_argument("detector: prior LLRs have wrong shape");
            if (prior[j][cb.reference_symbol(j)] != 0.0)
                throw std::invalid_argument("detector: prior reference entry must be 0");
        }
    }

    const EdgeIndex ei(fg);
    auto LU = resolve_state(opt.state, ei.count, M, 0.0);
    std::vector<std::vector<double>> LV(ei.count, std::vector<double>(M, 0.0));
    const auto hx = faded_components(cb, fg, ch);

    std::vector<double> terms;
    std::vector<double> raw(M, 0.0);

    for (int t = 1; t <= iterations; ++t) {
        // Eq.-(13) user-node updates: prior plus all-but-one incoming messages
        for (int j = 0; j < J; ++j) {
            const auto& edges = ei.of_user[j];
            for (std::size_t a = 0; a < edges.size(); ++a) {
                auto& out = LV[edges[a]];
                for (int m = 0; m < M; ++m) {
                    double v = prior[j][m];
                    for (std::size_t b = 0; b < edges.size(); ++b)
                        if (b != a) v += LU[edges[b]][m];
                    out[m] = v;
                }
            }
        }

        // Eq.-(14) resource-node updates via jacobian_logsumexp; messages are
        // re-referenced so LU at the reference codeword is exactly 0
        for (int k = 0; k < K; ++k) {
            const auto& users = fg.resource_neighbors[k];
            const int deg = static_cast<int>(users.size());
            for (int a = 0; a < deg; ++a) {
                const int edge = ei.of_resource[k][a];
                for (int m = 0; m < M; ++m) {
                    const cplx base = y[k] - hx[k][a][m];
                    terms.clear();
                    std::vector<int> digits(std::max(deg - 1, 0), 0);
                    const int combos = [&] {
                        int n = 1;
                        for (int b = 0; b < deg - 1; ++b) n *= M;
                        return n;
                    }();
                    for (int cix = 0; cix < combos; ++cix) {
                        cplx resid = base;
                        double term = 0.0;
                        int d = 0;
                        for (int b = 0; b < deg; ++b) {
                            if (b == a) continue;
                            const int mb = digits[d++];
                            resid -= hx[k][b][mb];
                            term += LV[ei.of_resource[k][b]][mb];
                        }
                        term -= std::norm(resid) / ch.n0;
                        if (c != nullptr) c->div += 1;
                        terms.push_back(term);
                        for (int d2 = 0; d2 < deg - 1; ++d2) {
                            if (++digits[d2] < M) break;
                            digits[d2] = 0;
                        }
                    }
                    raw[m] = jacobian_logsumexp(terms, c, opt.max_log);
                }
                const double ref = raw[cb.reference_symbol(users[a])];
                auto& out = LU[edge];
                for (int m = 0; m < M; ++m) out[m] = raw[m] - ref;
            }
        }
    }

    // Eq.-(15) output with the intrinsic sum kept separate
    SymbolLlr out;
    out.total.assign(J, std::vector<double>(M, 0.0));
    out.intrinsic.assign(J, std::vector<double>(M, 0.0));
    out.prior = prior;
    for (int j = 0; j < J; ++j) {
        for (int m = 0; m < M; ++m) {
            double s = 0.0;
            for (int e : ei.of_user[j]) s += LU[e][m];
            out.intrinsic[j][m] = s;
            out.total[j][m] = prior[j][m] + s;
        }
    }

    if (opt.state != nullptr) opt.state->resource_to_user = std::move(LU);
    return out;
}

OracleResult exact_map_oracle(const Codebook& cb, const FactorGraph& fg, std::span<const cplx> y,
                              const ChannelRealization& ch,
                              const std::vector<std::vector<double>>* prior_pmf) {
    check_inputs(cb, fg, y, ch, 1);
    const int J = cb.num_users;
    const int M = cb.num_symbols;
    const int K = cb.num_resources;

    double combos_d = 1.0;
    for (int j = 0; j < J; ++j) combos_d *= M;
    if (combos_d > static_cast<double>(1 << 20))
        throw std::invalid_argument("exact_map_oracle: M^J exceeds the 2^20 enumeration guard");
    const std::int64_t combos = static_cast<std::int64_t>(combos_d);

    std::vector<std::vector<double>> logp(J, std::vector<double>(M, -std::log(double(M))));
    if (prior_pmf != nullptr) {
        for (int j = 0; j < J; ++j)
            for (int m = 0; m < M; ++m) logp[j][m] = std::log((*prior_pmf)[j][m]);
    }

    const auto hx = faded_components(cb, fg, ch);
    std::vector<std::vector<int>> local_of(K);  // resource-local index per user
    for (int k = 0; k < K; ++k) {
        local_of[k].resize(cb.num_users, -1);
        for (std::size_t a = 0; a < fg.resource_neighbors[k].size(); ++a)
            local_of[k][fg.resource_neighbors[k][a]] = static_cast<int>(a);
    }

    std::vector<double> weight(combos, 0.0);
    std::vector<int> digits(J, 0);
    double best = kNegInf;
    std::vector<int> best_digits(J, 0);
    for (std::int64_t ix = 0; ix < combos; ++ix) {
        double w = 0.0;
        for (int j = 0; j < J; ++j) w += logp[j][digits[j]];
        for (int k = 0; k < K; ++k) {
            cplx resid = y[k];
            for (int j : fg.resource_neighbors[k]) resid -= hx[k][local_of[k][j]][digits[j]];
            w -= std::norm(resid) / ch.n0;
        }
        weight[ix] = w;
        if (w > best) {
            best = w;
            best_digits = digits;
        }
        for (int j = 0; j < J; ++j) {
            if (++digits[j] < M) break;
            digits[j] = 0;
        }
    }

    // direct shifted exponential sums, deliberately not sharing the
    // message-passing code path
    OracleResult res;
    res.joint_map = best_digits;
    res.marginals.assign(J, std::vector<double>(M, 0.0));
    std::fill(digits.begin(), digits.end(), 0);
    for (std::int64_t ix = 0; ix < combos; ++ix) {
        const double e = std::exp(weight[ix] - best);
        for (int j = 0; j < J; ++j) res.marginals[j][digits[j]] += e;
        for (int j = 0; j < J; ++j) {
            if (++digits[j] < M) break;
            digits[j] = 0;
        }
    }
    res.marginal_map.assign(J, 0);
    for (int j = 0; j < J; ++j) {
        double sum = 0.0;
        for (int m = 0; m < M; ++m) sum += res.marginals[j][m];
        int arg = 0;
        for (int m = 0; m < M; ++m) {
            res.marginals[j][m] /= sum;
            if (res.marginals[j][m] > res.marginals[j][arg]) arg = m;
        }
        res.marginal_map[j] = arg;
    }
    return res;
}

}  // namespace scma
