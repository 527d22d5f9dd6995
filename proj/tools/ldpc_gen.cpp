// Offline constructor for the bundled regular LDPC codes: progressive edge
// growth, then a column permutation that makes the trailing parity block
// invertible so the systematic encoder applies to the alist as shipped.

#include <algorithm>
#include <cstdio>
#include <deque>
#include <fstream>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "scma/ldpc.hpp"
#include "scma/rng.hpp"

namespace {

struct Graph {
    int n_vars;
    int n_checks;
    std::vector<std::vector<int>> var_checks;
    std::vector<std::vector<int>> check_vars;
    std::vector<int> check_degree;
};

// Progressive edge growth (Hu/Eleftheriou/Arnold style). For every new edge
// a BFS from the variable layers the current graph; the edge goes to the
// lowest-degree check among the unreachable ones, or among the farthest
// layer when everything is reachable. That keeps local girth maximal.
Graph peg_construct(int n_vars, int n_checks, int var_degree, scma::Rng& rng) {
    Graph g{n_vars, n_checks, {}, {}, {}};
    g.var_checks.resize(n_vars);
    g.check_vars.resize(n_checks);
    g.check_degree.assign(n_checks, 0);

    std::vector<int> dist_check(n_checks, -1);
    std::vector<int> seen_var(n_vars, -1);
    std::vector<int> frontier, next_frontier, new_checks;
    std::vector<int> candidates;

    for (int v = 0; v < n_vars; ++v) {
        for (int e = 0; e < var_degree; ++e) {
            std::fill(dist_check.begin(), dist_check.end(), -1);
            seen_var[v] = v;
            frontier.assign(1, v);
            int layer = 0;
            int reached = 0;
            while (!frontier.empty() && reached < n_checks) {
                ++layer;
                new_checks.clear();
                for (int fv : frontier) {
                    for (int c : g.var_checks[fv]) {
                        if (dist_check[c] >= 0) continue;
                        dist_check[c] = layer;
                        new_checks.push_back(c);
                        ++reached;
                    }
                }
                next_frontier.clear();
                for (int c : new_checks) {
                    for (int nv : g.check_vars[c]) {
                        if (seen_var[nv] == v) continue;
                        seen_var[nv] = v;
                        next_frontier.push_back(nv);
                    }
                }
                frontier.swap(next_frontier);
            }

            candidates.clear();
            if (reached < n_checks) {
                for (int c = 0; c < n_checks; ++c)
                    if (dist_check[c] < 0) candidates.push_back(c);
            } else {
                int far = 0;
                for (int c = 0; c < n_checks; ++c) far = std::max(far, dist_check[c]);
                for (int c = 0; c < n_checks; ++c)
                    if (dist_check[c] == far) candidates.push_back(c);
            }

            int best_deg = n_vars + 1;
            for (int c : candidates) best_deg = std::min(best_deg, g.check_degree[c]);
            // random tie-break among the lowest-degree candidates
            int count = 0;
            int chosen = -1;
            for (int c : candidates) {
                if (g.check_degree[c] != best_deg) continue;
                ++count;
                if (rng.below(static_cast<std::uint64_t>(count)) == 0) chosen = c;
            }
            g.var_checks[v].push_back(chosen);
            g.check_vars[chosen].push_back(v);
            ++g.check_degree[chosen];
        }
    }
    return g;
}

// Pivot columns of H under plain left-to-right elimination; empty result
// means rank deficiency.
std::vector<int> pivot_columns(const Graph& g) {
    const int m = g.n_checks;
    const int n = g.n_vars;
    const int words = (n + 63) / 64;
    std::vector<std::vector<std::uint64_t>> rows(m, std::vector<std::uint64_t>(words, 0));
    for (int c = 0; c < m; ++c)
        for (int v : g.check_vars[c]) rows[c][v >> 6] |= 1ULL << (v & 63);

    std::vector<int> pivots;
    int rank = 0;
    for (int col = 0; col < n && rank < m; ++col) {
        const int w = col >> 6;
        const std::uint64_t bit = 1ULL << (col & 63);
        int pivot = -1;
        for (int r = rank; r < m; ++r) {
            if (rows[r][w] & bit) {
                pivot = r;
                break;
            }
        }
        if (pivot < 0) continue;
        std::swap(rows[rank], rows[pivot]);
        for (int r = 0; r < m; ++r) {
            if (r == rank || !(rows[r][w] & bit)) continue;
            for (int ww = 0; ww < words; ++ww) rows[r][ww] ^= rows[rank][ww];
        }
        pivots.push_back(col);
        ++rank;
    }
    if (rank < m) pivots.clear();
    return pivots;
}

scma::ParityCheckMatrix to_pcm(const Graph& g, const std::vector<int>& col_order) {
    std::vector<int> new_pos(g.n_vars);
    for (int i = 0; i < g.n_vars; ++i) new_pos[col_order[i]] = i;
    scma::ParityCheckMatrix pcm;
    pcm.n_bits = g.n_vars;
    pcm.n_checks = g.n_checks;
    pcm.check_neighbors.resize(g.n_checks);
    pcm.var_neighbors.resize(g.n_vars);
    for (int c = 0; c < g.n_checks; ++c) {
        for (int v : g.check_vars[c]) pcm.check_neighbors[c].push_back(new_pos[v]);
        std::sort(pcm.check_neighbors[c].begin(), pcm.check_neighbors[c].end());
        for (int v : pcm.check_neighbors[c]) pcm.var_neighbors[v].push_back(c);
    }
    for (auto& col : pcm.var_neighbors) std::sort(col.begin(), col.end());
    pcm.validate();
    return pcm;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"PEG construction of regular LDPC codes in systematic column order"};
    int n_bits = 1024;
    int n_checks = 512;
    int var_degree = 3;
    std::uint64_t seed = 1;
    std::string alist_out;
    bool write_gen = false;
    app.add_option("--bits", n_bits, "code length")->required();
    app.add_option("--checks", n_checks, "number of parity checks")->required();
    app.add_option("--var-degree", var_degree, "variable-node degree");
    app.add_option("--seed", seed, "construction seed");
    app.add_option("--alist", alist_out, "output alist path")->required();
    app.add_flag("--gen-cache", write_gen, "also write <alist>.gen");
    CLI11_PARSE(app, argc, argv);

    try {
        if (static_cast<long long>(n_bits) * var_degree % n_checks != 0)
            throw std::runtime_error("edge count not divisible by check count");
        const int check_degree = n_bits * var_degree / n_checks;

        for (int attempt = 0; attempt < 50; ++attempt) {
            scma::Rng rng(scma::derive_seed(seed, attempt, 0x9e6));
            const Graph g = peg_construct(n_bits, n_checks, var_degree, rng);

            const bool regular = std::all_of(g.check_degree.begin(), g.check_degree.end(),
                                             [&](int d) { return d == check_degree; });
            if (!regular) {
                std::fprintf(stderr, "attempt %d: check degrees unbalanced, retrying\n", attempt);
                continue;
            }
            const std::vector<int> pivots = pivot_columns(g);
            if (pivots.empty()) {
                std::fprintf(stderr, "attempt %d: rank deficient, retrying\n", attempt);
                continue;
            }
            // info columns first, pivot (parity) columns last
            std::vector<char> is_pivot(n_bits, 0);
            for (int c : pivots) is_pivot[c] = 1;
            std::vector<int> order;
            for (int c = 0; c < n_bits; ++c)
                if (!is_pivot[c]) order.push_back(c);
            for (int c : pivots) order.push_back(c);

            const scma::ParityCheckMatrix pcm = to_pcm(g, order);
            const scma::LdpcEncoder enc = scma::LdpcEncoder::build(pcm);

            std::ofstream out(alist_out);
            if (!out) throw std::runtime_error("cannot write " + alist_out);
            scma::save_alist(pcm, out);
            if (write_gen) {
                std::ofstream gen(alist_out + ".gen");
                if (!gen) throw std::runtime_error("cannot write " + alist_out + ".gen");
                enc.save_cache(gen);
            }
            std::printf("wrote %s: n=%d m=%d var-degree=%d check-degree=%d rate=%.3f seed=%llu/%d\n",
                        alist_out.c_str(), n_bits, n_checks, var_degree, check_degree,
                        1.0 - double(n_checks) / n_bits, (unsigned long long)seed, attempt);
            return 0;
        }
        throw std::runtime_error("no regular full-rank construction found in 50 attempts");
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
