#include "scma/ldpc.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace scma {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw std::runtime_error("ldpc: " + msg); }

double clip_llr(double v) { return std::clamp(v, -kLlrClip, kLlrClip); }

}  // namespace

int ParityCheckMatrix::num_edges() const {
    int e = 0;
    for (const auto& row : check_neighbors) e += static_cast<int>(row.size());
    return e;
}

void ParityCheckMatrix::validate() const {
    if (n_bits < 1 || n_checks < 1) fail("empty matrix");
    if (static_cast<int>(check_neighbors.size()) != n_checks ||
        static_cast<int>(var_neighbors.size()) != n_bits)
        fail("adjacency sizes disagree with dimensions");
    std::int64_t edges_rows = 0, edges_cols = 0;
    for (int c = 0; c < n_checks; ++c) {
        const auto& row = check_neighbors[c];
        if (!std::is_sorted(row.begin(), row.end()) ||
            std::adjacent_find(row.begin(), row.end()) != row.end())
            fail("check adjacency not strictly ascending");
        for (int v : row) {
            if (v < 0 || v >= n_bits) fail("variable index out of range");
            if (!std::binary_search(var_neighbors[v].begin(), var_neighbors[v].end(), c))
                fail("row/column adjacency inconsistent");
        }
        edges_rows += static_cast<std::int64_t>(row.size());
    }
    for (int v = 0; v < n_bits; ++v) {
        const auto& col = var_neighbors[v];
        if (!std::is_sorted(col.begin(), col.end()) ||
            std::adjacent_find(col.begin(), col.end()) != col.end())
            fail("variable adjacency not strictly ascending");
        for (int c : col)
            if (c < 0 || c >= n_checks) fail("check index out of range");
        edges_cols += static_cast<std::int64_t>(col.size());
    }
    if (edges_rows != edges_cols) fail("row/column edge counts disagree");
}

namespace {

ParityCheckMatrix finish_pcm(ParityCheckMatrix pcm) {
    pcm.validate();
    bool regular = true;
    const int dv = pcm.var_neighbors.empty() ? 0 : static_cast<int>(pcm.var_neighbors[0].size());
    for (const auto& col : pcm.var_neighbors) regular &= static_cast<int>(col.size()) == dv;
    const int dc =
        pcm.check_neighbors.empty() ? 0 : static_cast<int>(pcm.check_neighbors[0].size());
    for (const auto& row : pcm.check_neighbors) regular &= static_cast<int>(row.size()) == dc;
    pcm.regular = regular;
    pcm.var_degree = regular ? dv : 0;
    pcm.check_degree = regular ? dc : 0;
    return pcm;
}

}  // namespace

ParityCheckMatrix load_alist(std::istream& in) {
    std::vector<long long> tok;
    long long v;
    while (in >> v) tok.push_back(v);
    std::size_t pos = 0;
    auto next = [&]() -> long long {
        if (pos >= tok.size()) fail("alist truncated");
        return tok[pos++];
    };

    ParityCheckMatrix pcm;
    pcm.n_bits = static_cast<int>(next());
    pcm.n_checks = static_cast<int>(next());
    if (pcm.n_bits < 1 || pcm.n_checks < 1) fail("alist has empty dimensions");
    const int max_col = static_cast<int>(next());
    const int max_row = static_cast<int>(next());

    std::vector<int> col_deg(pcm.n_bits), row_deg(pcm.n_checks);
    std::int64_t col_sum = 0, row_sum = 0;
    for (int i = 0; i < pcm.n_bits; ++i) {
        col_deg[i] = static_cast<int>(next());
        if (col_deg[i] < 0 || col_deg[i] > max_col) fail("column degree outside declared maximum");
        col_sum += col_deg[i];
    }
    for (int i = 0; i < pcm.n_checks; ++i) {
        row_deg[i] = static_cast<int>(next());
        if (row_deg[i] < 0 || row_deg[i] > max_row) fail("row degree outside declared maximum");
        row_sum += row_deg[i];
    }
    if (col_sum != row_sum) fail("row and column degree sums disagree");

    // Entry blocks may be ragged (degree entries each) or padded with zeros
    // to the declared maxima; pick whichever matches the token count.
    const std::size_t remaining = tok.size() - pos;
    const std::size_t ragged =
        static_cast<std::size_t>(col_sum) + static_cast<std::size_t>(row_sum);
    const std::size_t padded = static_cast<std::size_t>(pcm.n_bits) * max_col +
                               static_cast<std::size_t>(pcm.n_checks) * max_row;
    bool is_padded;
    if (remaining == ragged)
        is_padded = false;
    else if (remaining == padded)
        is_padded = true;
    else
        fail("alist entry count matches neither ragged nor padded layout");

    pcm.var_neighbors.assign(pcm.n_bits, {});
    pcm.check_neighbors.assign(pcm.n_checks, {});
    auto read_block = [&](int count, int degree, int width, int limit, std::vector<int>& out) {
        const int todo = is_padded ? width : degree;
        int got = 0;
        for (int i = 0; i < todo; ++i) {
            const long long e = next();
            if (e == 0) {
                if (!is_padded) fail("zero entry in unpadded alist");
                continue;
            }
            if (e < 1 || e > limit) fail("alist entry out of range");
            out.push_back(static_cast<int>(e - 1));
            ++got;
        }
        if (got != degree) fail("alist entries disagree with declared degree");
        (void)count;
    };
    for (int i = 0; i < pcm.n_bits; ++i)
        read_block(i, col_deg[i], max_col, pcm.n_checks, pcm.var_neighbors[i]);
    for (int i = 0; i < pcm.n_checks; ++i)
        read_block(i, row_deg[i], max_row, pcm.n_bits, pcm.check_neighbors[i]);
    if (pos != tok.size()) fail("trailing tokens after alist data");

    for (auto& col : pcm.var_neighbors) std::sort(col.begin(), col.end());
    for (auto& row : pcm.check_neighbors) std::sort(row.begin(), row.end());
    return finish_pcm(std::move(pcm));
}

ParityCheckMatrix load_alist(const std::string& text) {
    std::istringstream ss(text);
    return load_alist(ss);
}

ParityCheckMatrix load_alist_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) fail("cannot open '" + path + "'");
    return load_alist(f);
}

void save_alist(const ParityCheckMatrix& pcm, std::ostream& out) {
    int max_col = 0, max_row = 0;
    for (const auto& col : pcm.var_neighbors)
        max_col = std::max(max_col, static_cast<int>(col.size()));
    for (const auto& row : pcm.check_neighbors)
        max_row = std::max(max_row, static_cast<int>(row.size()));
    out << pcm.n_bits << ' ' << pcm.n_checks << '\n';
    out << max_col << ' ' << max_row << '\n';
    for (int i = 0; i < pcm.n_bits; ++i)
        out << pcm.var_neighbors[i].size() << (i + 1 < pcm.n_bits ? ' ' : '\n');
    for (int i = 0; i < pcm.n_checks; ++i)
        out << pcm.check_neighbors[i].size() << (i + 1 < pcm.n_checks ? ' ' : '\n');
    auto write_block = [&](const std::vector<int>& entries, int width) {
        for (int i = 0; i < width; ++i) {
            const int v = i < static_cast<int>(entries.size()) ? entries[i] + 1 : 0;
            out << v << (i + 1 < width ? ' ' : '\n');
        }
    };
    for (const auto& col : pcm.var_neighbors) write_block(col, max_col);
    for (const auto& row : pcm.check_neighbors) write_block(row, max_row);
}

std::uint64_t pcm_structure_hash(const ParityCheckMatrix& pcm) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](std::uint64_t v) {
        h ^= v;
        h *= 0x100000001b3ULL;
    };
    mix(static_cast<std::uint64_t>(pcm.n_bits));
    mix(static_cast<std::uint64_t>(pcm.n_checks));
    for (const auto& row : pcm.check_neighbors) {
        mix(row.size());
        for (int v : row) mix(static_cast<std::uint64_t>(v) + 1);
    }
    return h;
}

bool syndrome_ok(const ParityCheckMatrix& pcm, std::span<const std::uint8_t> bits) {
    if (static_cast<int>(bits.size()) != pcm.n_bits)
        throw std::invalid_argument("ldpc: codeword length mismatch");
    for (const auto& row : pcm.check_neighbors) {
        int parity = 0;
        for (int v : row) parity ^= bits[v] & 1;
        if (parity != 0) return false;
    }
    return true;
}

LdpcEncoder LdpcEncoder::build(const ParityCheckMatrix& pcm) {
    const int m = pcm.n_checks;
    const int n = pcm.n_bits;
    const int k = n - m;
    if (k < 1) fail("encoder needs n_bits > n_checks");

    const int words = (n + 63) / 64;
    std::vector<std::vector<std::uint64_t>> rows(m, std::vector<std::uint64_t>(words, 0));
    for (int c = 0; c < m; ++c)
        for (int v : pcm.check_neighbors[c]) rows[c][v >> 6] |= 1ULL << (v & 63);

    // Gauss-Jordan over the trailing parity block; a missing pivot means H is
    // not systematic-form reducible with this column order.
    for (int col = k; col < n; ++col) {
        const int target = col - k;
        const int w = col >> 6;
        const std::uint64_t bit = 1ULL << (col & 63);
        int pivot = -1;
        for (int r = target; r < m; ++r) {
            if (rows[r][w] & bit) {
                pivot = r;
                break;
            }
        }
        if (pivot < 0)
            fail("trailing parity block is singular; H is not reducible to systematic form");
        std::swap(rows[target], rows[pivot]);
        for (int r = 0; r < m; ++r) {
            if (r == target || !(rows[r][w] & bit)) continue;
            for (int ww = 0; ww < words; ++ww) rows[r][ww] ^= rows[target][ww];
        }
    }

    LdpcEncoder enc;
    enc.n_info_ = k;
    enc.n_parity_ = m;
    enc.structure_hash_ = pcm_structure_hash(pcm);
    const int info_words = (k + 63) / 64;
    enc.rows_.assign(m, std::vector<std::uint64_t>(info_words, 0));
    for (int r = 0; r < m; ++r) {
        for (int v = 0; v < k; ++v)
            if (rows[r][v >> 6] & (1ULL << (v & 63))) enc.rows_[r][v >> 6] |= 1ULL << (v & 63);
    }
    return enc;
}

std::vector<std::uint8_t> LdpcEncoder::encode(std::span<const std::uint8_t> info) const {
    if (static_cast<int>(info.size()) != n_info_)
        throw std::invalid_argument("ldpc: info block length mismatch");
    const int info_words = (n_info_ + 63) / 64;
    std::vector<std::uint64_t> packed(info_words, 0);
    for (int i = 0; i < n_info_; ++i)
        if (info[i] & 1) packed[i >> 6] |= 1ULL << (i & 63);

    std::vector<std::uint8_t> cw(n_info_ + n_parity_, 0);
    std::copy(info.begin(), info.end(), cw.begin());
    for (int r = 0; r < n_parity_; ++r) {
        std::uint64_t acc = 0;
        for (int w = 0; w < info_words; ++w) acc ^= rows_[r][w] & packed[w];
        cw[n_info_ + r] = static_cast<std::uint8_t>(__builtin_popcountll(acc) & 1);
    }
    return cw;
}

void LdpcEncoder::save_cache(std::ostream& out) const {
    out << "scma-gen v1\n";
    out << n_info_ << ' ' << n_parity_ << ' ' << std::hex << structure_hash_ << std::dec << '\n';
    static const char* digits = "0123456789abcdef";
    for (const auto& row : rows_) {
        std::string line;
        line.reserve(row.size() * 16);
        for (std::uint64_t w : row)
            for (int nib = 0; nib < 16; ++nib) line.push_back(digits[(w >> (4 * nib)) & 0xf]);
        out << line << '\n';
    }
}

LdpcEncoder LdpcEncoder::load_cache(std::istream& in, const ParityCheckMatrix& pcm) {
    std::string magic, version;
    if (!(in >> magic >> version) || magic != "scma-gen" || version != "v1")
        fail("generator cache: bad header");
    LdpcEncoder enc;
    std::uint64_t hash;
    if (!(in >> enc.n_info_ >> enc.n_parity_ >> std::hex >> hash >> std::dec))
        fail("generator cache: bad dimensions line");
    if (enc.n_info_ + enc.n_parity_ != pcm.n_bits || enc.n_parity_ != pcm.n_checks)
        fail("generator cache: dimensions disagree with the parity-check matrix");
    enc.structure_hash_ = pcm_structure_hash(pcm);
    if (hash != enc.structure_hash_)
        fail("generator cache: structure hash mismatch, regenerate the cache");
    const int info_words = (enc.n_info_ + 63) / 64;
    enc.rows_.assign(enc.n_parity_, std::vector<std::uint64_t>(info_words, 0));
    for (int r = 0; r < enc.n_parity_; ++r) {
        std::string line;
        if (!(in >> line) || static_cast<int>(line.size()) != info_words * 16)
            fail("generator cache: truncated row");
        for (int i = 0; i < info_words * 16; ++i) {
            const char ch = line[i];
            std::uint64_t nib;
            if (ch >= '0' && ch <= '9')
                nib = ch - '0';
            else if (ch >= 'a' && ch <= 'f')
                nib = 10 + (ch - 'a');
            else
                fail("generator cache: invalid hex digit");
            enc.rows_[r][i / 16] |= nib << (4 * (i % 16));
        }
    }
    return enc;
}

LdpcEncoder LdpcEncoder::load_or_build(const std::string& alist_path,
                                       const ParityCheckMatrix& pcm) {
    const std::string cache = alist_path + ".gen";
    std::ifstream f(cache);
    if (f) return load_cache(f, pcm);
    return build(pcm);
}

DecodeResult decode_bp(const ParityCheckMatrix& pcm, std::span<const double> prior,
                       int iterations, const DecodeOptions& opt) {
    if (iterations < 1) throw std::invalid_argument("ldpc: iteration count must be >= 1");
    if (static_cast<int>(prior.size()) != pcm.n_bits)
        throw std::invalid_argument("ldpc: prior length mismatch");
    OpCounters* c = opt.counters;

    const int n = pcm.n_bits;
    // edge layout: check-major, contiguous per check
    std::vector<int> check_offset(pcm.n_checks + 1, 0);
    for (int ci = 0; ci < pcm.n_checks; ++ci)
        check_offset[ci + 1] = check_offset[ci] + static_cast<int>(pcm.check_neighbors[ci].size());
    const int edges = check_offset[pcm.n_checks];
    std::vector<int> edge_var(edges);
    std::vector<std::vector<int>> var_edges(n);
    for (int ci = 0; ci < pcm.n_checks; ++ci) {
        int e = check_offset[ci];
        for (int v : pcm.check_neighbors[ci]) {
            edge_var[e] = v;
            var_edges[v].push_back(e);
            ++e;
        }
    }

    std::vector<double> clipped(n);
    for (int v = 0; v < n; ++v) clipped[v] = clip_llr(prior[v]);

    std::vector<double> v2c(edges), c2v(edges, 0.0);
    for (int v = 0; v < n; ++v)
        for (int e : var_edges[v]) v2c[e] = clipped[v];

    std::vector<double> fwd, bwd, mags;
    std::vector<std::uint8_t> hard(n, 0);
    auto totals_and_hard = [&](std::vector<double>* intrinsic_out,
                               std::vector<double>* total_out) {
        for (int v = 0; v < n; ++v) {
            double s = 0.0;
            for (int e : var_edges[v]) s += c2v[e];
            const double tot = clipped[v] + s;
            hard[v] = tot < 0.0 ? 1 : 0;
            if (intrinsic_out != nullptr) (*intrinsic_out)[v] = s;
            if (total_out != nullptr) (*total_out)[v] = tot;
        }
    };

    int it = 0;
    bool synd = false;
    for (it = 1; it <= iterations; ++it) {
        // check-node updates
        for (int ci = 0; ci < pcm.n_checks; ++ci) {
            const int begin = check_offset[ci];
            const int deg = check_offset[ci + 1] - begin;
            if (opt.min_sum) {
                // two smallest magnitudes and the overall sign carry the rule
                double min1 = kLlrClip + 1, min2 = kLlrClip + 1;
                int arg1 = -1;
                int sign = 1;
                for (int e = begin; e < begin + deg; ++e) {
                    const double m = v2c[e];
                    if (m < 0) sign = -sign;
                    const double a = std::abs(m);
                    if (a < min1) {
                        min2 = min1;
                        min1 = a;
                        arg1 = e;
                    } else if (a < min2) {
                        min2 = a;
                    }
                }
                for (int e = begin; e < begin + deg; ++e) {
                    const int s = v2c[e] < 0 ? -sign : sign;
                    c2v[e] = s * (e == arg1 ? min2 : min1);
                    if (c != nullptr) c->mul += 1;
                }
            } else {
                mags.assign(deg, 0.0);
                for (int i = 0; i < deg; ++i) {
                    mags[i] = std::tanh(0.5 * v2c[begin + i]);
                    if (c != nullptr) c->exp += 1;  // tanh counted as one exponential
                }
                fwd.assign(deg + 1, 1.0);
                bwd.assign(deg + 1, 1.0);
                for (int i = 0; i < deg; ++i) {
                    fwd[i + 1] = fwd[i] * mags[i];
                    if (c != nullptr) c->mul += 1;
                }
                for (int i = deg - 1; i >= 0; --i) {
                    bwd[i] = bwd[i + 1] * mags[i];
                    if (c != nullptr) c->mul += 1;
                }
                for (int i = 0; i < deg; ++i) {
                    const double prod = fwd[i] * bwd[i + 1];
                    if (c != nullptr) {
                        c->mul += 1;
                        c->log += 1;  // atanh counted as one logarithm
                    }
                    c2v[begin + i] = clip_llr(2.0 * std::atanh(prod));
                }
            }
        }
        // variable-node updates
        for (int v = 0; v < n; ++v) {
            double s = clipped[v];
            for (int e : var_edges[v]) s += c2v[e];
            for (int e : var_edges[v]) v2c[e] = clip_llr(s - c2v[e]);
        }
        if (opt.early_exit) {
            totals_and_hard(nullptr, nullptr);
            if (syndrome_ok(pcm, hard)) {
                synd = true;
                break;
            }
        }
    }
    if (it > iterations) it = iterations;

    DecodeResult res;
    res.llr.intrinsic.assign(n, 0.0);
    res.llr.total.assign(n, 0.0);
    totals_and_hard(&res.llr.intrinsic, &res.llr.total);
    res.llr.prior = std::move(clipped);
    res.hard = hard;
    res.syndrome_satisfied = synd || syndrome_ok(pcm, res.hard);
    res.iterations_run = it;
    return res;
}

}  // namespace scma
