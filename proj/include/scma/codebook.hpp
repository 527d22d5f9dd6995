#pragma once

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace scma {

using cplx = std::complex<double>;

// Per-user mapping from log2(M)-bit groups to K-dimensional sparse codewords.
// All codewords of a user share one nonzero support, and the average codeword
// energy per user is 1, which makes Es/N0 the per-user symbol SNR.
struct Codebook {
    int num_users = 0;      // J
    int num_resources = 0;  // K
    int num_symbols = 0;    // M, a power of two

    // codewords[j][m]: K-dimensional complex vector, zeros off the support.
    std::vector<std::vector<std::vector<cplx>>> codewords;
    // supports[j]: sorted 0-based resource indices carrying user j's signal.
    std::vector<std::vector<int>> supports;
    // bit_labels[j][m]: log2(M) bits, most significant first.
    std::vector<std::vector<std::vector<std::uint8_t>>> bit_labels;

    int bits_per_symbol() const;

    // Index of the codeword of `user` whose bit label equals `bits`.
    int symbol_index(int user, std::span<const std::uint8_t> bits) const;

    // Index of the all-zeros-label codeword; the fixed reference point for
    // symbol LLRs.
    int reference_symbol(int user) const;

    // Throws std::runtime_error on any structural invariant violation.
    void validate() const;
};

struct FactorGraph {
    // indicator[k][j] = 1 iff resource k is in user j's support.
    std::vector<std::vector<std::uint8_t>> indicator;
    std::vector<std::vector<int>> user_neighbors;      // per user: resources, ascending
    std::vector<std::vector<int>> resource_neighbors;  // per resource: users, ascending
    bool regular = false;
    int user_degree = 0;      // d_j when regular, else 0
    int resource_degree = 0;  // d_k when regular, else 0

    int num_users() const { return user_neighbors.empty() ? 0 : static_cast<int>(user_neighbors.size()); }
    int num_resources() const { return static_cast<int>(resource_neighbors.size()); }
};

// Codebook text file: `J/K/M/N` header then per-user `user / support /
// codeword x M / label x M` blocks. Unknown keys are rejected. `N 0` declares
// per-user support sizes (irregular file); otherwise every support must have
// exactly N entries.
Codebook load_codebook(std::istream& in);
Codebook load_codebook(const std::string& text);
Codebook load_codebook_file(const std::string& path);
void save_codebook(const Codebook& cb, std::ostream& out);

FactorGraph derive_factor_graph(const Codebook& cb);

// Codeword selected by a log2(M)-bit group (most significant bit first).
std::vector<cplx> map_bits(const Codebook& cb, int user, std::span<const std::uint8_t> bits);

// The bundled J=6/K=4/M=4/N=2 codebook: supports are the six resource pairs
// of the classic 4x6 indicator matrix, QPSK mother constellation, and users
// colliding on a resource separated by phase rotations.
Codebook make_default_codebook();

// Cycle-free desk fixture: 3 users and 2 resources forming a path graph;
// message passing is exact on it.
Codebook make_tree_codebook();

}  // namespace scma
