#include "scma/codebook.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace scma {

namespace {

bool is_power_of_two(int v) { return v > 0 && (v & (v - 1)) == 0; }

int log2_exact(int v) {
    int b = 0;
    while ((1 << b) < v) ++b;
    return b;
}

[[noreturn]] void fail(const std::string& msg) { throw std::runtime_error("codebook: " + msg); }

}  // namespace

int Codebook::bits_per_symbol() const { return log2_exact(num_symbols); }

int Codebook::symbol_index(int user, std::span<const std::uint8_t> bits) const {
    if (static_cast<int>(bits.size()) != bits_per_symbol())
        throw std::invalid_argument("codebook: bit group has wrong length");
    const auto& labels = bit_labels[user];
    for (int m = 0; m < num_symbols; ++m) {
        if (std::equal(bits.begin(), bits.end(), labels[m].begin())) return m;
    }
    fail("no codeword carries the requested bit label");
}

int Codebook::reference_symbol(int user) const {
    const auto& labels = bit_labels[user];
    for (int m = 0; m < num_symbols; ++m) {
        if (std::all_of(labels[m].begin(), labels[m].end(), [](std::uint8_t b) { return b == 0; }))
            return m;
    }
    fail("no all-zeros bit label found");
}

void Codebook::validate() const {
    if (num_users < 1 || num_resources < 1) fail("J and K must be positive");
    if (!is_power_of_two(num_symbols) || num_symbols < 2) fail("M must be a power of two >= 2");
    if (static_cast<int>(codewords.size()) != num_users ||
        static_cast<int>(supports.size()) != num_users ||
        static_cast<int>(bit_labels.size()) != num_users)
        fail("per-user array sizes disagree with J");

    const int bits = bits_per_symbol();
    for (int j = 0; j < num_users; ++j) {
        const auto& sup = supports[j];
        if (sup.empty()) fail("user " + std::to_string(j + 1) + " has empty support");
        if (!std::is_sorted(sup.begin(), sup.end()) ||
            std::adjacent_find(sup.begin(), sup.end()) != sup.end())
            fail("support of user " + std::to_string(j + 1) + " is not strictly ascending");
        if (sup.front() < 0 || sup.back() >= num_resources)
            fail("support of user " + std::to_string(j + 1) + " is out of range");

        if (static_cast<int>(codewords[j].size()) != num_symbols)
            fail("user " + std::to_string(j + 1) + " does not have M codewords");
        double energy = 0.0;
        for (int m = 0; m < num_symbols; ++m) {
            const auto& cw = codewords[j][m];
            if (static_cast<int>(cw.size()) != num_resources)
                fail("codeword dimension mismatch for user " + std::to_string(j + 1));
            auto it = sup.begin();
            for (int k = 0; k < num_resources; ++k) {
                const bool on_support = (it != sup.end() && *it == k);
                if (on_support) ++it;
                if (on_support && cw[k] == cplx(0.0, 0.0))
                    fail("zero entry on the support of user " + std::to_string(j + 1));
                if (!on_support && cw[k] != cplx(0.0, 0.0))
                    fail("codeword " + std::to_string(m) + " of user " + std::to_string(j + 1) +
                         " is nonzero off the declared support");
                energy += std::norm(cw[k]);
            }
        }
        energy /= num_symbols;
        if (std::abs(energy - 1.0) > 1e-9)
            fail("average energy of user " + std::to_string(j + 1) + " is " +
                 std::to_string(energy) + ", expected 1");

        if (static_cast<int>(bit_labels[j].size()) != num_symbols)
            fail("user " + std::to_string(j + 1) + " does not have M bit labels");
        std::vector<int> seen(num_symbols, 0);
        for (int m = 0; m < num_symbols; ++m) {
            const auto& lab = bit_labels[j][m];
            if (static_cast<int>(lab.size()) != bits)
                fail("bit label length mismatch for user " + std::to_string(j + 1));
            int value = 0;
            for (std::uint8_t b : lab) {
                if (b > 1) fail("bit labels must be 0/1");
                value = (value << 1) | b;
            }
            if (seen[value]++)
                fail("bit labels of user " + std::to_string(j + 1) + " are not a bijection");
        }
    }
}

FactorGraph derive_factor_graph(const Codebook& cb) {
    FactorGraph fg;
    fg.indicator.assign(cb.num_resources, std::vector<std::uint8_t>(cb.num_users, 0));
    fg.user_neighbors.assign(cb.num_users, {});
    fg.resource_neighbors.assign(cb.num_resources, {});
    for (int j = 0; j < cb.num_users; ++j) {
        for (int k : cb.supports[j]) {
            fg.indicator[k][j] = 1;
            fg.user_neighbors[j].push_back(k);
            fg.resource_neighbors[k].push_back(j);
        }
    }
    // supports are sorted, so both neighbor lists come out ascending
    bool regular = true;
    const int dj = static_cast<int>(fg.user_neighbors[0].size());
    for (const auto& nb : fg.user_neighbors) regular &= static_cast<int>(nb.size()) == dj;
    const int dk = fg.resource_neighbors.empty()
                       ? 0
                       : static_cast<int>(fg.resource_neighbors[0].size());
    for (const auto& nb : fg.resource_neighbors) regular &= static_cast<int>(nb.size()) == dk;
    fg.regular = regular;
    fg.user_degree = regular ? dj : 0;
    fg.resource_degree = regular ? dk : 0;
    return fg;
}

std::vector<cplx> map_bits(const Codebook& cb, int user, std::span<const std::uint8_t> bits) {
    if (user < 0 || user >= cb.num_users) throw std::invalid_argument("codebook: bad user index");
    return cb.codewords[user][cb.symbol_index(user, bits)];
}

namespace {

// One parsed line: leading keyword plus raw remainder.
struct Line {
    std::string key;
    std::string rest;
};

std::vector<Line> tokenize(std::istream& in) {
    std::vector<Line> lines;
    std::string raw;
    while (std::getline(in, raw)) {
        const auto hash = raw.find('#');
        if (hash != std::string::npos) raw.erase(hash);
        std::istringstream ls(raw);
        Line line;
        if (!(ls >> line.key)) continue;  // blank
        std::getline(ls, line.rest);
        lines.push_back(std::move(line));
    }
    return lines;
}

long long parse_int(const std::string& text, const std::string& what) {
    std::istringstream ss(text);
    long long v;
    if (!(ss >> v)) fail("expected an integer after '" + what + "'");
    std::string extra;
    if (ss >> extra) fail("trailing token '" + extra + "' after '" + what + "'");
    return v;
}

// K complex values written as (re,im) pairs.
std::vector<cplx> parse_codeword(const std::string& text, int k_dims) {
    std::string cleaned = text;
    for (char& c : cleaned)
        if (c == '(' || c == ')' || c == ',') c = ' ';
    std::istringstream ss(cleaned);
    std::vector<cplx> out;
    double re, im;
    while (ss >> re) {
        if (!(ss >> im)) fail("codeword entry missing imaginary part");
        out.emplace_back(re, im);
    }
    if (static_cast<int>(out.size()) != k_dims)
        fail("codeword row has " + std::to_string(out.size()) + " entries, expected " +
             std::to_string(k_dims));
    return out;
}

}  // namespace

Codebook load_codebook(std::istream& in) {
    const auto lines = tokenize(in);
    std::size_t pos = 0;
    auto need = [&](const char* key) -> const Line& {
        if (pos >= lines.size()) fail(std::string("unexpected end of file, expected '") + key + "'");
        const Line& l = lines[pos];
        if (l.key != key) fail("expected '" + std::string(key) + "', found '" + l.key + "'");
        return lines[pos++];
    };

    Codebook cb;
    cb.num_users = static_cast<int>(parse_int(need("J").rest, "J"));
    cb.num_resources = static_cast<int>(parse_int(need("K").rest, "K"));
    cb.num_symbols = static_cast<int>(parse_int(need("M").rest, "M"));
    const int declared_n = static_cast<int>(parse_int(need("N").rest, "N"));
    if (cb.num_users < 1) fail("J must be positive");
    if (!is_power_of_two(cb.num_symbols) || cb.num_symbols < 2)
        fail("M must be a power of two >= 2");

    cb.codewords.resize(cb.num_users);
    cb.supports.resize(cb.num_users);
    cb.bit_labels.resize(cb.num_users);
    const int bits = cb.bits_per_symbol();

    for (int j = 0; j < cb.num_users; ++j) {
        const long long idx = parse_int(need("user").rest, "user");
        if (idx != j + 1) fail("user blocks must appear in order 1..J");

        std::istringstream ss(need("support").rest);
        std::vector<int> sup;
        long long r;
        while (ss >> r) {
            if (r < 1 || r > cb.num_resources) fail("support index out of range");
            sup.push_back(static_cast<int>(r - 1));
        }
        if (declared_n > 0 && static_cast<int>(sup.size()) != declared_n)
            fail("support of user " + std::to_string(j + 1) + " does not have N entries");
        std::sort(sup.begin(), sup.end());
        cb.supports[j] = std::move(sup);

        for (int m = 0; m < cb.num_symbols; ++m)
            cb.codewords[j].push_back(parse_codeword(need("codeword").rest, cb.num_resources));

        for (int m = 0; m < cb.num_symbols; ++m) {
            std::istringstream ls(need("label").rest);
            std::vector<std::uint8_t> lab;
            long long b;
            while (ls >> b) {
                if (b != 0 && b != 1) fail("label bits must be 0/1");
                lab.push_back(static_cast<std::uint8_t>(b));
            }
            if (static_cast<int>(lab.size()) != bits) fail("label row has wrong length");
            cb.bit_labels[j].push_back(std::move(lab));
        }
    }
    if (pos != lines.size()) fail("unknown or extra field '" + lines[pos].key + "'");

    cb.validate();
    return cb;
}

Codebook load_codebook(const std::string& text) {
    std::istringstream ss(text);
    return load_codebook(ss);
}

Codebook load_codebook_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) fail("cannot open '" + path + "'");
    return load_codebook(f);
}

void save_codebook(const Codebook& cb, std::ostream& out) {
    out.precision(17);
    out << "J " << cb.num_users << "\n";
    out << "K " << cb.num_resources << "\n";
    out << "M " << cb.num_symbols << "\n";
    const std::size_t n0 = cb.supports.empty() ? 0 : cb.supports[0].size();
    bool uniform = true;
    for (const auto& s : cb.supports) uniform &= s.size() == n0;
    out << "N " << (uniform ? n0 : 0) << "\n";
    for (int j = 0; j < cb.num_users; ++j) {
        out << "user " << j + 1 << "\n";
        out << "support";
        for (int k : cb.supports[j]) out << ' ' << k + 1;
        out << "\n";
        for (int m = 0; m < cb.num_symbols; ++m) {
            out << "codeword";
            for (const cplx& c : cb.codewords[j][m])
                out << " (" << c.real() << "," << c.imag() << ")";
            out << "\n";
        }
        for (int m = 0; m < cb.num_symbols; ++m) {
            out << "label";
            for (std::uint8_t b : cb.bit_labels[j][m]) out << ' ' << int(b);
            out << "\n";
        }
    }
}

namespace {

cplx qpsk_point(int m) {
    const double angle = std::numbers::pi / 4.0 + m * (std::numbers::pi / 2.0);
    return {std::cos(angle), std::sin(angle)};
}

std::vector<std::vector<std::uint8_t>> natural_labels(int m_count, int bits) {
    std::vector<std::vector<std::uint8_t>> labels(m_count);
    for (int m = 0; m < m_count; ++m) {
        for (int b = bits - 1; b >= 0; --b)
            labels[m].push_back(static_cast<std::uint8_t>((m >> b) & 1));
    }
    return labels;
}

}  // namespace

Codebook make_default_codebook() {
    Codebook cb;
    cb.num_users = 6;
    cb.num_resources = 4;
    cb.num_symbols = 4;
    // Columns of the 4x6 indicator matrix: every pair of resources hosts one user.
    cb.supports = {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}};

    // Occupancy rank of user j on resource k among the three colliding users.
    auto collision_rank = [&](int user, int res) {
        int rank = 0;
        for (int q = 0; q < user; ++q)
            for (int k : cb.supports[q])
                if (k == res) ++rank;
        return rank;
    };

    // 4-PAM mother constellation paired so every codeword has unit energy
    // and any two codewords differ on both occupied dimensions.
    const double amp_a[4] = {-3.0, -1.0, 1.0, 3.0};
    const double amp_b[4] = {-1.0, 3.0, -3.0, 1.0};
    const double scale = 1.0 / std::sqrt(10.0);

    // Power separation: on every resource the three colliding users arrive
    // at three distinct amplitude levels {1, wb, wc}; each user's two levels
    // square-sum to 2, keeping per-user average energy at 1.
    const double wb = std::sqrt(1.5);
    const double wc = std::sqrt(0.5);
    const double edge_weight[6][2] = {{1.0, 1.0}, {wb, wc}, {wc, wb},
                                      {wc, wb},   {wb, wc}, {1.0, 1.0}};

    cb.codewords.resize(6);
    cb.bit_labels.resize(6);
    for (int j = 0; j < 6; ++j) {
        for (int m = 0; m < 4; ++m) {
            std::vector<cplx> cw(4, cplx(0.0, 0.0));
            int dim = 0;
            for (int k : cb.supports[j]) {
                // Colliding users are separated by pi/3 rotations; 4-PAM is
                // pi symmetric so ranks 0..2 stay distinct.
                const double phi = collision_rank(j, k) * (std::numbers::pi / 3.0);
                const cplx rot(std::cos(phi), std::sin(phi));
                cw[k] = scale * edge_weight[j][dim] * (dim == 0 ? amp_a[m] : amp_b[m]) * rot;
                ++dim;
            }
            cb.codewords[j].push_back(std::move(cw));
        }
        cb.bit_labels[j] = natural_labels(4, 2);
    }
    cb.validate();
    return cb;
}

Codebook make_tree_codebook() {
    Codebook cb;
    cb.num_users = 3;
    cb.num_resources = 2;
    cb.num_symbols = 4;
    cb.supports = {{0}, {0, 1}, {1}};
    cb.codewords.resize(3);
    cb.bit_labels.resize(3);
    const double rot_angle[3] = {0.0, std::numbers::pi / 8.0, std::numbers::pi / 5.0};
    for (int j = 0; j < 3; ++j) {
        const cplx rot(std::cos(rot_angle[j]), std::sin(rot_angle[j]));
        const double scale = 1.0 / std::sqrt(static_cast<double>(cb.supports[j].size()));
        for (int m = 0; m < 4; ++m) {
            std::vector<cplx> cw(2, cplx(0.0, 0.0));
            for (int k : cb.supports[j]) cw[k] = scale * rot * qpsk_point(m);
            cb.codewords[j].push_back(std::move(cw));
        }
        cb.bit_labels[j] = natural_labels(4, 2);
    }
    cb.validate();
    return cb;
}

}  // namespace scma
