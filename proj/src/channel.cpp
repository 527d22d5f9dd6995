#include "scma/channel.hpp"

#include <cmath>
#include <stdexcept>

namespace scma {

ChannelModel channel_model_from_string(const std::string& s) {
    if (s == "awgn") return ChannelModel::awgn;
    if (s == "rayleigh" || s == "rayleigh-iid") return ChannelModel::rayleigh_iid;
    throw std::runtime_error("channel: unsupported model '" + s + "'");
}

std::string to_string(ChannelModel m) {
    return m == ChannelModel::awgn ? "awgn" : "rayleigh";
}

double es_n0_db_to_n0(double es_n0_db) { return std::pow(10.0, -es_n0_db / 10.0); }

double n0_to_es_n0_db(double n0) { return -10.0 * std::log10(n0); }

ChannelRealization draw_channel(ChannelModel model, double n0, const FactorGraph& fg, Rng& rng) {
    ChannelRealization ch;
    ch.model = model;
    ch.n0 = n0;
    const int K = fg.num_resources();
    const int J = fg.num_users();
    ch.gains.assign(K, std::vector<cplx>(J, cplx(1.0, 0.0)));
    if (model == ChannelModel::rayleigh_iid) {
        const double s = 1.0 / std::sqrt(2.0);  // E|h|^2 = 1
        for (int k = 0; k < K; ++k)
            for (int j : fg.resource_neighbors[k])
                ch.gains[k][j] = cplx(s * rng.normal(), s * rng.normal());
    }
    return ch;
}

std::vector<cplx> transmit(const Codebook& cb, const FactorGraph& fg,
                           std::span<const int> symbols, const ChannelRealization& ch,
                           Rng& rng) {
    if (static_cast<int>(symbols.size()) != cb.num_users)
        throw std::invalid_argument("transmit: one symbol index per user required");
    const int K = cb.num_resources;
    std::vector<cplx> y(K, cplx(0.0, 0.0));
    for (int k = 0; k < K; ++k) {
        for (int j : fg.resource_neighbors[k])
            y[k] += ch.gains[k][j] * cb.codewords[j][symbols[j]][k];
    }
    const double s = std::sqrt(ch.n0 / 2.0);
    for (int k = 0; k < K; ++k) y[k] += cplx(s * rng.normal(), s * rng.normal());
    return y;
}

}  // namespace scma
