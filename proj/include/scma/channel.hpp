#pragma once

#include <span>
#include <string>

#include "scma/codebook.hpp"
#include "scma/rng.hpp"

namespace scma {

enum class ChannelModel { awgn, rayleigh_iid };

ChannelModel channel_model_from_string(const std::string& s);
std::string to_string(ChannelModel m);

struct ChannelRealization {
    ChannelModel model = ChannelModel::awgn;
    double n0 = 1.0;  // total complex noise variance per resource
    // gains[k][j]; only entries on factor-graph edges are meaningful.
    std::vector<std::vector<cplx>> gains;
};

// Es/N0 in dB <-> linear N0 under the unit symbol-energy convention (Es = 1).
double es_n0_db_to_n0(double es_n0_db);
double n0_to_es_n0_db(double n0);

// Fresh fading draw for one SCMA symbol interval. AWGN pins every edge gain
// to 1; rayleigh_iid draws CN(0,1) independently per edge.
ChannelRealization draw_channel(ChannelModel model, double n0, const FactorGraph& fg, Rng& rng);

// y_k = sum_{j in dk} h_kj x_kj + n_k with n_k ~ CN(0, N0), variance split
// evenly between real and imaginary parts.
std::vector<cplx> transmit(const Codebook& cb, const FactorGraph& fg,
                           std::span<const int> symbols, const ChannelRealization& ch,
                           Rng& rng);

}  // namespace scma
