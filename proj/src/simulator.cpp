#include "scma/simulator.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "json.hpp"

namespace scma {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw std::runtime_error("simulator: " + msg); }

// Frames are processed in fixed-size batches and the stopping rule is
// evaluated only at batch boundaries, so every worker count visits the same
// set of frame indices.
constexpr std::int64_t kBatchFrames = 16;

}  // namespace

SimConfig SimConfig::from_json_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) fail("cannot open config '" + path + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    return from_json_text(ss.str());
}

SimConfig SimConfig::from_json_text(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const std::exception& e) {
        fail(std::string("config is not valid JSON: ") + e.what());
    }

    static const char* known[] = {"codebook",      "alist",         "generator_cache",
                                  "channels",      "es_n0_db",      "modes",
                                  "min_frames",    "min_bit_errors", "max_frames",
                                  "seed",          "interleaver_seed", "output",
                                  "max_log",       "persist_messages", "early_exit",
                                  "min_sum",       "workers"};
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (std::find_if(std::begin(known), std::end(known),
                         [&](const char* k) { return it.key() == k; }) == std::end(known))
            fail("unknown config field '" + it.key() + "'");
    }

    SimConfig c;
    try {
        c.codebook_path = j.at("codebook").get<std::string>();
        c.alist_path = j.at("alist").get<std::string>();
        if (j.contains("generator_cache"))
            c.generator_cache_path = j["generator_cache"].get<std::string>();
        if (j.contains("channels")) c.channels = j["channels"].get<std::vector<std::string>>();
        c.es_n0_db = j.at("es_n0_db").get<std::vector<double>>();
        c.modes.clear();
        for (const auto& mj : j.at("modes")) {
            for (auto it = mj.begin(); it != mj.end(); ++it) {
                if (it.key() != "name" && it.key() != "i_t" && it.key() != "i_l" &&
                    it.key() != "i_o")
                    fail("unknown mode field '" + it.key() + "'");
            }
            IterationSchedule s;
            s.name = mj.at("name").get<std::string>();
            s.inner_detector = mj.at("i_t").get<int>();
            s.inner_decoder = mj.at("i_l").get<int>();
            s.outer = mj.at("i_o").get<int>();
            c.modes.push_back(std::move(s));
        }
        if (j.contains("min_frames")) c.min_frames = j["min_frames"].get<std::int64_t>();
        if (j.contains("min_bit_errors"))
            c.min_bit_errors = j["min_bit_errors"].get<std::int64_t>();
        if (j.contains("max_frames")) c.max_frames = j["max_frames"].get<std::int64_t>();
        if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
        if (j.contains("interleaver_seed"))
            c.interleaver_seed = j["interleaver_seed"].get<std::uint64_t>();
        if (j.contains("output")) c.output = j["output"].get<std::string>();
        if (j.contains("max_log")) c.max_log = j["max_log"].get<bool>();
        if (j.contains("persist_messages"))
            c.persist_messages = j["persist_messages"].get<bool>();
        if (j.contains("early_exit")) c.early_exit = j["early_exit"].get<bool>();
        if (j.contains("min_sum")) c.min_sum = j["min_sum"].get<bool>();
        if (j.contains("workers")) c.workers = j["workers"].get<int>();
    } catch (const nlohmann::json::exception& e) {
        fail(std::string("bad config field: ") + e.what());
    }
    c.validate();
    return c;
}

void SimConfig::validate() const {
    if (codebook_path.empty()) fail("codebook path missing");
    if (alist_path.empty()) fail("alist path missing");
    if (es_n0_db.empty()) fail("es_n0_db grid is empty");
    if (modes.empty()) fail("no modes configured");
    for (const auto& m : modes) m.validate();
    if (channels.empty()) fail("no channels configured");
    for (const auto& ch : channels) channel_model_from_string(ch);
    if (min_frames < 1) fail("min_frames must be >= 1");
    if (min_bit_errors < 0) fail("min_bit_errors must be >= 0");
    if (max_frames < min_frames) fail("max_frames must be >= min_frames");
    if (workers < 1) fail("workers must be >= 1");
}

OpCounters CellResult::mean_ops_per_frame() const {
    OpCounters mean;
    if (frames == 0) return mean;
    const OpCounters total = detector_ops + decoder_ops + bridge_ops;
    mean.mul = total.mul / frames;
    mean.div = total.div / frames;
    mean.exp = total.exp / frames;
    mean.log = total.log / frames;
    return mean;
}

namespace {

struct SweepContext {
    const SimConfig* config;
    Codebook codebook;
    FactorGraph graph;
    ParityCheckMatrix pcm;
    LdpcEncoder encoder;
    std::vector<Interleaver> interleavers;
};

struct FrameStats {
    std::int64_t bit_errors = 0;
    std::int64_t frame_error = 0;
    OpCounters detector, decoder, bridge;
};

FrameStats simulate_frame(const SweepContext& ctx, ChannelModel model, double n0,
                          const IterationSchedule& sched, std::uint64_t cell_id,
                          std::int64_t frame_idx) {
    const SimConfig& cfg = *ctx.config;
    const Codebook& cb = ctx.codebook;
    const int J = cb.num_users;
    const int B = cb.bits_per_symbol();
    const int m_bits = ctx.pcm.n_bits;
    const int n_info = ctx.encoder.info_bits();
    const int slots = m_bits / B;

    Rng rng(derive_seed(cfg.seed, cell_id, static_cast<std::uint64_t>(frame_idx)));

    std::vector<std::vector<std::uint8_t>> info(J);
    std::vector<std::vector<std::uint8_t>> interleaved(J);
    for (int j = 0; j < J; ++j) {
        info[j].resize(n_info);
        for (auto& b : info[j]) b = rng.bit() ? 1 : 0;
        const auto coded = ctx.encoder.encode(info[j]);
        interleaved[j] =
            interleave(std::span<const std::uint8_t>(coded), ctx.interleavers[j]);
    }

    FrameObservation frame;
    frame.y.reserve(slots);
    frame.channels.reserve(slots);
    std::vector<int> symbols(J);
    for (int s = 0; s < slots; ++s) {
        for (int j = 0; j < J; ++j) {
            const std::span<const std::uint8_t> bits(interleaved[j].data() + s * B, B);
            symbols[j] = cb.symbol_index(j, bits);
        }
        frame.channels.push_back(draw_channel(model, n0, ctx.graph, rng));
        frame.y.push_back(transmit(cb, ctx.graph, symbols, frame.channels.back(), rng));
    }

    ReceiverComponents comp;
    comp.codebook = &cb;
    comp.graph = &ctx.graph;
    comp.pcm = &ctx.pcm;
    comp.interleavers = &ctx.interleavers;
    ReceiverOptions opt;
    opt.max_log = cfg.max_log;
    opt.persist_messages = cfg.persist_messages;
    opt.early_exit = cfg.early_exit;
    opt.min_sum = cfg.min_sum;
    const ReceiverResult rx = run_receiver(frame, sched, comp, opt);

    FrameStats st;
    st.detector = rx.diag.detector;
    st.decoder = rx.diag.decoder;
    st.bridge = rx.diag.bridge;
    for (int j = 0; j < J; ++j) {
        for (int i = 0; i < n_info; ++i)
            if (rx.info_bits[j][i] != info[j][i]) ++st.bit_errors;
    }
    st.frame_error = st.bit_errors > 0 ? 1 : 0;
    return st;
}

void warn_if_not_monotone(const std::vector<CellResult>& results) {
    for (std::size_t i = 0; i + 1 < results.size(); ++i) {
        const CellResult& a = results[i];
        const CellResult& b = results[i + 1];
        if (a.channel != b.channel || a.mode != b.mode) continue;
        if (b.es_n0_db <= a.es_n0_db) continue;
        const double sd_a = std::sqrt(std::max(a.ber, 1e-12) / std::max<double>(a.info_bits, 1));
        const double sd_b = std::sqrt(std::max(b.ber, 1e-12) / std::max<double>(b.info_bits, 1));
        if (b.ber > a.ber + 2.0 * (sd_a + sd_b)) {
            std::cerr << "warning: BER not monotone for " << a.channel << "/" << a.mode << " at "
                      << b.es_n0_db << " dB (" << a.ber << " -> " << b.ber << ")\n";
        }
    }
}

}  // namespace

std::vector<CellResult> run_sweep(const SimConfig& config) {
    config.validate();

    SweepContext ctx;
    ctx.config = &config;
    ctx.codebook = load_codebook_file(config.codebook_path);
    ctx.graph = derive_factor_graph(ctx.codebook);
    ctx.pcm = load_alist_file(config.alist_path);
    if (!config.generator_cache_path.empty()) {
        std::ifstream f(config.generator_cache_path);
        if (!f) fail("cannot open generator cache '" + config.generator_cache_path + "'");
        ctx.encoder = LdpcEncoder::load_cache(f, ctx.pcm);
    } else {
        ctx.encoder = LdpcEncoder::load_or_build(config.alist_path, ctx.pcm);
    }
    if (ctx.pcm.n_bits % ctx.codebook.bits_per_symbol() != 0)
        fail("code length is not divisible by bits per symbol");
    for (int j = 0; j < ctx.codebook.num_users; ++j)
        ctx.interleavers.push_back(make_interleaver(
            ctx.pcm.n_bits, derive_seed(config.interleaver_seed, static_cast<std::uint64_t>(j),
                                        0x1eafULL)));

    const std::int64_t info_bits_per_frame =
        static_cast<std::int64_t>(ctx.encoder.info_bits()) * ctx.codebook.num_users;

    std::vector<CellResult> results;
    std::uint64_t cell_id = 0;
    for (const auto& mode : config.modes) {
        for (const auto& chan_name : config.channels) {
            const ChannelModel model = channel_model_from_string(chan_name);
            for (double snr : config.es_n0_db) {
                const double n0 = es_n0_db_to_n0(snr);
                CellResult cell;
                cell.channel = to_string(model);
                cell.mode = mode.name;
                cell.es_n0_db = snr;

                const auto t0 = std::chrono::steady_clock::now();
                std::int64_t next_frame = 0;
                while (true) {
                    const bool have_minimum = cell.frames >= config.min_frames &&
                                              cell.bit_errors >= config.min_bit_errors;
                    if (have_minimum || cell.frames >= config.max_frames) break;
                    const std::int64_t batch =
                        std::min(kBatchFrames, config.max_frames - cell.frames);
                    const int nw = static_cast<int>(
                        std::min<std::int64_t>(config.workers, batch));
                    std::vector<FrameStats> stats(batch);
                    if (nw <= 1) {
                        for (std::int64_t f = 0; f < batch; ++f)
                            stats[f] =
                                simulate_frame(ctx, model, n0, mode, cell_id, next_frame + f);
                    } else {
                        std::vector<std::thread> pool;
                        pool.reserve(nw);
                        for (int w = 0; w < nw; ++w) {
                            pool.emplace_back([&, w] {
                                for (std::int64_t f = w; f < batch; f += nw)
                                    stats[f] = simulate_frame(ctx, model, n0, mode, cell_id,
                                                              next_frame + f);
                            });
                        }
                        for (auto& th : pool) th.join();
                    }
                    for (const FrameStats& st : stats) {
                        cell.bit_errors += st.bit_errors;
                        cell.frame_errors += st.frame_error;
                        cell.detector_ops += st.detector;
                        cell.decoder_ops += st.decoder;
                        cell.bridge_ops += st.bridge;
                    }
                    cell.frames += batch;
                    next_frame += batch;
                }
                cell.info_bits = cell.frames * info_bits_per_frame;
                cell.ber = cell.info_bits > 0
                               ? static_cast<double>(cell.bit_errors) / cell.info_bits
                               : 0.0;
                cell.fer =
                    cell.frames > 0 ? static_cast<double>(cell.frame_errors) / cell.frames : 0.0;
                cell.seconds =
                    std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
                results.push_back(std::move(cell));
                ++cell_id;
            }
        }
    }
    warn_if_not_monotone(results);
    return results;
}

namespace {

const char* const kPlotScript = R"PY(#!/usr/bin/env python3
"""Semilog BER curves from a sweep CSV (one curve per channel/mode pair)."""
import argparse
import csv
from collections import defaultdict

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("csv", help="results CSV produced by the sweep")
    ap.add_argument("-o", "--out", default=None, help="output image (default: <csv>.png)")
    args = ap.parse_args()

    curves = defaultdict(list)
    with open(args.csv) as f:
        for row in csv.DictReader(f):
            key = (row["channel"], row["mode"])
            curves[key].append((float(row["es_n0_db"]), float(row["ber"])))

    fig, ax = plt.subplots(figsize=(7, 5))
    for (channel, mode), pts in sorted(curves.items()):
        pts.sort()
        xs = [p[0] for p in pts]
        ys = [max(p[1], 1e-12) for p in pts]
        ax.semilogy(xs, ys, marker="o", label=f"{channel}/{mode}")
    ax.set_xlabel("Es/N0 (dB)")
    ax.set_ylabel("BER")
    ax.grid(True, which="both", alpha=0.4)
    ax.legend()
    out = args.out or args.csv + ".png"
    fig.tight_layout()
    fig.savefig(out, dpi=150)
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
)PY";

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

}  // namespace

const std::string& plot_script_text() {
    static const std::string text = kPlotScript;
    return text;
}

void emit_results(const std::vector<CellResult>& results, const std::string& csv_path) {
    if (results.empty()) fail("no results to emit");
    std::ofstream out(csv_path);
    if (!out) fail("cannot write '" + csv_path + "'");
    out << "channel,mode,es_n0_db,frames,bits,bit_errors,ber,fer,"
           "ops_mul,ops_div,ops_exp,ops_log,seconds\n";
    for (const CellResult& c : results) {
        const OpCounters mean = c.mean_ops_per_frame();
        out << c.channel << ',' << c.mode << ',' << format_double(c.es_n0_db) << ',' << c.frames
            << ',' << c.info_bits << ',' << c.bit_errors << ',' << format_double(c.ber) << ','
            << format_double(c.fer) << ',' << mean.mul << ',' << mean.div << ',' << mean.exp
            << ',' << mean.log << ',' << format_double(c.seconds) << '\n';
    }
    out.close();

    const std::string script_path = csv_path + ".plot.py";
    std::ofstream script(script_path);
    if (!script) fail("cannot write '" + script_path + "'");
    script << kPlotScript;
}

PredictedOps predicted_ops(const IterationSchedule& sched, const Codebook& cb,
                           const FactorGraph& fg, const ParityCheckMatrix& pcm) {
    // hypothetical zero-iteration schedules are allowed here: they predict zero
    if (sched.inner_detector < 0 || sched.inner_decoder < 0 || sched.outer < 0)
        throw std::invalid_argument("predicted_ops: negative iteration counts");
    if (!fg.regular || !pcm.regular)
        throw std::invalid_argument("predicted_ops: regular structures required");
    const double J = cb.num_users;
    const double K = cb.num_resources;
    const double M = cb.num_symbols;
    const double dk = fg.resource_degree;
    const double P = pcm.var_degree;
    const double B = cb.bits_per_symbol();
    const double m_pow = std::pow(M, dk);

    PredictedOps p;
    p.detector_per_inner_iteration.mul = (2.0 * dk * K * m_pow + 4.0 * dk * dk * K * M) / J;
    p.detector_per_inner_iteration.div = dk * K * m_pow / J;
    p.detector_per_inner_iteration.exp = dk * K * m_pow / J;
    p.detector_per_inner_iteration.log = K * M * dk / J;

    p.decoder_per_iteration.mul = (11.0 * P - 9.0) * B;
    p.decoder_per_iteration.div = (P + 1.0) * B;

    p.bridge_per_outer_iteration.exp = M * B;
    p.bridge_per_outer_iteration.log = 2.0 * B;

    const double det_iters = static_cast<double>(sched.outer) * sched.inner_detector;
    const double dec_iters = static_cast<double>(sched.outer) * sched.inner_decoder;
    auto scale = [](const StagePrediction& s, double f) {
        return StagePrediction{s.mul * f, s.div * f, s.exp * f, s.log * f};
    };
    p.detector_total = scale(p.detector_per_inner_iteration, det_iters);
    p.decoder_total = scale(p.decoder_per_iteration, dec_iters);
    p.bridge_total = scale(p.bridge_per_outer_iteration, static_cast<double>(sched.outer));
    return p;
}

UncodedComparison run_uncoded_oracle_comparison(const Codebook& cb, const FactorGraph& fg,
                                                double es_n0_db, std::int64_t slots,
                                                int detector_iterations, std::uint64_t seed) {
    const double n0 = es_n0_db_to_n0(es_n0_db);
    const int J = cb.num_users;
    const int M = cb.num_symbols;

    UncodedComparison cmp;
    cmp.slots = slots;
    cmp.user_symbols = slots * J;

    std::vector<int> tx(J);
    for (std::int64_t s = 0; s < slots; ++s) {
        Rng rng(derive_seed(seed, 0x0dacULL, static_cast<std::uint64_t>(s)));
        for (int j = 0; j < J; ++j) tx[j] = static_cast<int>(rng.below(M));
        const auto ch = draw_channel(ChannelModel::awgn, n0, fg, rng);
        const auto y = transmit(cb, fg, tx, ch, rng);

        const SymbolLlr det = detect_log(cb, fg, y, ch, nullptr, detector_iterations);
        const OracleResult oracle = exact_map_oracle(cb, fg, y, ch);
        for (int j = 0; j < J; ++j) {
            int mpa_arg = 0;
            for (int m = 1; m < M; ++m)
                if (det.total[j][m] > det.total[j][mpa_arg]) mpa_arg = m;
            if (mpa_arg != tx[j]) ++cmp.mpa_symbol_errors;
            if (oracle.marginal_map[j] != tx[j]) ++cmp.map_symbol_errors;
        }
    }
    cmp.mpa_ser = static_cast<double>(cmp.mpa_symbol_errors) / cmp.user_symbols;
    cmp.map_ser = static_cast<double>(cmp.map_symbol_errors) / cmp.user_symbols;
    cmp.map_ser_ci95 =
        1.96 * std::sqrt(std::max(cmp.map_ser * (1.0 - cmp.map_ser), 1e-12) /
                         static_cast<double>(cmp.user_symbols));
    return cmp;
}

}  // namespace scma
