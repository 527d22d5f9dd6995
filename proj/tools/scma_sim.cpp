#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <exception>
#include <span>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "scma/simulator.hpp"

namespace {

int cmd_sweep(const std::string& config_path, const std::string& out_override, int workers) {
    scma::SimConfig cfg = scma::SimConfig::from_json_file(config_path);
    if (!out_override.empty()) cfg.output = out_override;
    if (workers > 0) cfg.workers = workers;
    const auto results = scma::run_sweep(cfg);
    scma::emit_results(results, cfg.output);
    std::printf("%-9s %-8s %8s %8s %12s %12s %10s\n", "channel", "mode", "es_n0_db", "frames",
                "bit_errors", "ber", "seconds");
    for (const auto& c : results) {
        std::printf("%-9s %-8s %8.2f %8" PRId64 " %12" PRId64 " %12.4e %10.2f\n",
                    c.channel.c_str(), c.mode.c_str(), c.es_n0_db, c.frames, c.bit_errors, c.ber,
                    c.seconds);
    }
    std::printf("wrote %s and %s.plot.py\n", cfg.output.c_str(), cfg.output.c_str());
    return 0;
}

int cmd_oracle_check(const std::string& codebook_path, double es_n0_db, std::int64_t slots,
                     int iterations, std::uint64_t seed) {
    const scma::Codebook cb = codebook_path.empty() ? scma::make_default_codebook()
                                                    : scma::load_codebook_file(codebook_path);
    const scma::FactorGraph fg = scma::derive_factor_graph(cb);

    // cycle-free exactness on the bundled tree fixture
    {
        const scma::Codebook tree = scma::make_tree_codebook();
        const scma::FactorGraph tfg = scma::derive_factor_graph(tree);
        scma::Rng rng(seed);
        double worst = 0.0;
        for (int trial = 0; trial < 20; ++trial) {
            std::vector<int> tx(tree.num_users);
            for (auto& t : tx) t = static_cast<int>(rng.below(tree.num_symbols));
            const auto ch = scma::draw_channel(scma::ChannelModel::awgn, 0.5, tfg, rng);
            const auto y = scma::transmit(tree, tfg, tx, ch, rng);
            const auto belief = scma::detect_prob(tree, tfg, y, ch, nullptr, 4);
            const auto oracle = scma::exact_map_oracle(tree, tfg, y, ch);
            for (int j = 0; j < tree.num_users; ++j)
                for (int m = 0; m < tree.num_symbols; ++m)
                    worst = std::max(worst, std::abs(belief[j][m] - oracle.marginals[j][m]) /
                                                std::max(oracle.marginals[j][m], 1e-300));
        }
        std::printf("tree exactness        max rel err %.3e  %s\n", worst,
                    worst < 1e-9 ? "ok" : "FAIL");
    }

    // paired uncoded comparison against the exhaustive oracle
    const auto cmp =
        scma::run_uncoded_oracle_comparison(cb, fg, es_n0_db, slots, iterations, seed);
    std::printf("uncoded @ %.1f dB      mpa ser %.5f  map ser %.5f  (ci95 +-%.5f, %" PRId64
                " symbols)\n",
                es_n0_db, cmp.mpa_ser, cmp.map_ser, cmp.map_ser_ci95, cmp.user_symbols);
    const bool inside = std::abs(cmp.mpa_ser - cmp.map_ser) <= cmp.map_ser_ci95;
    const bool not_better = cmp.mpa_symbol_errors >= cmp.map_symbol_errors;
    std::printf("uncoded vs oracle     %s\n", (inside && not_better) ? "ok" : "FAIL");
    return (inside && not_better) ? 0 : 1;
}

int cmd_ops_report(const std::string& codebook_path, const std::string& alist_path, int i_t,
                   int i_l, int i_o) {
    const scma::Codebook cb = codebook_path.empty() ? scma::make_default_codebook()
                                                    : scma::load_codebook_file(codebook_path);
    const scma::FactorGraph fg = scma::derive_factor_graph(cb);
    const scma::ParityCheckMatrix pcm = scma::load_alist_file(alist_path);
    scma::IterationSchedule sched{"report", i_t, i_l, i_o};
    const auto pred = scma::predicted_ops(sched, cb, fg, pcm);

    // measure one frame end to end
    const scma::LdpcEncoder enc = scma::LdpcEncoder::load_or_build(alist_path, pcm);
    std::vector<scma::Interleaver> pis;
    for (int j = 0; j < cb.num_users; ++j)
        pis.push_back(scma::make_interleaver(pcm.n_bits, scma::derive_seed(1, j, 0x1eaf)));
    const int B = cb.bits_per_symbol();
    const int slots = pcm.n_bits / B;
    scma::Rng rng(7);
    scma::FrameObservation frame;
    std::vector<std::vector<std::uint8_t>> interleaved(cb.num_users);
    for (int j = 0; j < cb.num_users; ++j) {
        std::vector<std::uint8_t> info(enc.info_bits());
        for (auto& b : info) b = rng.bit();
        const auto coded = enc.encode(info);
        interleaved[j] = scma::interleave(std::span<const std::uint8_t>(coded), pis[j]);
    }
    std::vector<int> symbols(cb.num_users);
    for (int s = 0; s < slots; ++s) {
        for (int j = 0; j < cb.num_users; ++j) {
            const std::span<const std::uint8_t> bits(interleaved[j].data() + s * B, B);
            symbols[j] = cb.symbol_index(j, bits);
        }
        frame.channels.push_back(scma::draw_channel(scma::ChannelModel::awgn,
                                                    scma::es_n0_db_to_n0(6.0), fg, rng));
        frame.y.push_back(scma::transmit(cb, fg, symbols, frame.channels.back(), rng));
    }
    scma::ReceiverComponents comp{&cb, &fg, &pcm, &pis};
    const auto rx = scma::run_receiver(frame, sched, comp);

    const double syms = static_cast<double>(slots) * cb.num_users;
    auto row = [&](const char* name, const scma::StagePrediction& p, const scma::OpCounters& m) {
        std::printf("%-22s %12.1f %12.1f %12.1f %12.1f   predicted/symbol\n", name, p.mul, p.div,
                    p.exp, p.log);
        std::printf("%-22s %12.1f %12.1f %12.1f %12.1f   measured/symbol\n", "",
                    m.mul / syms, m.div / syms, m.exp / syms, m.log / syms);
    };
    std::printf("%-22s %12s %12s %12s %12s\n", "stage", "mul", "div", "exp", "log");
    row("detector (log-domain)", pred.detector_total, rx.diag.detector);
    row("decoder", pred.decoder_total, rx.diag.decoder);
    row("bridge", pred.bridge_total, rx.diag.bridge);

    // probability-domain detector on one slot: the Algorithm-1 operation
    // counts the closed forms model directly
    scma::OpCounters prob;
    scma::DetectorOptions dopt;
    dopt.counters = &prob;
    (void)scma::detect_prob(cb, fg, frame.y[0], frame.channels[0], nullptr, i_t, dopt);
    std::printf("%-22s %12.1f %12.1f %12.1f %12.1f   measured/symbol (prob domain, one slot)\n",
                "detector (Alg. 1)", prob.mul / double(cb.num_users),
                prob.div / double(cb.num_users), prob.exp / double(cb.num_users),
                prob.log / double(cb.num_users));
    const double pred_exp_total = pred.detector_per_inner_iteration.exp * i_t;
    std::printf("detector exp/symbol: predicted %.1f, prob-domain measured %.1f  %s\n",
                pred_exp_total, prob.exp / double(cb.num_users),
                pred_exp_total == prob.exp / double(cb.num_users) ? "(exact)" : "(differs)");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"LDPC-coded SCMA link simulator"};
    app.require_subcommand(1);

    std::string config_path, out_override;
    int workers = 0;
    auto* sweep = app.add_subcommand("sweep", "run a Monte Carlo BER sweep from a JSON config");
    sweep->add_option("-c,--config", config_path, "config file")->required();
    sweep->add_option("-o,--out", out_override, "override the output CSV path");
    sweep->add_option("-w,--workers", workers, "override the worker count");

    std::string codebook_path;
    double es_n0_db = 9.0;
    std::int64_t slots = 2000;
    int iterations = 6;
    std::uint64_t seed = 1;
    auto* oracle =
        app.add_subcommand("oracle-check", "compare the detector against exhaustive oracles");
    oracle->add_option("--codebook", codebook_path, "codebook file (default: built-in)");
    oracle->add_option("--es-n0-db", es_n0_db, "Es/N0 operating point");
    oracle->add_option("--slots", slots, "SCMA symbol intervals to simulate");
    oracle->add_option("-t,--iterations", iterations, "MPA iterations");
    oracle->add_option("--seed", seed, "random seed");

    std::string alist_path;
    int i_t = 2, i_l = 8, i_o = 4;
    auto* ops = app.add_subcommand("ops-report", "predicted vs measured operation counts");
    ops->add_option("--codebook", codebook_path, "codebook file (default: built-in)");
    ops->add_option("--alist", alist_path, "parity-check matrix")->required();
    ops->add_option("--i-t", i_t, "inner detector iterations");
    ops->add_option("--i-l", i_l, "inner decoder iterations");
    ops->add_option("--i-o", i_o, "outer iterations");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sweep->parsed()) return cmd_sweep(config_path, out_override, workers);
        if (oracle->parsed())
            return cmd_oracle_check(codebook_path, es_n0_db, slots, iterations, seed);
        if (ops->parsed()) return cmd_ops_report(codebook_path, alist_path, i_t, i_l, i_o);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
