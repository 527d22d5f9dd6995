#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "scma/receiver.hpp"

namespace scma {

// Full experiment description. Loadable from a JSON file; unknown keys are
// rejected so typos fail loudly.
struct SimConfig {
    std::string codebook_path;
    std::string alist_path;
    std::string generator_cache_path;  // optional; derived from alist_path when empty
    std::vector<std::string> channels = {"awgn"};
    std::vector<double> es_n0_db;
    std::vector<IterationSchedule> modes;
    std::int64_t min_frames = 20;
    std::int64_t min_bit_errors = 100;
    std::int64_t max_frames = 10000;
    std::uint64_t seed = 1;
    std::uint64_t interleaver_seed = 0x5c3a;
    std::string output = "results.csv";
    bool max_log = false;
    bool persist_messages = false;
    bool early_exit = false;
    bool min_sum = false;
    int workers = 1;

    static SimConfig from_json_file(const std::string& path);
    static SimConfig from_json_text(const std::string& text);
    void validate() const;  // throws std::runtime_error
};

struct CellResult {
    std::string channel;
    std::string mode;
    double es_n0_db = 0.0;
    std::int64_t frames = 0;
    std::int64_t info_bits = 0;
    std::int64_t bit_errors = 0;
    std::int64_t frame_errors = 0;
    double ber = 0.0;
    double fer = 0.0;
    OpCounters detector_ops;  // totals over all frames
    OpCounters decoder_ops;
    OpCounters bridge_ops;
    double seconds = 0.0;

    OpCounters mean_ops_per_frame() const;
};

// Monte Carlo sweep over (mode, channel, Es/N0) cells. Frames run in fixed
// deterministic batches; the stopping rule is min_bit_errors AND min_frames,
// capped at max_frames. Identical config + seed gives identical counts for
// any worker count.
std::vector<CellResult> run_sweep(const SimConfig& config);

// CSV (one row per cell) plus a standalone python plot script next to it.
void emit_results(const std::vector<CellResult>& results, const std::string& csv_path);

// The embedded plot script text, for tooling and tests.
const std::string& plot_script_text();

struct StagePrediction {
    double mul = 0.0, div = 0.0, exp = 0.0, log = 0.0;
};

// Closed-form operation counts per transmitted symbol: detector per inner
// iteration, decoder per iteration, bridge per outer iteration, plus the
// totals scaled by the schedule. Regular structures only.
struct PredictedOps {
    StagePrediction detector_per_inner_iteration;
    StagePrediction decoder_per_iteration;
    StagePrediction bridge_per_outer_iteration;
    StagePrediction detector_total;
    StagePrediction decoder_total;
    StagePrediction bridge_total;
};

PredictedOps predicted_ops(const IterationSchedule& sched, const Codebook& cb,
                           const FactorGraph& fg, const ParityCheckMatrix& pcm);

// Uncoded paired comparison of MPA detection against the exhaustive MAP
// oracle on the same noise realizations (AWGN, uniform priors).
struct UncodedComparison {
    std::int64_t slots = 0;
    std::int64_t user_symbols = 0;
    std::int64_t mpa_symbol_errors = 0;
    std::int64_t map_symbol_errors = 0;
    double mpa_ser = 0.0;
    double map_ser = 0.0;
    double map_ser_ci95 = 0.0;  // binomial 95% half-width of the oracle SER
};

UncodedComparison run_uncoded_oracle_comparison(const Codebook& cb, const FactorGraph& fg,
                                                double es_n0_db, std::int64_t slots,
                                                int detector_iterations, std::uint64_t seed);

}  // namespace scma
