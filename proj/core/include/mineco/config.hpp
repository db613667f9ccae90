#pragma once

// Experiment configuration: flat `key = value` text, `#` starts a comment.
// Unknown keys are rejected so typos do not silently fall back to defaults.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "mineco/decoder.hpp"
#include "mineco/mi_estimator.hpp"
#include "mineco/training_snr.hpp"

namespace mineco {

struct EncoderCycle {
    std::size_t batch;       // total batch 2k
    std::size_t iterations;  // encoder ascent steps
    double lr;
};

struct TrainingSchedule {
    std::size_t initial_iterations = 1000;
    std::size_t initial_batch = 200;
    double initial_lr = 0.0005;

    std::vector<EncoderCycle> cycles{{100, 1000, 0.01}, {100, 10000, 0.001}, {1000, 10000, 0.001}};

    std::size_t refreshes_per_cycle = 10;
    std::size_t burst_iterations = 50;
    std::size_t burst_batch = 200;
    double burst_lr = 0.0005;

    bool reset_estimator_adam = false;  // at every refresh burst
    bool reset_encoder_adam = false;    // at every cycle

    bool early_stop = false;
    std::size_t early_stop_window = 500;
    double early_stop_tolerance = 1e-3;

    /// Throws InvalidSpecError on zero counts, nonpositive rates or a refresh
    /// count that does not divide a cycle's iterations.
    void validate() const;
};

enum class TrainingMode { mi, ce_end_to_end };

struct MiSweepProtocol {
    std::size_t refresh_iterations = 1000;
    std::size_t refresh_batch = 200;
    double refresh_lr = 0.0005;
    std::size_t eval_batches = 20;
    std::size_t eval_batch = 2000;
};

struct StoppingRule {
    std::size_t min_errors = 100;
    std::size_t max_symbols = 10'000'000;
};

struct ExperimentConfig {
    std::size_t symbols = 16;
    std::size_t block_length = 1;
    EstimatorKind estimator = EstimatorKind::donsker_varadhan;
    TrainingMode mode = TrainingMode::mi;

    std::size_t tnet_width = 20;
    std::size_t tnet_layers = 2;
    std::vector<std::size_t> encoder_hidden;  // empty -> module default
    std::vector<std::size_t> decoder_hidden;  // empty -> module default

    TrainingSnr train_snr = TrainingSnr::ebn0(7.0, 4.0);
    TrainingSchedule schedule;
    DecoderSchedule decoder_schedule;

    std::vector<double> eval_grid_db{4, 5, 6, 7, 8, 9, 10, 11, 12};
    StoppingRule stopping;
    MiSweepProtocol sweep;
    std::size_t mi_eval_batches = 20;
    std::size_t mi_eval_batch = 2000;

    std::uint64_t seed = 1;
    std::size_t workers = 1;
    std::string out_dir = "out";

    double rate_bits() const;
    /// Throws InvalidSpecError if any field is out of range.
    void validate() const;
};

/// Parses config text. The Eb/N0 rate is taken from `symbols` and `block_length`.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);
/// Canonical text form; parse_config(to_config_text(c)) reproduces c.
std::string to_config_text(const ExperimentConfig& config);

/// "lo:hi:step" or "a,b,c".
std::vector<double> parse_grid(const std::string& text);
std::vector<std::size_t> parse_size_list(const std::string& text);
/// "ebn0:7", "ebn0:10:14", "snr_db:3", "snr:1", "variance:0".
TrainingSnr parse_training_snr(const std::string& text, double rate_bits);
std::string format_training_snr(const TrainingSnr& snr);

}  // namespace mineco
