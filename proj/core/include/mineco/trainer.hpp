#pragma once

// Encoder training by ascent on the estimated mutual information.
//
// Phase 1 fits the statistic network T on samples from the freshly
// initialised (frozen) encoder. Phase 2 runs the encoder cycles: each cycle
// is split into `refreshes_per_cycle` blocks of encoder ascent steps with T
// frozen, and every block is followed by a refresh burst that re-fits T with
// the encoder frozen. Channel noise enters as an additive constant, so the
// gradient reaches the encoder through y = x + z via x only.
//
// Sub-seeds are derived from the master seed with derive_seed(master, o):
//   o = 1 encoder init, 2 statistic network init, 3 decoder init,
//   4 phase-1 samples, 5 decoder training, 6 final MI evaluation,
//   100 + c samples of encoder cycle c.

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mineco/config.hpp"
#include "mineco/decoder.hpp"
#include "mineco/encoder.hpp"
#include "mineco/mi_estimator.hpp"
#include "mineco/training_snr.hpp"

namespace mineco {

namespace seed_offset {
inline constexpr std::uint64_t encoder_init = 1;
inline constexpr std::uint64_t tnet_init = 2;
inline constexpr std::uint64_t decoder_init = 3;
inline constexpr std::uint64_t initial_phase = 4;
inline constexpr std::uint64_t decoder_training = 5;
inline constexpr std::uint64_t final_evaluation = 6;
inline constexpr std::uint64_t cycle_base = 100;
}  // namespace seed_offset

struct PhaseTrace {
    std::string name;
    std::vector<double> encoder_nats;    // one value per encoder ascent step
    std::vector<double> estimator_nats;  // one value per T update
    double wall_seconds = 0.0;
};

struct TrainingReport {
    std::vector<PhaseTrace> phases;
    MiEstimate final_estimate;
    double final_stderr_bits = 0.0;
    std::map<std::string, std::uint64_t> seeds;
    std::vector<std::string> checkpoints;
    std::optional<std::string> abort_reason;
    bool early_stopped = false;

    /// Encoder-step values of every phase-2 cycle, concatenated.
    std::vector<double> encoder_trace_nats() const;
    /// Running maximum (bits) of the phase-2 encoder trace.
    std::vector<double> running_max_bits() const;
};

/// Samples for T from a frozen encoder: uniform messages, batch power
/// normalisation, AWGN at the per-batch training SNR.
SampleSource encoder_sample_source(const Encoder& encoder, const TrainingSnr& snr, CounterRng& rng,
                                   const double* progress = nullptr);

struct MiTrainingOptions {
    EstimatorKind kind = EstimatorKind::donsker_varadhan;
    std::size_t eval_batches = 20;
    std::size_t eval_batch = 2000;
};

/// Runs both phases. On a NaN abort the models keep their last good state and
/// the report carries the reason and the traces so far.
TrainingReport train_encoder_mi(Encoder& encoder, StatisticNetwork& tnet, const TrainingSnr& snr,
                                const TrainingSchedule& schedule, std::uint64_t master_seed,
                                const MiTrainingOptions& options = {});

/// One Adam ascent step over the encoder weights with T frozen. Returns the
/// estimator value (nats) before the step.
double encoder_ascent_step(Encoder& encoder, const StatisticNetwork& tnet, AdamState& encoder_adam,
                           EstimatorKind kind, std::size_t batch_2k, double noise_variance,
                           CounterRng& rng);

struct TrainedSystem {
    Encoder encoder;
    StatisticNetwork tnet;
    Decoder decoder;
    TrainingReport report;
    DecoderTrainingResult decoder_training;
};

/// Encoder training (MI ascent, or joint CE when mode = ce_end_to_end),
/// then decoder training on the frozen encoder.
TrainedSystem train_full_system(const ExperimentConfig& config);

/// Writes encoder.ckpt, tnet.ckpt, decoder.ckpt, report.txt, mi_trace.csv,
/// decoder_loss.csv, constellation.csv and config.txt into `dir`.
void save_system(const TrainedSystem& system, const ExperimentConfig& config, const std::string& dir);

struct LoadedSystem {
    Encoder encoder;
    StatisticNetwork tnet;
    Decoder decoder;
};
LoadedSystem load_system(const std::string& dir, std::size_t block_length);

/// Structured text: `[section]` headers followed by `key = value` lines.
std::string format_report(const TrainingReport& report);

}  // namespace mineco
