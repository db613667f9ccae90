#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "mineco/channel.hpp"
#include "mineco/config.hpp"
#include "mineco/decoder.hpp"
#include "mineco/encoder.hpp"
#include "mineco/mi_estimator.hpp"

namespace mineco {

struct BlerPoint {
    double ebn0_db = 0.0;
    double bler = 0.0;
    std::size_t errors = 0;
    std::size_t trials = 0;
    double std_error = 0.0;  // sqrt(P (1 - P) / trials)
    bool capped = false;  // max-symbol cap reached before min errors
};

/// Hard decisions for a batch of received blocks.
using Detector = std::function<std::vector<std::size_t>(const SignalBatch&)>;

/// Monte-Carlo block error rate at one noise level. Codewords come from the
/// fixed table `codebook` ([|M| x 2n], one row per message); messages are
/// uniform. Runs until `min_errors` errors or `max_symbols` trials.
BlerPoint simulate_bler(const SignalBatch& codebook, const Detector& detect, double noise_variance,
                        const StoppingRule& stopping, std::uint64_t seed);

/// One point per grid entry (Eb/N0 dB at rate `rate_bits`). Point i uses the
/// stream derive_seed(seed, i), so results do not depend on `workers`.
std::vector<BlerPoint> evaluate_bler(const SignalBatch& codebook, const Detector& detect, double rate_bits,
                                     const std::vector<double>& grid_db, const StoppingRule& stopping,
                                     std::uint64_t seed, std::size_t workers = 1);

/// Encoder/decoder convenience overload; the codebook is the encoder's constellation table.
std::vector<BlerPoint> evaluate_bler(const Encoder& encoder, const Decoder& decoder,
                                     const std::vector<double>& grid_db, const StoppingRule& stopping,
                                     std::uint64_t seed, std::size_t workers = 1);

/// CSV `ebn0_db,bler,errors,trials,stderr,capped`.
void write_bler_csv(const std::vector<BlerPoint>& points, const std::string& path);
std::vector<BlerPoint> read_bler_csv(const std::string& path);

struct MiSweepRow {
    std::size_t symbols = 0;
    double ebn0_db = 0.0;
    double mi_bits = 0.0;
    double std_error = 0.0;
};

/// At each grid point a copy of `tnet` is refreshed at that SNR, then the
/// estimator is averaged over the protocol's evaluation batches.
std::vector<MiSweepRow> mi_sweep(const Encoder& encoder, const StatisticNetwork& tnet, EstimatorKind kind,
                                 const std::vector<double>& grid_db, const MiSweepProtocol& protocol,
                                 std::uint64_t seed, std::size_t workers = 1);

/// CSV `symbols,ebn0_db,mi_bits,stderr`.
void write_mi_sweep_csv(const std::vector<MiSweepRow>& rows, const std::string& path);
std::vector<MiSweepRow> read_mi_sweep_csv(const std::string& path);

struct QamBaselineRow {
    double ebn0_db = 0.0;
    double ser_theory = 0.0;
    BlerPoint simulated;
};

/// Closed-form and simulated SER of square M-QAM over the grid.
std::vector<QamBaselineRow> qam_baseline(std::size_t order, const std::vector<double>& grid_db,
                                         const StoppingRule& stopping, std::uint64_t seed,
                                         std::size_t workers = 1);

/// CSV `ebn0_db,ser_theory,ser_sim,errors,trials,stderr,capped`.
void write_qam_baseline_csv(const std::vector<QamBaselineRow>& rows, const std::string& path);

/// Eb/N0 (dB) at which the closed-form M-QAM SER equals `ser`, found by bisection on [-20, 40] dB.
double qam_ebn0_for_ser(std::size_t order, double ser);

}  // namespace mineco
