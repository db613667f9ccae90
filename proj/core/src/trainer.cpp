#include "mineco/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <numeric>
#include <sstream>

#include "mineco/csv.hpp"
#include "mineco/errors.hpp"

namespace mineco {

std::vector<double> TrainingReport::encoder_trace_nats() const {
    std::vector<double> all;
    for (const auto& p : phases) all.insert(all.end(), p.encoder_nats.begin(), p.encoder_nats.end());
    return all;
}

std::vector<double> TrainingReport::running_max_bits() const {
    auto trace = encoder_trace_nats();
    double best = -std::numeric_limits<double>::infinity();
    for (auto& v : trace) {
        best = std::max(best, v / std::numbers::ln2);
        v = best;
    }
    return trace;
}

namespace {

std::vector<std::size_t> uniform_messages(CounterRng& rng, std::size_t count, std::size_t symbols) {
    std::vector<std::size_t> m(count);
    for (auto& v : m) v = static_cast<std::size_t>(rng.below(symbols));
    return m;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

SampleSource encoder_sample_source(const Encoder& encoder, const TrainingSnr& snr, CounterRng& rng,
                                   const double* progress) {
    return [&encoder, snr, &rng, progress](std::size_t batch_2k) {
        const auto msgs = uniform_messages(rng, batch_2k, encoder.symbols());
        auto x = encoder.encode(msgs).signal;
        const double sigma2 = snr.sample(rng, progress ? *progress : 1.0);
        Matrix y = x.iq() + awgn_noise(batch_2k, encoder.length(), sigma2, rng);
        return std::pair<Matrix, Matrix>{x.iq(), std::move(y)};
    };
}

double encoder_ascent_step(Encoder& encoder, const StatisticNetwork& tnet, AdamState& encoder_adam,
                           EstimatorKind kind, std::size_t batch_2k, double noise_variance, CounterRng& rng) {
    const auto msgs = uniform_messages(rng, batch_2k, encoder.symbols());
    const auto enc = encoder.encode(msgs);
    const Matrix y = enc.signal.iq() + awgn_noise(batch_2k, encoder.length(), noise_variance, rng);
    const auto eval = estimate(kind, tnet, split_joint_marginal(enc.signal.iq(), y));
    const auto g = estimator_gradients(tnet, eval);
    // y = x + z with z held fixed: both cotangents land on x.
    const Matrix dx = g.x_cotangent + g.y_cotangent;
    auto grads = encoder.backward(enc, dx);
    grads *= -1.0;
    encoder_adam.step(encoder.network(), grads);
    return eval.estimate.nats;
}

TrainingReport train_encoder_mi(Encoder& encoder, StatisticNetwork& tnet, const TrainingSnr& snr,
                                const TrainingSchedule& schedule, std::uint64_t master_seed,
                                const MiTrainingOptions& options) {
    schedule.validate();
    snr.validate();
    if (tnet.length() != encoder.length()) throw ShapeError("statistic network and encoder disagree on n");

    TrainingReport report;
    report.seeds["master"] = master_seed;
    double progress = 0.0;
    std::size_t total_encoder_steps = 0;
    for (const auto& c : schedule.cycles) total_encoder_steps += c.iterations;

    AdamState tnet_adam(tnet.network(), schedule.initial_lr);

    // Phase 1: fit T on the initialised encoder.
    {
        const auto seed = derive_seed(master_seed, seed_offset::initial_phase);
        report.seeds["initial_phase"] = seed;
        CounterRng rng(seed);
        const auto t0 = std::chrono::steady_clock::now();
        auto source = encoder_sample_source(encoder, snr, rng, &progress);
        auto result = train_statistic_network(tnet, source, schedule.initial_iterations, schedule.initial_batch,
                                              schedule.initial_lr, options.kind, &tnet_adam);
        PhaseTrace phase{"initial", {}, std::move(result.trace_nats), seconds_since(t0)};
        report.phases.push_back(std::move(phase));
        if (result.abort_reason) {
            report.abort_reason = "initial phase " + *result.abort_reason;
            return report;
        }
    }

    // Phase 2: alternate encoder ascent blocks and T refresh bursts.
    AdamState encoder_adam(encoder.network(), schedule.cycles.empty() ? 1e-3 : schedule.cycles.front().lr);
    std::size_t steps_done = 0;
    std::vector<double> window_means;
    for (std::size_t ci = 0; ci < schedule.cycles.size() && !report.early_stopped; ++ci) {
        const auto& cycle = schedule.cycles[ci];
        const auto seed = derive_seed(master_seed, seed_offset::cycle_base + ci);
        report.seeds["cycle" + std::to_string(ci + 1)] = seed;
        CounterRng rng(seed);
        const auto t0 = std::chrono::steady_clock::now();
        PhaseTrace phase{"cycle" + std::to_string(ci + 1), {}, {}, 0.0};
        phase.encoder_nats.reserve(cycle.iterations);

        if (schedule.reset_encoder_adam) encoder_adam.reset();
        encoder_adam.set_learning_rate(cycle.lr);
        const std::size_t block = cycle.iterations / schedule.refreshes_per_cycle;
        auto source = encoder_sample_source(encoder, snr, rng, &progress);

        try {
            for (std::size_t r = 0; r < schedule.refreshes_per_cycle && !report.early_stopped; ++r) {
                for (std::size_t i = 0; i < block; ++i) {
                    progress = total_encoder_steps ? static_cast<double>(steps_done) / total_encoder_steps : 1.0;
                    const double sigma2 = snr.sample(rng, progress);
                    phase.encoder_nats.push_back(encoder_ascent_step(encoder, tnet, encoder_adam, options.kind,
                                                                     cycle.batch, sigma2, rng));
                    ++steps_done;
                    if (schedule.early_stop && steps_done % schedule.early_stop_window == 0) {
                        auto all = report.encoder_trace_nats();
                        all.insert(all.end(), phase.encoder_nats.begin(), phase.encoder_nats.end());
                        const auto w = schedule.early_stop_window;
                        window_means.push_back(
                            std::accumulate(all.end() - static_cast<std::ptrdiff_t>(w), all.end(), 0.0) /
                            static_cast<double>(w));
                        if (window_means.size() >= 2) {
                            const double prev = window_means[window_means.size() - 2];
                            const double gain = (window_means.back() - prev) / std::max(std::abs(prev), 1e-12);
                            if (gain < schedule.early_stop_tolerance) report.early_stopped = true;
                        }
                    }
                    if (report.early_stopped) break;
                }
                if (schedule.reset_estimator_adam) tnet_adam.reset();
                auto burst = train_statistic_network(tnet, source, schedule.burst_iterations, schedule.burst_batch,
                                                     schedule.burst_lr, options.kind, &tnet_adam);
                phase.estimator_nats.insert(phase.estimator_nats.end(), burst.trace_nats.begin(),
                                            burst.trace_nats.end());
                if (burst.abort_reason) throw NanAbortError("refresh burst " + *burst.abort_reason);
            }
        } catch (const NanAbortError& e) {
            phase.wall_seconds = seconds_since(t0);
            report.phases.push_back(std::move(phase));
            report.abort_reason = report.phases.back().name + ": " + e.what();
            return report;
        }
        phase.wall_seconds = seconds_since(t0);
        report.phases.push_back(std::move(phase));
    }

    CounterRng eval_rng(derive_seed(master_seed, seed_offset::final_evaluation));
    report.seeds["final_evaluation"] = derive_seed(master_seed, seed_offset::final_evaluation);
    progress = 1.0;
    auto eval_source = encoder_sample_source(encoder, snr, eval_rng, &progress);
    const auto summary = evaluate_mi(options.kind, tnet, eval_source, options.eval_batches, options.eval_batch);
    report.final_estimate = MiEstimate::from_nats(summary.mean_nats, options.kind, options.eval_batch / 2);
    report.final_stderr_bits = summary.stderr_bits;
    return report;
}

TrainedSystem train_full_system(const ExperimentConfig& config) {
    config.validate();
    const auto master = config.seed;
    EncoderConfig ec{config.symbols, config.block_length, 0, config.encoder_hidden};
    DecoderConfig dc{config.symbols, config.block_length, config.decoder_hidden};
    TrainedSystem sys{
        Encoder::create(ec, derive_seed(master, seed_offset::encoder_init)),
        StatisticNetwork::create(config.block_length, config.tnet_width, derive_seed(master, seed_offset::tnet_init),
                                 config.tnet_layers),
        Decoder::create(dc, derive_seed(master, seed_offset::decoder_init)),
        {},
        {}};
    const MiTrainingOptions opts{config.estimator, config.mi_eval_batches, config.mi_eval_batch};

    if (config.mode == TrainingMode::mi) {
        sys.report = train_encoder_mi(sys.encoder, sys.tnet, config.train_snr, config.schedule, master, opts);
        if (sys.report.abort_reason) throw NanAbortError(*sys.report.abort_reason);
        sys.decoder_training = train_decoder(sys.decoder, sys.encoder, config.train_snr, config.decoder_schedule,
                                             derive_seed(master, seed_offset::decoder_training));
    } else {
        sys.decoder_training = train_end_to_end_ce(sys.encoder, sys.decoder, config.train_snr,
                                                   config.decoder_schedule,
                                                   derive_seed(master, seed_offset::decoder_training));
        if (sys.decoder_training.abort_reason) throw NanAbortError(*sys.decoder_training.abort_reason);
        // Fit T on the CE-trained encoder so both modes report an MI estimate.
        auto fit = config.schedule;
        fit.cycles.clear();
        sys.report = train_encoder_mi(sys.encoder, sys.tnet, config.train_snr, fit, master, opts);
    }
    if (sys.decoder_training.abort_reason) throw NanAbortError(*sys.decoder_training.abort_reason);
    return sys;
}

std::string format_report(const TrainingReport& r) {
    std::ostringstream o;
    o << "[final]\n"
      << "estimator = " << to_string(r.final_estimate.kind) << "\n"
      << "mi_nats = " << format_number(r.final_estimate.nats) << "\n"
      << "mi_bits = " << format_number(r.final_estimate.bits) << "\n"
      << "stderr_bits = " << format_number(r.final_stderr_bits) << "\n"
      << "eval_k = " << r.final_estimate.k << "\n"
      << "early_stopped = " << (r.early_stopped ? "true" : "false") << "\n"
      << "aborted = " << (r.abort_reason ? *r.abort_reason : std::string("false")) << "\n";
    const auto running = r.running_max_bits();
    o << "running_max_bits = " << (running.empty() ? std::string("nan") : format_number(running.back())) << "\n";
    o << "\n[seeds]\n";
    for (const auto& [k, v] : r.seeds) o << k << " = " << v << "\n";
    for (const auto& p : r.phases) {
        o << "\n[phase." << p.name << "]\n"
          << "encoder_steps = " << p.encoder_nats.size() << "\n"
          << "estimator_steps = " << p.estimator_nats.size() << "\n"
          << "wall_seconds = " << format_number(p.wall_seconds) << "\n";
        if (!p.encoder_nats.empty())
            o << "last_encoder_bits = " << format_number(p.encoder_nats.back() / std::numbers::ln2) << "\n";
        if (!p.estimator_nats.empty())
            o << "last_estimator_bits = " << format_number(p.estimator_nats.back() / std::numbers::ln2) << "\n";
    }
    o << "\n[checkpoints]\n";
    for (std::size_t i = 0; i < r.checkpoints.size(); ++i) o << "file" << i << " = " << r.checkpoints[i] << "\n";
    return o.str();
}

void save_system(const TrainedSystem& sys, const ExperimentConfig& config, const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    const auto path = [&](const char* name) { return (fs::path(dir) / name).string(); };
    checkpoint_write_file(sys.encoder.network(), path("encoder.ckpt"));
    checkpoint_write_file(sys.tnet.network(), path("tnet.ckpt"));
    checkpoint_write_file(sys.decoder.network(), path("decoder.ckpt"));

    TrainingReport report = sys.report;
    report.checkpoints = {"encoder.ckpt", "tnet.ckpt", "decoder.ckpt"};
    std::ofstream(path("report.txt")) << format_report(report);

    // Phase-1 estimator trace followed by the encoder-step trace of every cycle.
    std::vector<double> trace;
    for (const auto& p : report.phases) {
        const auto& src = p.name == "initial" ? p.estimator_nats : p.encoder_nats;
        trace.insert(trace.end(), src.begin(), src.end());
    }
    write_value_trace_csv(trace, path("mi_trace.csv"));
    write_loss_trace_csv(sys.decoder_training.loss_trace, path("decoder_loss.csv"));
    write_constellation_csv(sys.encoder.constellation_table(), path("constellation.csv"));
    std::ofstream(path("config.txt")) << to_config_text(config);
}

LoadedSystem load_system(const std::string& dir, std::size_t block_length) {
    namespace fs = std::filesystem;
    const auto path = [&](const char* name) { return (fs::path(dir) / name).string(); };
    return {Encoder::from_network(checkpoint_read_file(path("encoder.ckpt")), block_length),
            StatisticNetwork::from_network(checkpoint_read_file(path("tnet.ckpt"))),
            Decoder::from_network(checkpoint_read_file(path("decoder.ckpt")), block_length)};
}

}  // namespace mineco
