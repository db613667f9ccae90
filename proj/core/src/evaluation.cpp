#include "mineco/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "mineco/csv.hpp"
#include "mineco/errors.hpp"
#include "mineco/qam.hpp"
#include "mineco/rng.hpp"
#include "mineco/trainer.hpp"

namespace mineco {

namespace {

/// Runs f(i) for i in [0, n) on up to `workers` threads; rethrows the first failure.
template <typename F>
void parallel_for(std::size_t n, std::size_t workers, F&& f) {
    workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(n, 1));
    if (workers == 1) {
        for (std::size_t i = 0; i < n; ++i) f(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) {
                try {
                    f(i);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

constexpr std::size_t kChunk = 10000;

}  // namespace

BlerPoint simulate_bler(const SignalBatch& codebook, const Detector& detect, double noise_variance,
                        const StoppingRule& stopping, std::uint64_t seed) {
    if (codebook.batch() == 0) throw ShapeError("empty codebook");
    if (stopping.min_errors < 1 || stopping.max_symbols < 1) throw InvalidSpecError("bad stopping rule");
    const std::size_t symbols = codebook.batch();
    const std::size_t n = codebook.length();
    const Eigen::Index width = static_cast<Eigen::Index>(2 * n);
    CounterRng rng(seed);

    BlerPoint p;
    while (p.errors < stopping.min_errors && p.trials < stopping.max_symbols) {
        const std::size_t count = std::min(kChunk, stopping.max_symbols - p.trials);
        std::vector<std::size_t> sent(count);
        Matrix y(static_cast<Eigen::Index>(count), width);
        for (std::size_t i = 0; i < count; ++i) {
            sent[i] = static_cast<std::size_t>(rng.below(symbols));
            y.row(static_cast<Eigen::Index>(i)) = codebook.iq().row(static_cast<Eigen::Index>(sent[i]));
        }
        if (noise_variance > 0.0) y += awgn_noise(count, n, noise_variance, rng);
        const auto decided = detect(SignalBatch(std::move(y)));
        if (decided.size() != count) throw ShapeError("detector returned the wrong number of decisions");
        for (std::size_t i = 0; i < count; ++i) p.errors += decided[i] != sent[i] ? 1 : 0;
        p.trials += count;
    }
    p.bler = static_cast<double>(p.errors) / static_cast<double>(p.trials);
    p.std_error = std::sqrt(p.bler * (1.0 - p.bler) / static_cast<double>(p.trials));
    p.capped = p.errors < stopping.min_errors;
    return p;
}

std::vector<BlerPoint> evaluate_bler(const SignalBatch& codebook, const Detector& detect, double rate_bits,
                                     const std::vector<double>& grid_db, const StoppingRule& stopping,
                                     std::uint64_t seed, std::size_t workers) {
    if (grid_db.empty()) throw InvalidSpecError("empty Eb/N0 grid");
    std::vector<BlerPoint> points(grid_db.size());
    parallel_for(grid_db.size(), workers, [&](std::size_t i) {
        const double sigma2 = noise_variance_from_snr(SnrSpec::ebn0(grid_db[i], rate_bits));
        points[i] = simulate_bler(codebook, detect, sigma2, stopping, derive_seed(seed, i));
        points[i].ebn0_db = grid_db[i];
    });
    return points;
}

std::vector<BlerPoint> evaluate_bler(const Encoder& encoder, const Decoder& decoder,
                                     const std::vector<double>& grid_db, const StoppingRule& stopping,
                                     std::uint64_t seed, std::size_t workers) {
    if (decoder.symbols() != encoder.symbols() || decoder.length() != encoder.length())
        throw ShapeError("decoder and encoder disagree on |M| or n");
    const Detector detect = [&decoder](const SignalBatch& y) { return decoder.detect(y); };
    return evaluate_bler(encoder.constellation(), detect, encoder.rate_bits(), grid_db, stopping, seed, workers);
}

void write_bler_csv(const std::vector<BlerPoint>& points, const std::string& path) {
    CsvWriter csv(path, {"ebn0_db", "bler", "errors", "trials", "stderr", "capped"});
    for (const auto& p : points) csv.row(p.ebn0_db, p.bler, p.errors, p.trials, p.std_error, p.capped);
}

std::vector<BlerPoint> read_bler_csv(const std::string& path) {
    const auto doc = read_csv(path, {"ebn0_db", "bler", "errors", "trials", "stderr", "capped"});
    std::vector<BlerPoint> out;
    for (const auto& r : doc.rows)
        out.push_back({r[0], r[1], static_cast<std::size_t>(r[2]), static_cast<std::size_t>(r[3]), r[4], r[5] != 0.0});
    return out;
}

std::vector<MiSweepRow> mi_sweep(const Encoder& encoder, const StatisticNetwork& tnet, EstimatorKind kind,
                                 const std::vector<double>& grid_db, const MiSweepProtocol& protocol,
                                 std::uint64_t seed, std::size_t workers) {
    if (grid_db.empty()) throw InvalidSpecError("empty Eb/N0 grid");
    std::vector<MiSweepRow> rows(grid_db.size());
    parallel_for(grid_db.size(), workers, [&](std::size_t i) {
        StatisticNetwork local = tnet;
        CounterRng rng(derive_seed(seed, i));
        const auto snr = TrainingSnr::ebn0(grid_db[i], encoder.rate_bits());
        auto source = encoder_sample_source(encoder, snr, rng);
        if (protocol.refresh_iterations > 0) {
            auto fit = train_statistic_network(local, source, protocol.refresh_iterations, protocol.refresh_batch,
                                               protocol.refresh_lr, kind);
            if (fit.abort_reason) throw NanAbortError("MI sweep refresh " + *fit.abort_reason);
        }
        const auto s = evaluate_mi(kind, local, source, protocol.eval_batches, protocol.eval_batch);
        rows[i] = {encoder.symbols(), grid_db[i], s.mean_bits, s.stderr_bits};
    });
    return rows;
}

void write_mi_sweep_csv(const std::vector<MiSweepRow>& rows, const std::string& path) {
    CsvWriter csv(path, {"symbols", "ebn0_db", "mi_bits", "stderr"});
    for (const auto& r : rows) csv.row(r.symbols, r.ebn0_db, r.mi_bits, r.std_error);
}

std::vector<MiSweepRow> read_mi_sweep_csv(const std::string& path) {
    const auto doc = read_csv(path, {"symbols", "ebn0_db", "mi_bits", "stderr"});
    std::vector<MiSweepRow> out;
    for (const auto& r : doc.rows) out.push_back({static_cast<std::size_t>(r[0]), r[1], r[2], r[3]});
    return out;
}

std::vector<QamBaselineRow> qam_baseline(std::size_t order, const std::vector<double>& grid_db,
                                         const StoppingRule& stopping, std::uint64_t seed, std::size_t workers) {
    const auto table = qam_table(order);
    const double rate = std::log2(static_cast<double>(order));
    const Detector detect = [&table](const SignalBatch& y) { return qam_detect(y, table); };
    const auto sim = evaluate_bler(table.as_signal(), detect, rate, grid_db, stopping, seed, workers);
    std::vector<QamBaselineRow> rows;
    for (std::size_t i = 0; i < grid_db.size(); ++i) {
        const double sigma2 = noise_variance_from_snr(SnrSpec::ebn0(grid_db[i], rate));
        rows.push_back({grid_db[i], qam_ser_theoretical(order, sigma2), sim[i]});
    }
    return rows;
}

void write_qam_baseline_csv(const std::vector<QamBaselineRow>& rows, const std::string& path) {
    CsvWriter csv(path, {"ebn0_db", "ser_theory", "ser_sim", "errors", "trials", "stderr", "capped"});
    for (const auto& r : rows)
        csv.row(r.ebn0_db, r.ser_theory, r.simulated.bler, r.simulated.errors, r.simulated.trials,
                r.simulated.std_error, r.simulated.capped);
}

double qam_ebn0_for_ser(std::size_t order, double ser) {
    const double rate = std::log2(static_cast<double>(order));
    const auto ser_at = [&](double db) {
        return qam_ser_theoretical(order, noise_variance_from_snr(SnrSpec::ebn0(db, rate)));
    };
    double lo = -20.0, hi = 40.0;
    if (ser >= ser_at(lo)) return lo;
    if (ser <= ser_at(hi)) return hi;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (ser_at(mid) > ser) lo = mid;
        else hi = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace mineco
