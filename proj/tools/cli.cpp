#include "cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>

#include <CLI11.hpp>

#include "mineco/config.hpp"
#include "mineco/csv.hpp"
#include "mineco/errors.hpp"
#include "mineco/evaluation.hpp"
#include "mineco/trainer.hpp"

namespace mineco {

namespace {

namespace fs = std::filesystem;

constexpr const char* kOutEnv = "MINECO_OUT_DIR";

struct CommonOptions {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out;
};

ExperimentConfig resolve_config(const CommonOptions& o) {
    ExperimentConfig c = o.config_path.empty() ? parse_config("") : load_config(o.config_path);
    if (o.seed) c.seed = *o.seed;
    if (!o.out.empty()) c.out_dir = o.out;
    else if (const char* env = std::getenv(kOutEnv); env && *env) c.out_dir = env;
    return c;
}

std::string in_dir(const std::string& dir, const std::string& name) { return (fs::path(dir) / name).string(); }

/// Default Eb/N0 training ranges (dB) for the larger message sets.
TrainingSnr sweep_training_snr(const ExperimentConfig& base, std::size_t symbols) {
    const double rate = std::log2(static_cast<double>(symbols)) / static_cast<double>(base.block_length);
    static const std::map<std::size_t, std::pair<double, double>> ranges{
        {16, {10.0, 14.0}}, {32, {14.0, 18.0}}, {64, {17.0, 21.0}}};
    if (const auto it = ranges.find(symbols); it != ranges.end())
        return TrainingSnr::ebn0_range(it->second.first, it->second.second, rate);
    TrainingSnr s = base.train_snr;
    s.rate = rate;
    return s;
}

int cmd_train(const ExperimentConfig& c) {
    auto sys = train_full_system(c);
    save_system(sys, c, c.out_dir);
    std::cout << "trained |M|=" << c.symbols << " n=" << c.block_length << ": MI "
              << format_number(sys.report.final_estimate.bits) << " bits (stderr "
              << format_number(sys.report.final_stderr_bits) << "), outputs in " << c.out_dir << "\n";
    return kExitOk;
}

int cmd_eval_bler(const ExperimentConfig& c, const std::string& run_dir) {
    const auto dir = run_dir.empty() ? c.out_dir : run_dir;
    auto sys = load_system(dir, c.block_length);
    const auto points = evaluate_bler(sys.encoder, sys.decoder, c.eval_grid_db, c.stopping,
                                      derive_seed(c.seed, 7), c.workers);
    fs::create_directories(c.out_dir);
    write_bler_csv(points, in_dir(c.out_dir, "bler.csv"));
    const auto table = sys.encoder.constellation();
    std::cout << "wrote " << in_dir(c.out_dir, "bler.csv") << " (" << points.size()
              << " points; worst per-codeword power " << format_number(table.max_codeword_power()) << ")\n";
    return kExitOk;
}

int cmd_constellation(const ExperimentConfig& c, const std::string& run_dir) {
    const auto dir = run_dir.empty() ? c.out_dir : run_dir;
    auto enc = Encoder::from_network(checkpoint_read_file(in_dir(dir, "encoder.ckpt")), c.block_length);
    fs::create_directories(c.out_dir);
    write_constellation_csv(enc.constellation_table(), in_dir(c.out_dir, "constellation.csv"));
    std::cout << "wrote " << in_dir(c.out_dir, "constellation.csv") << "\n";
    return kExitOk;
}

int cmd_mi_sweep(const ExperimentConfig& c, const std::string& run_dir, const std::string& symbols_text,
                 const std::string& grid_text) {
    const auto grid = grid_text.empty() ? c.eval_grid_db : parse_grid(grid_text);
    std::vector<MiSweepRow> rows;
    if (!run_dir.empty()) {
        auto sys = load_system(run_dir, c.block_length);
        rows = mi_sweep(sys.encoder, sys.tnet, c.estimator, grid, c.sweep, derive_seed(c.seed, 8), c.workers);
    } else {
        auto symbols = parse_size_list(symbols_text.empty() ? "16,32,64" : symbols_text);
        for (std::size_t i = 0; i < symbols.size(); ++i) {
            ExperimentConfig sc = c;
            sc.symbols = symbols[i];
            sc.train_snr = sweep_training_snr(c, symbols[i]);
            sc.validate();
            const auto master = derive_seed(c.seed, 1000 + symbols[i]);
            auto enc = Encoder::create({sc.symbols, sc.block_length, 0, sc.encoder_hidden},
                                       derive_seed(master, seed_offset::encoder_init));
            auto tnet = StatisticNetwork::create(sc.block_length, sc.tnet_width,
                                                 derive_seed(master, seed_offset::tnet_init), sc.tnet_layers);
            const auto report = train_encoder_mi(enc, tnet, sc.train_snr, sc.schedule, master,
                                                 {sc.estimator, sc.mi_eval_batches, sc.mi_eval_batch});
            if (report.abort_reason) throw NanAbortError(*report.abort_reason);
            const auto part = mi_sweep(enc, tnet, sc.estimator, grid, sc.sweep, derive_seed(master, 8), sc.workers);
            rows.insert(rows.end(), part.begin(), part.end());
            std::cout << "|M|=" << symbols[i] << " trained at " << format_training_snr(sc.train_snr) << "\n";
        }
    }
    fs::create_directories(c.out_dir);
    write_mi_sweep_csv(rows, in_dir(c.out_dir, "mi_sweep.csv"));
    std::cout << "wrote " << in_dir(c.out_dir, "mi_sweep.csv") << " (" << rows.size() << " rows)\n";
    return kExitOk;
}

int cmd_baseline_qam(const ExperimentConfig& c, std::size_t order, const std::string& grid_text,
                     const std::string& out_flag) {
    const auto grid = grid_text.empty() ? c.eval_grid_db : parse_grid(grid_text);
    const auto rows = qam_baseline(order, grid, c.stopping, derive_seed(c.seed, 9), c.workers);
    // `--out x.csv` names the file directly; anything else is a directory.
    std::string path;
    if (fs::path(out_flag).extension() == ".csv") {
        path = out_flag;
        if (fs::path(path).has_parent_path()) fs::create_directories(fs::path(path).parent_path());
    } else {
        fs::create_directories(c.out_dir);
        path = in_dir(c.out_dir, "baseline_qam.csv");
    }
    write_qam_baseline_csv(rows, path);
    std::cout << "wrote " << path << "\n";
    return kExitOk;
}

int cmd_estimator_bench(const ExperimentConfig& c, const std::string& nodes_text) {
    const auto nodes = parse_size_list(nodes_text.empty() ? "2,4,6,8,10,12,14,16,18,20" : nodes_text);
    if (nodes.empty()) throw InvalidSpecError("--nodes is empty");
    fs::create_directories(c.out_dir);
    CsvWriter summary(in_dir(c.out_dir, "estimator_bench.csv"), {"nodes", "mi_bits", "stderr"});
    for (auto w : nodes) {
        if (w == 0) throw InvalidSpecError("node count must be >= 1");
        auto enc = Encoder::create({c.symbols, c.block_length, 0, c.encoder_hidden},
                                   derive_seed(c.seed, seed_offset::encoder_init));
        auto tnet = StatisticNetwork::create(c.block_length, w, derive_seed(c.seed, seed_offset::tnet_init),
                                             c.tnet_layers);
        const auto report = train_encoder_mi(enc, tnet, c.train_snr, c.schedule, c.seed,
                                             {c.estimator, c.mi_eval_batches, c.mi_eval_batch});
        if (report.abort_reason) throw NanAbortError(*report.abort_reason);
        write_constellation_csv(enc.constellation_table(),
                                in_dir(c.out_dir, "constellation_nodes" + std::to_string(w) + ".csv"));
        summary.row(w, report.final_estimate.bits, report.final_stderr_bits);
        std::cout << "nodes=" << w << " MI " << format_number(report.final_estimate.bits) << " bits\n";
    }
    return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
    CLI::App app{"Mutual-information channel-encoder training and evaluation"};
    app.require_subcommand(1);

    CommonOptions common;
    std::uint64_t seed_value = 0;
    app.add_option("--config", common.config_path, "Config file (key = value)");
    auto* seed_opt = app.add_option("--seed", seed_value, "Master seed");
    app.add_option("--out", common.out, "Output directory (or CSV path for baseline-qam)");

    auto* train = app.add_subcommand("train", "Train encoder, statistic network and decoder");
    auto* eval = app.add_subcommand("eval-bler", "Monte-Carlo block error rate of a trained system");
    auto* sweep = app.add_subcommand("mi-sweep", "Mutual-information estimates over an Eb/N0 grid");
    auto* constel = app.add_subcommand("constellation", "Export a trained encoder's constellation");
    auto* qam = app.add_subcommand("baseline-qam", "Closed-form and simulated M-QAM symbol error rate");
    auto* bench = app.add_subcommand("estimator-bench", "Train with several statistic-network widths");
    for (auto* sub : {train, eval, sweep, constel, qam, bench}) sub->fallthrough();

    std::string run_dir, symbols_text, grid_text, nodes_text;
    std::size_t order = 16;
    for (auto* sub : {eval, sweep, constel}) sub->add_option("--run", run_dir, "Directory holding checkpoints");
    sweep->add_option("--symbols", symbols_text, "Comma-separated message-set sizes");
    sweep->add_option("--grid", grid_text, "Eb/N0 grid, lo:hi:step or a,b,c");
    qam->add_option("--order", order, "QAM order (4, 16, 64)");
    qam->add_option("--grid", grid_text, "Eb/N0 grid, lo:hi:step or a,b,c");
    bench->add_option("--nodes", nodes_text, "Comma-separated hidden widths");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        std::cout << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n\n" << app.help();
        return kExitUsage;
    }
    if (*seed_opt) common.seed = seed_value;

    try {
        const auto config = resolve_config(common);
        if (*train) return cmd_train(config);
        if (*eval) return cmd_eval_bler(config, run_dir);
        if (*sweep) return cmd_mi_sweep(config, run_dir, symbols_text, grid_text);
        if (*constel) return cmd_constellation(config, run_dir);
        if (*qam) return cmd_baseline_qam(config, order, grid_text, common.out);
        if (*bench) return cmd_estimator_bench(config, nodes_text);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFailure;
    }
    return kExitUsage;
}

int run_cli(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return run_cli(args);
}

}  // namespace mineco
