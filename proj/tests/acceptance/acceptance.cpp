// Runs every acceptance check and prints one PASS/FAIL line per check.
// Usage: mineco_acceptance [--out DIR] [--only N[,N...]]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "mineco/channel.hpp"
#include "mineco/csv.hpp"
#include "mineco/decoder.hpp"
#include "mineco/evaluation.hpp"
#include "mineco/mi_estimator.hpp"
#include "mineco/qam.hpp"
#include "mineco/trainer.hpp"
#include "oracles.hpp"

using namespace mineco;
namespace fs = std::filesystem;
namespace oracle = mineco::testing;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(double v, int digits = 4) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Matrix normal_matrix(Eigen::Index rows, Eigen::Index cols, CounterRng& rng, double sd = 1.0) {
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = sd * rng.normal();
    return m;
}

std::vector<double> to_vec(const Matrix& m) { return {m.data(), m.data() + m.size()}; }

int cli(std::vector<std::string> args) {
    const int rc = run_cli(args);
    if (rc != kExitOk) throw std::runtime_error("mineco " + args.front() + " exited with " + std::to_string(rc));
    return rc;
}

// Default-config 16-message system under master seed 1, trained and
// evaluated once per invocation and shared by the checks that need it.
fs::path trained_system16(const fs::path& out) {
    static bool fresh = false;
    const auto run = out / "system16";
    if (!fresh) {
        fs::remove_all(run);
        cli({"train", "--seed", "1", "--out", run.string()});
        cli({"eval-bler", "--seed", "1", "--out", run.string(), "--run", run.string()});
        fresh = true;
    }
    return run;
}

// ---------------------------------------------------------------------------

Outcome gradient_correctness() {
    CounterRng rng(20240101);
    double worst = 0.0;
    int checked = 0;
    const double h = 1e-6;

    for (int t = 0; t < 25; ++t, ++checked) {
        const std::size_t in = 1 + rng.below(6);
        const std::vector<LayerSpec> spec{{2 + rng.below(12), Activation::relu},
                                          {2 + rng.below(12), Activation::relu},
                                          {1 + rng.below(4), Activation::linear}};
        auto net = DenseNetwork::create(in, spec, std::nullopt, InitScheme::glorot(), rng.next_u64());
        net.set_parameters(oracle::jittered(net.parameters().flatten(), rng.next_u64()));
        const Matrix x = normal_matrix(1 + rng.below(8), static_cast<Eigen::Index>(in), rng);
        const Matrix w = normal_matrix(x.rows(), static_cast<Eigen::Index>(net.output_width()), rng);
        const auto g = net.backward(net.forward(x).tape, w).grads.flatten();
        const auto n = oracle::central_difference(
            [&](const std::vector<double>& p) {
                DenseNetwork c = net;
                c.set_parameters(p);
                return (c.forward(x).output.array() * w.array()).sum();
            },
            net.parameters().flatten(), h);
        worst = std::max(worst, oracle::relative_error(g, n));
    }
    for (int t = 0; t < 25; ++t, ++checked) {
        const std::size_t m = 2 + rng.below(31), len = 1 + rng.below(3);
        auto enc = Encoder::create({m, len, 0, {4 + rng.below(12)}}, rng.next_u64());
        enc.network().set_parameters(oracle::jittered(enc.network().parameters().flatten(), rng.next_u64()));
        std::vector<std::size_t> msgs(2 + rng.below(10));
        for (auto& v : msgs) v = rng.below(m);
        const Matrix w = normal_matrix(static_cast<Eigen::Index>(msgs.size()), static_cast<Eigen::Index>(2 * len), rng);
        const auto g = enc.backward(enc.encode(msgs), w).flatten();
        const auto n = oracle::central_difference(
            [&](const std::vector<double>& p) {
                Encoder c = enc;
                c.network().set_parameters(p);
                return (c.encode(msgs).signal.iq().array() * w.array()).sum();
            },
            enc.network().parameters().flatten(), h);
        worst = std::max(worst, oracle::relative_error(g, n));
    }
    for (int t = 0; t < 25; ++t, ++checked) {
        const auto kind = t % 2 ? EstimatorKind::f_divergence : EstimatorKind::donsker_varadhan;
        auto tnet = StatisticNetwork::create(1 + rng.below(2), 3 + rng.below(18), rng.next_u64());
        ParameterSet p = tnet.network().parameters();
        p *= 10.0;
        tnet.network().set_parameters(oracle::jittered(p.flatten(), rng.next_u64()));
        const auto width = static_cast<Eigen::Index>(2 * tnet.length());
        const Eigen::Index rows = 2 * static_cast<Eigen::Index>(2 + rng.below(8));
        const Matrix x = normal_matrix(rows, width, rng), y = normal_matrix(rows, width, rng);
        const auto value = [&](const StatisticNetwork& s, const Matrix& xx, const Matrix& yy) {
            return estimate(kind, s, split_joint_marginal(xx, yy)).estimate.nats;
        };
        const auto gr = estimator_gradients(tnet, estimate(kind, tnet, split_joint_marginal(x, y)));
        const auto nt = oracle::central_difference(
            [&](const std::vector<double>& q) {
                StatisticNetwork c = tnet;
                c.network().set_parameters(q);
                return value(c, x, y);
            },
            tnet.network().parameters().flatten(), h);
        const auto nx = oracle::central_difference(
            [&](const std::vector<double>& v) { return value(tnet, Eigen::Map<const Matrix>(v.data(), rows, width), y); },
            to_vec(x), h);
        const auto ny = oracle::central_difference(
            [&](const std::vector<double>& v) { return value(tnet, x, Eigen::Map<const Matrix>(v.data(), rows, width)); },
            to_vec(y), h);
        worst = std::max({worst, oracle::relative_error(gr.theta.flatten(), nt),
                          oracle::relative_error(to_vec(gr.x_cotangent), nx),
                          oracle::relative_error(to_vec(gr.y_cotangent), ny)});
    }
    for (int t = 0; t < 25; ++t, ++checked) {
        const std::size_t m = 2 + rng.below(31);
        auto dec = Decoder::create({m, 1, {4 + rng.below(12), 4 + rng.below(12)}}, rng.next_u64());
        dec.network().set_parameters(oracle::jittered(dec.network().parameters().flatten(), rng.next_u64()));
        const SignalBatch y(normal_matrix(2 + rng.below(10), 2, rng));
        std::vector<std::size_t> msgs(y.batch());
        for (auto& v : msgs) v = rng.below(m);
        const auto back = dec.cross_entropy_backward(dec.decode(y), msgs);
        const auto n = oracle::central_difference(
            [&](const std::vector<double>& p) {
                Decoder c = dec;
                c.network().set_parameters(p);
                return cross_entropy_loss(c.decode(y).probabilities, msgs).loss_nats;
            },
            dec.network().parameters().flatten(), h);
        worst = std::max(worst, oracle::relative_error(back.grads.flatten(), n));
    }
    return {worst < 1e-4, std::to_string(checked) + " networks, max relative error " + fmt(worst) + " (limit 1e-4)"};
}

Outcome gaussian_calibration() {
    CounterRng rng(1);
    SampleSource src = [&rng](std::size_t b) {
        Matrix x = awgn_noise(b, 1, 1.0, rng);
        Matrix y = x + awgn_noise(b, 1, 1.0, rng);
        return std::pair<Matrix, Matrix>{std::move(x), std::move(y)};
    };
    auto tnet = StatisticNetwork::create(1, 20, 2);
    const auto fit = train_statistic_network(tnet, src, 4000, 400, 0.005);
    if (fit.abort_reason) return {false, *fit.abort_reason};
    const auto s = evaluate_mi(EstimatorKind::donsker_varadhan, tnet, src, 20, 2000);
    return {s.mean_bits >= 0.80 && s.mean_bits <= 1.02,
            "DV " + fmt(s.mean_bits) + " +- " + fmt(s.stderr_bits, 2) + " bits, true 1, window [0.80, 1.02]"};
}

Outcome noiseless_discrete() {
    CounterRng rng(3);
    const auto points = qam_table(16).as_signal();
    SampleSource src = [&](std::size_t b) {
        Matrix x(static_cast<Eigen::Index>(b), 2);
        for (Eigen::Index i = 0; i < x.rows(); ++i) x.row(i) = points.iq().row(static_cast<Eigen::Index>(rng.below(16)));
        return std::pair<Matrix, Matrix>{x, x};
    };
    auto tnet = StatisticNetwork::create(1, 20, 4);
    const auto fit = train_statistic_network(tnet, src, 4000, 400, 0.005);
    if (fit.abort_reason) return {false, *fit.abort_reason};
    const auto s = evaluate_mi(EstimatorKind::donsker_varadhan, tnet, src, 20, 10000);
    return {s.mean_bits >= 3.7 && s.mean_bits <= 4.05,
            "DV " + fmt(s.mean_bits) + " +- " + fmt(s.stderr_bits, 2) + " bits, H(M) = 4, window [3.7, 4.05]"};
}

Outcome dv_dominates_fdiv() {
    CounterRng rng(5);
    std::size_t violations = 0;
    double min_gap = 1e300;
    for (int t = 0; t < 10000; ++t) {
        const std::size_t k = 2 + rng.below(200);
        const double scale = 0.01 + 10.0 * rng.uniform();
        const double offset = 5.0 * rng.normal();
        std::vector<double> j(k), m(k);
        for (auto& v : j) v = offset + scale * rng.normal();
        for (auto& v : m) v = offset + scale * rng.normal();
        const double gap = dv_value(j, m) - fdiv_value(j, m);
        min_gap = std::min(min_gap, gap);
        if (gap < 0.0) ++violations;
    }
    return {violations == 0, "10000 score vectors, " + std::to_string(violations) +
                                 " with DV < f-div, smallest gap " + fmt(min_gap)};
}

Outcome bler_vs_qam(const fs::path& out) {
    const auto run = trained_system16(out);
    const auto pts = read_bler_csv((fs::path(run) / "bler.csv").string());
    const auto report = slurp(fs::path(run) / "report.txt");
    std::string mi_line;
    if (const auto at = report.find("mi_bits = "); at != std::string::npos)
        mi_line = report.substr(at + 10, report.find('\n', at) - at - 10);

    bool pass = !pts.empty();
    double worst = 0.0;
    std::size_t used = 0;
    for (const auto& p : pts) {
        if (p.bler < 1e-4) continue;
        const double gap = std::abs(p.ebn0_db - qam_ebn0_for_ser(16, p.bler));
        worst = std::max(worst, gap);
        ++used;
        if (gap > 0.75) pass = false;
    }
    if (used == 0) pass = false;
    return {pass, std::to_string(used) + " points with P_e >= 1e-4, max horizontal gap " + fmt(worst, 3) +
                      " dB (limit 0.75), trained MI " + fmt(std::stod(mi_line.empty() ? "nan" : mi_line)) + " bits"};
}

Outcome qam_self_consistency(const fs::path& out) {
    const auto path = (out / "baseline_qam16.csv").string();
    cli({"baseline-qam", "--order", "16", "--grid", "4:12:1", "--seed", "1", "--out", path});
    const auto doc = read_csv(path, {"ebn0_db", "ser_theory", "ser_sim", "errors", "trials", "stderr", "capped"});
    bool pass = doc.rows.size() == 9;
    double worst = 0.0;
    for (const auto& r : doc.rows) {
        const double se = std::sqrt(r[1] * (1 - r[1]) / r[4]);  // binomial SE at the closed-form value
        const double z = std::abs(r[2] - r[1]) / se;
        worst = std::max(worst, z);
        if (z > 3.0) pass = false;
    }
    return {pass, std::to_string(doc.rows.size()) + " grid points, max |sim - theory| = " + fmt(worst, 3) +
                      " standard errors (limit 3)"};
}

Outcome mi_sweep_trend(const fs::path& out) {
    const auto dir = (out / "sweep").string();
    cli({"mi-sweep", "--seed", "1", "--out", dir, "--symbols", "16,32,64", "--grid",
         "0,4,8,12,14,16,17,18,20,21"});
    const auto rows = read_mi_sweep_csv((fs::path(dir) / "mi_sweep.csv").string());
    const std::vector<std::tuple<std::size_t, double, double>> targets{{16, 14, 3.6}, {32, 18, 4.4}, {64, 21, 5.2}};
    bool pass = true;
    std::string detail;
    for (const auto& [m, top, need] : targets) {
        std::vector<MiSweepRow> r;
        std::copy_if(rows.begin(), rows.end(), std::back_inserter(r), [m = m](const auto& x) { return x.symbols == m; });
        std::sort(r.begin(), r.end(), [](const auto& a, const auto& b) { return a.ebn0_db < b.ebn0_db; });
        double at_top = std::nan("");
        bool monotone = true, capped = true;
        for (std::size_t i = 0; i < r.size(); ++i) {
            if (r[i].ebn0_db == top) at_top = r[i].mi_bits;
            if (r[i].mi_bits > std::log2(static_cast<double>(m)) + 3.0 * r[i].std_error) capped = false;
            for (std::size_t j = 0; j < i; ++j)
                if (r[i].mi_bits < r[j].mi_bits - 3.0 * std::hypot(r[i].std_error, r[j].std_error)) monotone = false;
        }
        const bool ok = r.size() == 10 && at_top >= need && monotone && capped;
        pass = pass && ok;
        detail += (detail.empty() ? "" : "; ") + std::string("|M|=") + std::to_string(m) + " " + fmt(at_top) +
                  " bits at " + fmt(top) + " dB (need " + fmt(need) + ")" + (monotone ? "" : " non-monotone") +
                  (capped ? "" : " above log2|M|");
    }
    return {pass, detail};
}

Outcome node_stabilisation(const fs::path& out) {
    const auto sys = load_system(trained_system16(out).string(), 1);
    const auto snr = TrainingSnr::ebn0(7.0, 4.0);
    const auto fit_and_eval = [&](std::size_t width) {
        auto tnet = StatisticNetwork::create(1, width, derive_seed(1, 40 + width));
        CounterRng train_rng(derive_seed(1, 50));
        auto src = encoder_sample_source(sys.encoder, snr, train_rng);
        const auto fit = train_statistic_network(tnet, src, 4000, 400, 0.005);
        if (fit.abort_reason) throw std::runtime_error(*fit.abort_reason);
        CounterRng eval_rng(derive_seed(1, 51));
        auto eval_src = encoder_sample_source(sys.encoder, snr, eval_rng);
        return evaluate_mi(EstimatorKind::donsker_varadhan, tnet, eval_src, 20, 10000);
    };
    const auto w16 = fit_and_eval(16);
    const auto w20 = fit_and_eval(20);
    const double diff = w20.mean_bits - w16.mean_bits;

    const auto bench = (out / "bench").string();
    cli({"estimator-bench", "--seed", "1", "--out", bench, "--nodes", "2,4,6,8,10,12,14,16"});
    std::size_t exported = 0;
    for (int w = 2; w <= 16; w += 2) {
        const auto p = fs::path(bench) / ("constellation_nodes" + std::to_string(w) + ".csv");
        if (fs::exists(p) && read_constellation_csv(p.string()).size() == 16) ++exported;
    }
    return {diff < 0.1 && exported == 8, "MI(20 nodes) - MI(16 nodes) = " + fmt(w20.mean_bits) + " - " +
                                             fmt(w16.mean_bits) + " = " + fmt(diff, 3) + " bits (limit 0.1), " +
                                             std::to_string(exported) + "/8 constellations exported"};
}

Outcome invariant_suite(const fs::path& out) {
    std::vector<std::string> failed;
    CounterRng rng(9);

    double power_err = 0.0, idem_err = 0.0;
    for (int t = 0; t < 200; ++t) {
        const SignalBatch x(normal_matrix(1 + rng.below(50), 2 * (1 + rng.below(4)), rng, 0.01 + 100.0 * rng.uniform()));
        const auto once = normalize_power(x).signal;
        power_err = std::max(power_err, std::abs(once.mean_power() - 1.0));
        idem_err = std::max(idem_err, (normalize_power(once).signal.iq() - once.iq()).cwiseAbs().maxCoeff());
    }
    if (power_err > 1e-12) failed.push_back("mean power");
    if (idem_err > 1e-12) failed.push_back("normalisation idempotence");

    bool softmax_ok = true;
    for (int t = 0; t < 1000; ++t) {
        std::vector<double> z(2 + rng.below(40));
        for (auto& v : z) v = 20.0 * rng.normal();
        const auto p = softmax(z);
        if (std::abs(std::accumulate(p.begin(), p.end(), 0.0) - 1.0) > 1e-12) softmax_ok = false;
        auto shifted = z;
        const double c = 100.0 * rng.normal();
        for (auto& v : shifted) v += c;
        const auto ps = softmax(shifted);
        for (std::size_t i = 0; i < p.size(); ++i)
            if (std::abs(ps[i] - p[i]) > 1e-12) softmax_ok = false;
        const std::size_t j = rng.below(z.size());
        auto raised = z;
        raised[j] += std::abs(rng.normal());
        if (softmax(raised)[j] < p[j] || argmax(p) != argmax(z)) softmax_ok = false;
    }
    if (!softmax_ok) failed.push_back("softmax");

    double dv_shift = 0.0;
    for (int t = 0; t < 1000; ++t) {
        std::vector<double> j(2 + rng.below(100)), m(2 + rng.below(100));
        for (auto& v : j) v = 3.0 * rng.normal();
        for (auto& v : m) v = 3.0 * rng.normal();
        const double c = 50.0 * rng.normal();
        auto js = j, ms = m;
        for (auto& v : js) v += c;
        for (auto& v : ms) v += c;
        dv_shift = std::max(dv_shift, std::abs(dv_value(js, ms) - dv_value(j, m)));
    }
    if (dv_shift > 1e-10) failed.push_back("DV shift invariance");

    bool ckpt_ok = true;
    for (int t = 0; t < 20; ++t) {
        const std::vector<LayerSpec> spec{{1 + rng.below(30), Activation::relu}, {1 + rng.below(5), Activation::linear}};
        const bool embed = t % 2 == 0;
        auto net = DenseNetwork::create(embed ? 0 : 1 + rng.below(8), spec,
                                        embed ? std::optional<EmbeddingSpec>{{2 + rng.below(60), 1 + rng.below(60)}}
                                              : std::nullopt,
                                        InitScheme::glorot(), rng.next_u64());
        const auto bytes = checkpoint_save(net);
        const auto back = checkpoint_load(bytes);
        if (checkpoint_save(back) != bytes || !(back == net)) ckpt_ok = false;
    }
    if (!ckpt_ok) failed.push_back("checkpoint round-trip");

    // A second complete default-config train + evaluate run under the same
    // master seed, compared file by file with the shared reference run.
    const auto reference = trained_system16(out);
    const auto repeat = out / "system16_repeat";
    fs::remove_all(repeat);
    cli({"train", "--seed", "1", "--out", repeat.string()});
    cli({"eval-bler", "--seed", "1", "--out", repeat.string(), "--run", repeat.string()});
    std::vector<std::string> csvs(2);
    for (const char* f : {"mi_trace.csv", "decoder_loss.csv", "constellation.csv", "bler.csv", "encoder.ckpt",
                          "tnet.ckpt", "decoder.ckpt"}) {
        csvs[0] += slurp(reference / f) + "\n--\n";
        csvs[1] += slurp(repeat / f) + "\n--\n";
    }
    if (csvs[0] != csvs[1] || csvs[0].size() < 100) failed.push_back("run determinism");

    std::string detail = "power err " + fmt(power_err, 2) + ", idempotence err " + fmt(idem_err, 2) +
                         ", DV shift err " + fmt(dv_shift, 2) + ", softmax " + (softmax_ok ? "ok" : "bad") +
                         ", checkpoints " + (ckpt_ok ? "bit-exact" : "differ") + ", CSVs " +
                         (csvs[0] == csvs[1] ? "byte-identical" : "differ");
    for (const auto& f : failed) detail += "; failed: " + f;
    return {failed.empty(), detail};
}

}  // namespace

int main(int argc, char** argv) {
    fs::path out = "acceptance_out";
    std::set<int> only;
    for (int i = 1; i < argc; ++i) {
        const std::string a = argv[i];
        if (a == "--out" && i + 1 < argc) out = argv[++i];
        else if (a == "--only" && i + 1 < argc)
            for (auto n : parse_size_list(argv[++i])) only.insert(static_cast<int>(n));
        else {
            std::cerr << "usage: mineco_acceptance [--out DIR] [--only N[,N...]]\n";
            return 1;
        }
    }
    fs::create_directories(out);

    const std::vector<std::pair<std::string, std::function<Outcome()>>> checks{
        {"gradient correctness", gradient_correctness},
        {"estimator calibration, Gaussian input at SNR 1", gaussian_calibration},
        {"noiseless 16-message entropy", noiseless_discrete},
        {"DV value >= f-divergence value", dv_dominates_fdiv},
        {"16-message BLER vs 16-QAM theory", [&] { return bler_vs_qam(out); }},
        {"QAM Monte-Carlo vs closed form", [&] { return qam_self_consistency(out); }},
        {"MI sweep for 16/32/64 messages", [&] { return mi_sweep_trend(out); }},
        {"statistic-network width stabilisation", [&] { return node_stabilisation(out); }},
        {"invariant suite", [&] { return invariant_suite(out); }},
    };

    int failures = 0;
    for (std::size_t i = 0; i < checks.size(); ++i) {
        const int id = static_cast<int>(i + 1);
        if (!only.empty() && !only.count(id)) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = checks[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::cout << (o.pass ? "PASS" : "FAIL") << "  criterion " << id << ": " << checks[i].first << ": "
                  << o.detail << " [" << fmt(secs, 3) << " s]" << std::endl;
        if (!o.pass) ++failures;
    }
    std::cout << (failures ? "FAILED " : "ALL PASSED ") << "(" << failures << " failing)" << std::endl;
    return failures ? 1 : 0;
}
