#include "mineco/config.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "mineco/csv.hpp"
#include "mineco/errors.hpp"

namespace mineco {

void TrainingSchedule::validate() const {
    if (initial_iterations == 0 || initial_batch == 0) throw InvalidSpecError("initial phase counts must be >= 1");
    if (!(initial_lr > 0.0) || !(burst_lr > 0.0)) throw InvalidSpecError("learning rates must be positive");
    if (refreshes_per_cycle == 0 || burst_iterations == 0 || burst_batch == 0)
        throw InvalidSpecError("refresh counts must be >= 1");
    for (const auto& c : cycles) {
        if (c.batch == 0 || c.iterations == 0) throw InvalidSpecError("cycle counts must be >= 1");
        if (!(c.lr > 0.0)) throw InvalidSpecError("cycle learning rate must be positive");
        if (c.iterations % refreshes_per_cycle != 0)
            throw InvalidSpecError("refresh count must divide every cycle's iterations");
    }
    if (early_stop && early_stop_window == 0) throw InvalidSpecError("early-stop window must be >= 1");
}

double ExperimentConfig::rate_bits() const {
    return std::log2(static_cast<double>(symbols)) / static_cast<double>(block_length);
}

void ExperimentConfig::validate() const {
    if (symbols < 2 || (symbols & (symbols - 1)) != 0) throw InvalidSpecError("symbols must be a power of two >= 2");
    if (block_length < 1) throw InvalidSpecError("block_length must be >= 1");
    if (tnet_width < 1 || tnet_layers < 1) throw InvalidSpecError("statistic network needs width and depth >= 1");
    if (eval_grid_db.empty()) throw InvalidSpecError("eval grid must not be empty");
    if (stopping.min_errors < 1 || stopping.max_symbols < 1) throw InvalidSpecError("stopping rule counts must be >= 1");
    if (mi_eval_batches < 1 || mi_eval_batch < 4) throw InvalidSpecError("MI evaluation needs batches >= 1 and batch >= 4");
    if (decoder_schedule.batch < 1 || !(decoder_schedule.lr > 0.0)) throw InvalidSpecError("bad decoder schedule");
    if (workers < 1) throw InvalidSpecError("workers must be >= 1");
    train_snr.validate();
    schedule.validate();
}

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::string part;
    std::istringstream in(s);
    while (std::getline(in, part, sep)) parts.push_back(trim(part));
    return parts;
}

double to_double(const std::string& s) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        throw InvalidSpecError("not a number: '" + s + "'");
    }
    if (used != s.size()) throw InvalidSpecError("not a number: '" + s + "'");
    return v;
}

std::size_t to_size(const std::string& s) {
    const double v = to_double(s);
    if (v < 0.0 || v != std::floor(v)) throw InvalidSpecError("not a nonnegative integer: '" + s + "'");
    return static_cast<std::size_t>(v);
}

bool to_bool(const std::string& s) {
    if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
    if (s == "false" || s == "0" || s == "no" || s == "off") return false;
    throw InvalidSpecError("not a boolean: '" + s + "'");
}

std::string join(const std::vector<std::size_t>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
    return s;
}

std::string join(const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + format_number(v[i]);
    return s;
}

std::vector<EncoderCycle> parse_cycles(const std::string& text) {
    // batch x iterations @ lr, comma separated: "100x1000@0.01,100x10000@0.001"
    std::vector<EncoderCycle> cycles;
    if (text.empty() || text == "none") return cycles;
    for (const auto& item : split(text, ',')) {
        const auto x = item.find('x');
        const auto at = item.find('@');
        if (x == std::string::npos || at == std::string::npos || at < x)
            throw InvalidSpecError("cycle must look like BATCHxITERS@LR, got '" + item + "'");
        cycles.push_back({to_size(item.substr(0, x)), to_size(item.substr(x + 1, at - x - 1)),
                          to_double(item.substr(at + 1))});
    }
    return cycles;
}

std::string format_cycles(const std::vector<EncoderCycle>& cycles) {
    if (cycles.empty()) return "none";
    std::string s;
    for (std::size_t i = 0; i < cycles.size(); ++i)
        s += (i ? "," : "") + std::to_string(cycles[i].batch) + "x" + std::to_string(cycles[i].iterations) + "@" +
             format_number(cycles[i].lr);
    return s;
}

}  // namespace

std::vector<double> parse_grid(const std::string& text) {
    const auto t = trim(text);
    std::vector<double> grid;
    if (t.find(':') != std::string::npos) {
        const auto p = split(t, ':');
        if (p.size() != 3) throw InvalidSpecError("grid must be lo:hi:step, got '" + text + "'");
        const double lo = to_double(p[0]), hi = to_double(p[1]), step = to_double(p[2]);
        if (!(step > 0.0) || lo > hi) throw InvalidSpecError("grid needs lo <= hi and step > 0");
        const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9));
        for (std::size_t i = 0; i <= n; ++i) grid.push_back(lo + step * static_cast<double>(i));
    } else {
        for (const auto& p : split(t, ',')) grid.push_back(to_double(p));
    }
    if (grid.empty()) throw InvalidSpecError("empty grid");
    return grid;
}

std::vector<std::size_t> parse_size_list(const std::string& text) {
    std::vector<std::size_t> out;
    const auto t = trim(text);
    if (t.empty() || t == "default") return out;
    for (const auto& p : split(t, ',')) out.push_back(to_size(p));
    return out;
}

TrainingSnr parse_training_snr(const std::string& text, double rate_bits) {
    const auto p = split(trim(text), ':');
    if (p.size() < 2 || p.size() > 3) throw InvalidSpecError("bad training SNR '" + text + "'");
    TrainingSnr s;
    s.rate = rate_bits;
    if (p[0] == "ebn0") s.scale = TrainingSnr::Scale::ebn0_db;
    else if (p[0] == "snr_db") s.scale = TrainingSnr::Scale::snr_db;
    else if (p[0] == "snr") s.scale = TrainingSnr::Scale::snr_linear;
    else if (p[0] == "variance") s.scale = TrainingSnr::Scale::noise_variance;
    else throw InvalidSpecError("unknown SNR scale '" + p[0] + "'");
    s.lo = to_double(p[1]);
    s.hi = p.size() == 3 ? to_double(p[2]) : s.lo;
    s.mode = p.size() == 3 ? TrainingSnr::Mode::uniform_range : TrainingSnr::Mode::fixed;
    s.validate();
    return s;
}

std::string format_training_snr(const TrainingSnr& s) {
    std::string scale;
    switch (s.scale) {
        case TrainingSnr::Scale::ebn0_db: scale = "ebn0"; break;
        case TrainingSnr::Scale::snr_db: scale = "snr_db"; break;
        case TrainingSnr::Scale::snr_linear: scale = "snr"; break;
        case TrainingSnr::Scale::noise_variance: scale = "variance"; break;
    }
    if (s.mode == TrainingSnr::Mode::fixed) return scale + ":" + format_number(s.hi);
    return scale + ":" + format_number(s.lo) + ":" + format_number(s.hi);
}

ExperimentConfig parse_config(const std::string& text) {
    ExperimentConfig c;
    std::string snr_text = "ebn0:7";
    std::string snr_mode = "uniform";

    using Setter = std::function<void(const std::string&)>;
    const std::map<std::string, Setter> setters{
        {"symbols", [&](const std::string& v) { c.symbols = to_size(v); }},
        {"block_length", [&](const std::string& v) { c.block_length = to_size(v); }},
        {"estimator", [&](const std::string& v) { c.estimator = estimator_kind_from_string(v); }},
        {"mode",
         [&](const std::string& v) {
             if (v == "mi") c.mode = TrainingMode::mi;
             else if (v == "ce_end_to_end") c.mode = TrainingMode::ce_end_to_end;
             else throw InvalidSpecError("mode must be mi or ce_end_to_end");
         }},
        {"tnet_width", [&](const std::string& v) { c.tnet_width = to_size(v); }},
        {"tnet_layers", [&](const std::string& v) { c.tnet_layers = to_size(v); }},
        {"encoder_hidden", [&](const std::string& v) { c.encoder_hidden = parse_size_list(v); }},
        {"decoder_hidden", [&](const std::string& v) { c.decoder_hidden = parse_size_list(v); }},
        {"train_snr", [&](const std::string& v) { snr_text = v; }},
        {"train_snr_mode", [&](const std::string& v) { snr_mode = v; }},
        {"initial_iterations", [&](const std::string& v) { c.schedule.initial_iterations = to_size(v); }},
        {"initial_batch", [&](const std::string& v) { c.schedule.initial_batch = to_size(v); }},
        {"initial_lr", [&](const std::string& v) { c.schedule.initial_lr = to_double(v); }},
        {"cycles", [&](const std::string& v) { c.schedule.cycles = parse_cycles(v); }},
        {"refreshes_per_cycle", [&](const std::string& v) { c.schedule.refreshes_per_cycle = to_size(v); }},
        {"burst_iterations", [&](const std::string& v) { c.schedule.burst_iterations = to_size(v); }},
        {"burst_batch", [&](const std::string& v) { c.schedule.burst_batch = to_size(v); }},
        {"burst_lr", [&](const std::string& v) { c.schedule.burst_lr = to_double(v); }},
        {"reset_estimator_adam", [&](const std::string& v) { c.schedule.reset_estimator_adam = to_bool(v); }},
        {"reset_encoder_adam", [&](const std::string& v) { c.schedule.reset_encoder_adam = to_bool(v); }},
        {"early_stop", [&](const std::string& v) { c.schedule.early_stop = to_bool(v); }},
        {"early_stop_window", [&](const std::string& v) { c.schedule.early_stop_window = to_size(v); }},
        {"early_stop_tolerance", [&](const std::string& v) { c.schedule.early_stop_tolerance = to_double(v); }},
        {"decoder_iterations", [&](const std::string& v) { c.decoder_schedule.iterations = to_size(v); }},
        {"decoder_batch", [&](const std::string& v) { c.decoder_schedule.batch = to_size(v); }},
        {"decoder_lr", [&](const std::string& v) { c.decoder_schedule.lr = to_double(v); }},
        {"eval_grid", [&](const std::string& v) { c.eval_grid_db = parse_grid(v); }},
        {"min_errors", [&](const std::string& v) { c.stopping.min_errors = to_size(v); }},
        {"max_symbols", [&](const std::string& v) { c.stopping.max_symbols = to_size(v); }},
        {"mi_eval_batches", [&](const std::string& v) { c.mi_eval_batches = to_size(v); }},
        {"mi_eval_batch", [&](const std::string& v) { c.mi_eval_batch = to_size(v); }},
        {"sweep_refresh_iterations", [&](const std::string& v) { c.sweep.refresh_iterations = to_size(v); }},
        {"sweep_refresh_batch", [&](const std::string& v) { c.sweep.refresh_batch = to_size(v); }},
        {"sweep_refresh_lr", [&](const std::string& v) { c.sweep.refresh_lr = to_double(v); }},
        {"sweep_eval_batches", [&](const std::string& v) { c.sweep.eval_batches = to_size(v); }},
        {"sweep_eval_batch", [&](const std::string& v) { c.sweep.eval_batch = to_size(v); }},
        {"seed", [&](const std::string& v) { c.seed = static_cast<std::uint64_t>(std::stoull(v)); }},
        {"workers", [&](const std::string& v) { c.workers = to_size(v); }},
        {"out", [&](const std::string& v) { c.out_dir = v; }},
    };

    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw InvalidSpecError("config line " + std::to_string(line_no) + ": expected key = value");
        const auto key = trim(line.substr(0, eq));
        const auto value = trim(line.substr(eq + 1));
        const auto it = setters.find(key);
        if (it == setters.end())
            throw InvalidSpecError("config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
        try {
            it->second(value);
        } catch (const InvalidSpecError& e) {
            throw InvalidSpecError("config line " + std::to_string(line_no) + ": " + e.what());
        } catch (const std::exception& e) {
            throw InvalidSpecError("config line " + std::to_string(line_no) + ": bad value '" + value + "'");
        }
    }
    if (c.symbols < 2 || c.block_length < 1) throw InvalidSpecError("symbols >= 2 and block_length >= 1 required");
    c.train_snr = parse_training_snr(snr_text, c.rate_bits());
    if (c.train_snr.mode == TrainingSnr::Mode::uniform_range) {
        if (snr_mode == "ramp") c.train_snr.mode = TrainingSnr::Mode::ramp;
        else if (snr_mode != "uniform") throw InvalidSpecError("train_snr_mode must be uniform or ramp");
    }
    c.validate();
    return c;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw Error("cannot open config '" + path + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_config(ss.str());
}

std::string to_config_text(const ExperimentConfig& c) {
    std::ostringstream o;
    o << "symbols = " << c.symbols << "\n"
      << "block_length = " << c.block_length << "\n"
      << "estimator = " << to_string(c.estimator) << "\n"
      << "mode = " << (c.mode == TrainingMode::mi ? "mi" : "ce_end_to_end") << "\n"
      << "tnet_width = " << c.tnet_width << "\n"
      << "tnet_layers = " << c.tnet_layers << "\n"
      << "encoder_hidden = " << (c.encoder_hidden.empty() ? "default" : join(c.encoder_hidden)) << "\n"
      << "decoder_hidden = " << (c.decoder_hidden.empty() ? "default" : join(c.decoder_hidden)) << "\n"
      << "train_snr = " << format_training_snr(c.train_snr) << "\n"
      << "train_snr_mode = " << (c.train_snr.mode == TrainingSnr::Mode::ramp ? "ramp" : "uniform") << "\n"
      << "initial_iterations = " << c.schedule.initial_iterations << "\n"
      << "initial_batch = " << c.schedule.initial_batch << "\n"
      << "initial_lr = " << format_number(c.schedule.initial_lr) << "\n"
      << "cycles = " << format_cycles(c.schedule.cycles) << "\n"
      << "refreshes_per_cycle = " << c.schedule.refreshes_per_cycle << "\n"
      << "burst_iterations = " << c.schedule.burst_iterations << "\n"
      << "burst_batch = " << c.schedule.burst_batch << "\n"
      << "burst_lr = " << format_number(c.schedule.burst_lr) << "\n"
      << "reset_estimator_adam = " << (c.schedule.reset_estimator_adam ? "true" : "false") << "\n"
      << "reset_encoder_adam = " << (c.schedule.reset_encoder_adam ? "true" : "false") << "\n"
      << "early_stop = " << (c.schedule.early_stop ? "true" : "false") << "\n"
      << "early_stop_window = " << c.schedule.early_stop_window << "\n"
      << "early_stop_tolerance = " << format_number(c.schedule.early_stop_tolerance) << "\n"
      << "decoder_iterations = " << c.decoder_schedule.iterations << "\n"
      << "decoder_batch = " << c.decoder_schedule.batch << "\n"
      << "decoder_lr = " << format_number(c.decoder_schedule.lr) << "\n"
      << "eval_grid = " << join(c.eval_grid_db) << "\n"
      << "min_errors = " << c.stopping.min_errors << "\n"
      << "max_symbols = " << c.stopping.max_symbols << "\n"
      << "mi_eval_batches = " << c.mi_eval_batches << "\n"
      << "mi_eval_batch = " << c.mi_eval_batch << "\n"
      << "sweep_refresh_iterations = " << c.sweep.refresh_iterations << "\n"
      << "sweep_refresh_batch = " << c.sweep.refresh_batch << "\n"
      << "sweep_refresh_lr = " << format_number(c.sweep.refresh_lr) << "\n"
      << "sweep_eval_batches = " << c.sweep.eval_batches << "\n"
      << "sweep_eval_batch = " << c.sweep.eval_batch << "\n"
      << "seed = " << c.seed << "\n"
      << "workers = " << c.workers << "\n"
      << "out = " << c.out_dir << "\n";
    return o.str();
}

}  // namespace mineco
