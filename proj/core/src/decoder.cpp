#include "mineco/decoder.hpp"

#include <algorithm>
#include <cmath>

#include "mineco/csv.hpp"
#include "mineco/errors.hpp"
#include "mineco/rng.hpp"

namespace mineco {

std::vector<double> softmax(std::span<const double> logits) {
    for (double v : logits)
        if (std::isnan(v)) throw NanAbortError("NaN logit");
    std::vector<double> p(logits.begin(), logits.end());
    if (p.empty()) return p;
    const double shift = *std::max_element(p.begin(), p.end());
    double total = 0.0;
    for (auto& v : p) {
        v = std::exp(v - shift);
        total += v;
    }
    for (auto& v : p) v /= total;
    return p;
}

Matrix softmax_rows(const Matrix& logits) {
    check_finite(logits, "decoder logits");
    Matrix p = (logits.colwise() - logits.rowwise().maxCoeff()).array().exp().matrix();
    p.array().colwise() /= p.rowwise().sum().array();
    return p;
}

CrossEntropy cross_entropy_loss(const Matrix& probabilities, std::span<const std::size_t> messages) {
    if (static_cast<std::size_t>(probabilities.rows()) != messages.size())
        throw ShapeError("probabilities and messages are not aligned");
    if (messages.empty()) throw ShapeError("empty batch");
    constexpr double kFloor = 1e-300;
    CrossEntropy ce;
    for (std::size_t i = 0; i < messages.size(); ++i) {
        if (messages[i] >= static_cast<std::size_t>(probabilities.cols())) throw ShapeError("message out of range");
        double p = probabilities(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(messages[i]));
        if (p <= 0.0) {
            p = kFloor;
            ++ce.clamped;
        }
        ce.loss_nats -= std::log(p);
    }
    ce.loss_nats /= static_cast<double>(messages.size());
    return ce;
}

std::size_t argmax(std::span<const double> v) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < v.size(); ++i)
        if (v[i] > v[best]) best = i;
    return best;
}

Decoder Decoder::create(const DecoderConfig& config, std::uint64_t seed) {
    if (config.symbols < 1) throw InvalidSpecError("decoder needs at least one message");
    if (config.length < 1) throw InvalidSpecError("block length must be >= 1");
    std::vector<std::size_t> hidden = config.hidden;
    if (hidden.empty()) hidden.assign(2, std::max<std::size_t>(64, 2 * config.symbols));
    std::vector<LayerSpec> layers;
    for (auto w : hidden) layers.push_back({w, Activation::relu});
    layers.push_back({config.symbols, Activation::linear});
    auto net = DenseNetwork::create(2 * config.length, layers, std::nullopt, InitScheme::glorot(), seed);
    return Decoder(std::move(net), config.symbols, config.length);
}

Decoder Decoder::from_network(DenseNetwork net, std::size_t length) {
    if (net.has_embedding() || net.input_width() != 2 * length)
        throw InvalidSpecError("decoder network needs dense input of width 2n");
    const auto symbols = net.output_width();
    return Decoder(std::move(net), symbols, length);
}

DecodeResult Decoder::decode(const SignalBatch& y) const {
    if (y.length() != length_) throw ShapeError("received block length does not match the decoder");
    auto fwd = net_.forward(y.iq());
    DecodeResult r;
    r.probabilities = softmax_rows(fwd.output);
    r.decisions.resize(y.batch());
    for (Eigen::Index i = 0; i < fwd.output.rows(); ++i) {
        r.decisions[static_cast<std::size_t>(i)] =
            argmax({fwd.output.data() + i * fwd.output.cols(), static_cast<std::size_t>(fwd.output.cols())});
    }
    r.logits = std::move(fwd.output);
    r.tape = std::move(fwd.tape);
    return r;
}

std::vector<std::size_t> Decoder::detect(const SignalBatch& y) const { return decode(y).decisions; }

BackwardResult Decoder::cross_entropy_backward(const DecodeResult& r, std::span<const std::size_t> messages) const {
    if (static_cast<std::size_t>(r.probabilities.rows()) != messages.size())
        throw ShapeError("decode result and messages are not aligned");
    Matrix g = r.probabilities;
    for (std::size_t i = 0; i < messages.size(); ++i)
        g(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(messages[i])) -= 1.0;
    g /= static_cast<double>(messages.size());
    return net_.backward(r.tape, g);
}

namespace {

std::vector<std::size_t> draw_messages(CounterRng& rng, std::size_t count, std::size_t symbols) {
    std::vector<std::size_t> m(count);
    for (auto& v : m) v = static_cast<std::size_t>(rng.below(symbols));
    return m;
}

}  // namespace

DecoderTrainingResult train_decoder(Decoder& decoder, const Encoder& encoder, const TrainingSnr& snr,
                                    const DecoderSchedule& schedule, std::uint64_t seed) {
    if (decoder.symbols() != encoder.symbols() || decoder.length() != encoder.length())
        throw ShapeError("decoder and encoder disagree on |M| or n");
    snr.validate();
    DecoderTrainingResult result;
    if (schedule.iterations == 0) return result;
    CounterRng messages_rng(derive_seed(seed, 1));
    CounterRng noise_rng(derive_seed(seed, 2));
    AdamState adam(decoder.network(), schedule.lr);
    result.loss_trace.reserve(schedule.iterations);
    for (std::size_t it = 0; it < schedule.iterations; ++it) {
        try {
            const auto msgs = draw_messages(messages_rng, schedule.batch, encoder.symbols());
            const auto x = encoder.encode(msgs).signal;
            const double progress = static_cast<double>(it) / static_cast<double>(schedule.iterations);
            const auto y = awgn_transmit(x, snr.sample(noise_rng, progress), noise_rng);
            const auto r = decoder.decode(y);
            const auto ce = cross_entropy_loss(r.probabilities, msgs);
            const auto back = decoder.cross_entropy_backward(r, msgs);
            adam.step(decoder.network(), back.grads);
            result.loss_trace.push_back(ce.loss_nats);
        } catch (const NanAbortError& e) {
            result.abort_reason = "aborted at iteration " + std::to_string(it) + ": " + e.what();
            break;
        }
    }
    return result;
}

DecoderTrainingResult train_end_to_end_ce(Encoder& encoder, Decoder& decoder, const TrainingSnr& snr,
                                          const DecoderSchedule& schedule, std::uint64_t seed) {
    if (decoder.symbols() != encoder.symbols() || decoder.length() != encoder.length())
        throw ShapeError("decoder and encoder disagree on |M| or n");
    snr.validate();
    DecoderTrainingResult result;
    CounterRng messages_rng(derive_seed(seed, 1));
    CounterRng noise_rng(derive_seed(seed, 2));
    AdamState dec_adam(decoder.network(), schedule.lr);
    AdamState enc_adam(encoder.network(), schedule.lr);
    for (std::size_t it = 0; it < schedule.iterations; ++it) {
        try {
            const auto msgs = draw_messages(messages_rng, schedule.batch, encoder.symbols());
            const auto enc = encoder.encode(msgs);
            const double progress = static_cast<double>(it) / static_cast<double>(schedule.iterations);
            const auto y = awgn_transmit(enc.signal, snr.sample(noise_rng, progress), noise_rng);
            const auto r = decoder.decode(y);
            const auto ce = cross_entropy_loss(r.probabilities, msgs);
            const auto back = decoder.cross_entropy_backward(r, msgs);
            // dy/dx = I with the noise realisation held fixed.
            const auto enc_grads = encoder.backward(enc, back.input_cotangent);
            dec_adam.step(decoder.network(), back.grads);
            enc_adam.step(encoder.network(), enc_grads);
            result.loss_trace.push_back(ce.loss_nats);
        } catch (const NanAbortError& e) {
            result.abort_reason = "aborted at iteration " + std::to_string(it) + ": " + e.what();
            break;
        }
    }
    return result;
}

void write_loss_trace_csv(std::span<const double> trace, const std::string& path) {
    CsvWriter csv(path, {"iteration", "loss_nats"});
    for (std::size_t i = 0; i < trace.size(); ++i) csv.row(i, trace[i]);
}

}  // namespace mineco
