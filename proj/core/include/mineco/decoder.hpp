#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mineco/channel.hpp"
#include "mineco/encoder.hpp"
#include "mineco/nn.hpp"
#include "mineco/training_snr.hpp"

namespace mineco {

/// Max-shifted softmax. Throws NanAbortError on a NaN logit.
std::vector<double> softmax(std::span<const double> logits);
/// Row-wise softmax of a [batch x |M|] logit matrix.
Matrix softmax_rows(const Matrix& logits);

struct CrossEntropy {
    double loss_nats = 0.0;
    std::size_t clamped = 0;  // selected probabilities that were exactly 0
};

/// J = -(1/k) sum_i log p_{m_i}; zero probabilities are clamped at 1e-300.
CrossEntropy cross_entropy_loss(const Matrix& probabilities, std::span<const std::size_t> messages);

struct DecoderConfig {
    std::size_t symbols = 16;
    std::size_t length = 1;
    std::vector<std::size_t> hidden;  // empty -> two layers of max(64, 2|M|)
};

struct DecodeResult {
    Matrix logits;
    Matrix probabilities;
    std::vector<std::size_t> decisions;
    GradientTape tape;
};

/// Received signal (2n reals) -> relu layers -> |M| logits -> softmax -> argmax.
class Decoder {
public:
    static Decoder create(const DecoderConfig& config, std::uint64_t seed);
    static Decoder from_network(DenseNetwork net, std::size_t length);

    DecodeResult decode(const SignalBatch& y) const;
    /// Hard decisions only, without keeping probabilities or tape.
    std::vector<std::size_t> detect(const SignalBatch& y) const;

    /// Gradient of the mean cross-entropy w.r.t. the weights, and the cotangent
    /// on the received signal (for end-to-end training through the channel).
    BackwardResult cross_entropy_backward(const DecodeResult& r, std::span<const std::size_t> messages) const;

    std::size_t symbols() const { return symbols_; }
    std::size_t length() const { return length_; }
    const DenseNetwork& network() const { return net_; }
    DenseNetwork& network() { return net_; }

private:
    Decoder(DenseNetwork net, std::size_t symbols, std::size_t length)
        : net_(std::move(net)), symbols_(symbols), length_(length) {}

    DenseNetwork net_;
    std::size_t symbols_;
    std::size_t length_;
};

/// Argmax with ties broken toward the lowest index.
std::size_t argmax(std::span<const double> v);

struct DecoderSchedule {
    std::size_t iterations = 10000;
    std::size_t batch = 500;
    double lr = 0.001;
};

struct DecoderTrainingResult {
    std::vector<double> loss_trace;
    std::optional<std::string> abort_reason;
};

/// Adam descent on the cross-entropy with the encoder held fixed. Messages
/// and channel noise come from streams seeded by `seed`, so the receiver
/// knows the transmitted indices.
DecoderTrainingResult train_decoder(Decoder& decoder, const Encoder& encoder, const TrainingSnr& snr,
                                    const DecoderSchedule& schedule, std::uint64_t seed);

/// Joint cross-entropy training of encoder and decoder through the known AWGN channel.
DecoderTrainingResult train_end_to_end_ce(Encoder& encoder, Decoder& decoder, const TrainingSnr& snr,
                                          const DecoderSchedule& schedule, std::uint64_t seed);

/// Loss-trace CSV `iteration,loss_nats`.
void write_loss_trace_csv(std::span<const double> trace, const std::string& path);

}  // namespace mineco
