#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mineco/channel.hpp"
#include "mineco/nn.hpp"

namespace mineco {

struct EncoderConfig {
    std::size_t symbols = 16;     // |M|
    std::size_t length = 1;       // n, complex channel uses per message
    std::size_t embedding_width = 0;         // 0 -> |M|
    std::vector<std::size_t> hidden;         // empty -> {max(64, 2|M|)}
};

/// Everything needed to pull a cotangent on the normalised codewords back into the encoder weights.
struct EncodeResult {
    SignalBatch signal;  // normalised, unit batch-mean power
    Matrix raw;          // pre-normalisation network output
    std::vector<std::size_t> messages;
    double scale = 1.0;
    GradientTape tape;  // of the pass over all |M| messages
};

struct ConstellationRow {
    std::size_t message;
    std::vector<std::complex<double>> points;
};

/// Message index -> complex codeword: embedding, relu dense layers, a linear
/// layer of width 2n read as n interleaved complex values, then batch power
/// normalisation.
class Encoder {
public:
    static Encoder create(const EncoderConfig& config, std::uint64_t seed);
    /// Wraps an existing network (e.g. from a checkpoint). Validates its shape.
    static Encoder from_network(DenseNetwork net, std::size_t length);

    EncodeResult encode(std::span<const std::size_t> messages) const;

    /// Gradient of a scalar w.r.t. the encoder weights, given its cotangent on
    /// `result.signal.iq()`.
    ParameterSet backward(const EncodeResult& result, const Matrix& signal_cotangent) const;

    /// One pass over every message with normalisation over that full set.
    std::vector<ConstellationRow> constellation_table() const;
    /// The same table as a [|M| x 2n] signal batch.
    SignalBatch constellation() const;

    std::size_t symbols() const { return symbols_; }
    std::size_t length() const { return length_; }
    double rate_bits() const;

    const DenseNetwork& network() const { return net_; }
    DenseNetwork& network() { return net_; }

private:
    Encoder(DenseNetwork net, std::size_t symbols, std::size_t length)
        : net_(std::move(net)), symbols_(symbols), length_(length) {}

    DenseNetwork net_;
    std::size_t symbols_;
    std::size_t length_;
};

/// CSV with header `message,dim,re,im`, one row per (message, dimension).
void write_constellation_csv(const std::vector<ConstellationRow>& table, const std::string& path);
std::vector<ConstellationRow> read_constellation_csv(const std::string& path);

}  // namespace mineco
