#include "mineco/encoder.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mineco/csv.hpp"
#include "mineco/errors.hpp"

namespace mineco {

Encoder Encoder::create(const EncoderConfig& config, std::uint64_t seed) {
    if (config.symbols < 2) throw InvalidSpecError("encoder needs at least 2 messages");
    if (config.length < 1) throw InvalidSpecError("block length must be >= 1");
    const std::size_t embed = config.embedding_width ? config.embedding_width : config.symbols;
    std::vector<std::size_t> hidden = config.hidden;
    if (hidden.empty()) hidden.push_back(std::max<std::size_t>(64, 2 * config.symbols));

    std::vector<LayerSpec> layers;
    for (auto w : hidden) layers.push_back({w, Activation::relu});
    layers.push_back({2 * config.length, Activation::linear});
    auto net = DenseNetwork::create(embed, layers, EmbeddingSpec{config.symbols, embed}, InitScheme::glorot(), seed);
    return Encoder(std::move(net), config.symbols, config.length);
}

Encoder Encoder::from_network(DenseNetwork net, std::size_t length) {
    if (!net.has_embedding()) throw InvalidSpecError("encoder network needs an embedding front-end");
    if (net.output_width() != 2 * length) throw InvalidSpecError("encoder output width must be 2n");
    if (net.activation(net.layer_count() - 1) != Activation::linear)
        throw InvalidSpecError("encoder output layer must be linear");
    const auto symbols = net.vocab();
    if (symbols < 2) throw InvalidSpecError("encoder needs at least 2 messages");
    return Encoder(std::move(net), symbols, length);
}

double Encoder::rate_bits() const {
    return std::log2(static_cast<double>(symbols_)) / static_cast<double>(length_);
}

EncodeResult Encoder::encode(std::span<const std::size_t> messages) const {
    for (auto m : messages)
        if (m >= symbols_) throw ShapeError("message index " + std::to_string(m) + " out of range");
    // One pass over the whole message set, then a row gather: repeated
    // messages map to bit-identical codewords regardless of batch layout.
    std::vector<std::size_t> all(symbols_);
    std::iota(all.begin(), all.end(), std::size_t{0});
    auto fwd = net_.forward(all);
    EncodeResult r;
    r.messages.assign(messages.begin(), messages.end());
    r.raw.resize(static_cast<Eigen::Index>(messages.size()), fwd.output.cols());
    for (std::size_t i = 0; i < messages.size(); ++i)
        r.raw.row(static_cast<Eigen::Index>(i)) = fwd.output.row(static_cast<Eigen::Index>(messages[i]));
    auto norm = normalize_power(SignalBatch(r.raw));
    r.signal = std::move(norm.signal);
    r.scale = norm.scale;
    r.tape = std::move(fwd.tape);
    return r;
}

ParameterSet Encoder::backward(const EncodeResult& result, const Matrix& signal_cotangent) const {
    const Matrix raw_cot = normalize_power_backward(result.raw, result.scale, signal_cotangent);
    Matrix per_message = Matrix::Zero(static_cast<Eigen::Index>(symbols_), raw_cot.cols());
    for (std::size_t i = 0; i < result.messages.size(); ++i)
        per_message.row(static_cast<Eigen::Index>(result.messages[i])) += raw_cot.row(static_cast<Eigen::Index>(i));
    return net_.backward(result.tape, per_message).grads;
}

SignalBatch Encoder::constellation() const {
    std::vector<std::size_t> all(symbols_);
    std::iota(all.begin(), all.end(), std::size_t{0});
    return encode(all).signal;
}

std::vector<ConstellationRow> Encoder::constellation_table() const {
    const auto sig = constellation();
    std::vector<ConstellationRow> table;
    table.reserve(symbols_);
    for (std::size_t m = 0; m < symbols_; ++m) {
        ConstellationRow row{m, {}};
        for (std::size_t d = 0; d < length_; ++d) row.points.push_back(sig.at(m, d));
        table.push_back(std::move(row));
    }
    return table;
}

void write_constellation_csv(const std::vector<ConstellationRow>& table, const std::string& path) {
    CsvWriter csv(path, {"message", "dim", "re", "im"});
    for (const auto& row : table)
        for (std::size_t d = 0; d < row.points.size(); ++d)
            csv.row(row.message, d, row.points[d].real(), row.points[d].imag());
}

std::vector<ConstellationRow> read_constellation_csv(const std::string& path) {
    const auto doc = read_csv(path, {"message", "dim", "re", "im"});
    std::vector<ConstellationRow> table;
    for (const auto& r : doc.rows) {
        const auto m = static_cast<std::size_t>(r[0]);
        const auto d = static_cast<std::size_t>(r[1]);
        if (table.size() <= m) table.resize(m + 1);
        table[m].message = m;
        if (table[m].points.size() <= d) table[m].points.resize(d + 1);
        table[m].points[d] = {r[2], r[3]};
    }
    return table;
}

}  // namespace mineco
