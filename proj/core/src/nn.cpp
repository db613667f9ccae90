#include "mineco/nn.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include "mineco/errors.hpp"
#include "mineco/rng.hpp"

namespace mineco {

std::string_view to_string(Activation a) {
    switch (a) {
        case Activation::relu: return "relu";
        case Activation::linear: return "linear";
    }
    return "linear";
}

Activation activation_from_string(std::string_view s) {
    if (s == "relu") return Activation::relu;
    if (s == "linear") return Activation::linear;
    throw InvalidSpecError("unknown activation '" + std::string(s) + "'");
}

// ---------------------------------------------------------------------------
// ParameterSet

std::size_t ParameterSet::size() const {
    std::size_t n = static_cast<std::size_t>(embedding.size());
    for (const auto& w : weights) n += static_cast<std::size_t>(w.size());
    for (const auto& b : biases) n += static_cast<std::size_t>(b.size());
    return n;
}

void ParameterSet::set_zero() {
    embedding.setZero();
    for (auto& w : weights) w.setZero();
    for (auto& b : biases) b.setZero();
}

bool ParameterSet::same_shape(const ParameterSet& o) const {
    if (embedding.rows() != o.embedding.rows() || embedding.cols() != o.embedding.cols()) return false;
    if (weights.size() != o.weights.size() || biases.size() != o.biases.size()) return false;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (weights[i].rows() != o.weights[i].rows() || weights[i].cols() != o.weights[i].cols()) return false;
        if (biases[i].size() != o.biases[i].size()) return false;
    }
    return true;
}

ParameterSet& ParameterSet::operator+=(const ParameterSet& o) {
    if (!same_shape(o)) throw ShapeError("parameter set shape mismatch in +=");
    embedding += o.embedding;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        weights[i] += o.weights[i];
        biases[i] += o.biases[i];
    }
    return *this;
}

ParameterSet& ParameterSet::operator*=(double s) {
    embedding *= s;
    for (auto& w : weights) w *= s;
    for (auto& b : biases) b *= s;
    return *this;
}

namespace {

template <typename F>
void visit_blocks(ParameterSet& p, F&& f) {
    f(p.embedding.data(), static_cast<std::size_t>(p.embedding.size()));
    for (std::size_t i = 0; i < p.weights.size(); ++i) {
        f(p.weights[i].data(), static_cast<std::size_t>(p.weights[i].size()));
        f(p.biases[i].data(), static_cast<std::size_t>(p.biases[i].size()));
    }
}

template <typename F>
void visit_blocks(const ParameterSet& p, F&& f) {
    f(p.embedding.data(), static_cast<std::size_t>(p.embedding.size()));
    for (std::size_t i = 0; i < p.weights.size(); ++i) {
        f(p.weights[i].data(), static_cast<std::size_t>(p.weights[i].size()));
        f(p.biases[i].data(), static_cast<std::size_t>(p.biases[i].size()));
    }
}

}  // namespace

std::vector<double> ParameterSet::flatten() const {
    std::vector<double> out;
    out.reserve(size());
    visit_blocks(*this, [&](const double* d, std::size_t n) { out.insert(out.end(), d, d + n); });
    return out;
}

void ParameterSet::assign(std::span<const double> flat) {
    if (flat.size() != size()) throw ShapeError("flat parameter vector has wrong length");
    std::size_t pos = 0;
    visit_blocks(*this, [&](double* d, std::size_t n) {
        std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(pos), n, d);
        pos += n;
    });
}

double ParameterSet::squared_norm() const {
    double s = embedding.squaredNorm();
    for (std::size_t i = 0; i < weights.size(); ++i) s += weights[i].squaredNorm() + biases[i].squaredNorm();
    return s;
}

// ---------------------------------------------------------------------------
// DenseNetwork

DenseNetwork DenseNetwork::create(std::size_t input_width, std::span<const LayerSpec> layers,
                                  std::optional<EmbeddingSpec> embedding, InitScheme init,
                                  std::uint64_t seed) {
    if (layers.empty()) throw InvalidSpecError("network needs at least one layer");
    DenseNetwork net;
    CounterRng rng(seed);

    auto draw = [&](std::size_t fan_in, std::size_t fan_out) {
        if (init.kind == InitScheme::Kind::gaussian) return init.stddev * rng.normal();
        const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        return limit * (2.0 * rng.uniform() - 1.0);
    };

    if (embedding) {
        if (embedding->vocab == 0 || embedding->width == 0)
            throw InvalidSpecError("embedding vocab and width must be >= 1");
        if (input_width != 0 && input_width != embedding->width)
            throw InvalidSpecError("input width disagrees with embedding width");
        input_width = embedding->width;
        net.params_.embedding.resize(static_cast<Eigen::Index>(embedding->vocab),
                                     static_cast<Eigen::Index>(embedding->width));
        for (Eigen::Index i = 0; i < net.params_.embedding.size(); ++i)
            net.params_.embedding.data()[i] = draw(embedding->vocab, embedding->width);
    }
    if (input_width == 0) throw InvalidSpecError("input width must be >= 1");

    std::size_t in = input_width;
    for (const auto& spec : layers) {
        if (spec.width == 0) throw InvalidSpecError("layer width must be >= 1");
        Matrix w(static_cast<Eigen::Index>(in), static_cast<Eigen::Index>(spec.width));
        for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = draw(in, spec.width);
        net.params_.weights.push_back(std::move(w));
        net.params_.biases.push_back(RowVector::Zero(static_cast<Eigen::Index>(spec.width)));
        net.activations_.push_back(spec.activation);
        in = spec.width;
    }
    return net;
}

void check_finite(const Matrix& m, std::string_view where) {
    if (!m.allFinite()) throw NanAbortError("non-finite value in " + std::string(where));
}

ForwardResult DenseNetwork::forward(const Matrix& input) const {
    if (has_embedding()) throw ShapeError("network expects message indices, got a dense batch");
    if (static_cast<std::size_t>(input.cols()) != input_width())
        throw ShapeError("input width " + std::to_string(input.cols()) + " does not match network width " +
                         std::to_string(input_width()));
    return run_layers(input, {});
}

ForwardResult DenseNetwork::forward(std::span<const std::size_t> indices) const {
    if (!has_embedding()) throw ShapeError("network has no embedding table");
    Matrix rows(static_cast<Eigen::Index>(indices.size()), params_.embedding.cols());
    for (std::size_t i = 0; i < indices.size(); ++i) {
        if (indices[i] >= vocab())
            throw ShapeError("index " + std::to_string(indices[i]) + " out of range for vocabulary " +
                             std::to_string(vocab()));
        rows.row(static_cast<Eigen::Index>(i)) = params_.embedding.row(static_cast<Eigen::Index>(indices[i]));
    }
    return run_layers(std::move(rows), {indices.begin(), indices.end()});
}

ForwardResult DenseNetwork::run_layers(Matrix input, std::vector<std::size_t> indices) const {
    ForwardResult r;
    r.tape.version = version_;
    r.tape.indices = std::move(indices);
    r.tape.activations.reserve(layer_count() + 1);
    r.tape.activations.push_back(std::move(input));
    for (std::size_t l = 0; l < layer_count(); ++l) {
        Matrix z(r.tape.activations.back().rows(), params_.weights[l].cols());
        z.noalias() = r.tape.activations.back() * params_.weights[l];
        z.rowwise() += params_.biases[l];
        if (activations_[l] == Activation::relu) z = z.cwiseMax(0.0);
        r.tape.activations.push_back(std::move(z));
    }
    r.output = r.tape.activations.back();
    check_finite(r.output, "network forward pass");
    return r;
}

BackwardResult DenseNetwork::backward(const GradientTape& tape, const Matrix& output_cotangent) const {
    if (tape.version != version_) throw StaleTapeError("tape was recorded before the last parameter update");
    if (tape.activations.size() != layer_count() + 1) throw ShapeError("tape does not belong to this network");
    const Matrix& out = tape.activations.back();
    if (output_cotangent.rows() != out.rows() || output_cotangent.cols() != out.cols())
        throw ShapeError("cotangent shape does not match output shape");

    BackwardResult r;
    r.grads.weights.resize(layer_count());
    r.grads.biases.resize(layer_count());

    Matrix delta = output_cotangent;
    for (std::size_t l = layer_count(); l-- > 0;) {
        if (activations_[l] == Activation::relu)
            delta = (tape.activations[l + 1].array() > 0.0).select(delta, 0.0);
        const Matrix& in = tape.activations[l];
        r.grads.weights[l].noalias() = in.transpose() * delta;
        r.grads.biases[l] = delta.colwise().sum();
        Matrix next(delta.rows(), params_.weights[l].rows());
        next.noalias() = delta * params_.weights[l].transpose();
        delta = std::move(next);
    }
    if (has_embedding()) {
        r.grads.embedding = Matrix::Zero(params_.embedding.rows(), params_.embedding.cols());
        for (std::size_t i = 0; i < tape.indices.size(); ++i)
            r.grads.embedding.row(static_cast<Eigen::Index>(tape.indices[i])) += delta.row(static_cast<Eigen::Index>(i));
    } else {
        r.grads.embedding.resize(0, 0);
    }
    r.input_cotangent = std::move(delta);
    return r;
}

void DenseNetwork::set_parameters(const ParameterSet& p) {
    if (!p.same_shape(params_)) throw ShapeError("parameter set shape mismatch");
    mutable_parameters() = p;
}

void DenseNetwork::set_parameters(std::span<const double> flat) { mutable_parameters().assign(flat); }

bool DenseNetwork::operator==(const DenseNetwork& o) const {
    return activations_ == o.activations_ && params_.same_shape(o.params_) &&
           params_.flatten() == o.params_.flatten();
}

// ---------------------------------------------------------------------------
// Adam

AdamState::AdamState(const DenseNetwork& net, double learning_rate, double beta1, double beta2, double epsilon)
    : m_(net.parameters()), v_(net.parameters()), lr_(learning_rate), beta1_(beta1), beta2_(beta2), eps_(epsilon) {
    if (!(learning_rate > 0.0)) throw InvalidSpecError("learning rate must be positive");
    m_.set_zero();
    v_.set_zero();
}

void AdamState::reset() {
    m_.set_zero();
    v_.set_zero();
    step_ = 0;
}

void AdamState::step(DenseNetwork& net, const ParameterSet& grads) {
    if (!grads.same_shape(m_) || !grads.same_shape(net.parameters()))
        throw ShapeError("gradient shape does not match optimizer state");
    ++step_;
    const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(step_));
    const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(step_));
    ParameterSet& p = net.mutable_parameters();

    auto update = [&](auto& param, const auto& g, auto& m, auto& v) {
        m = beta1_ * m + (1.0 - beta1_) * g;
        v = beta2_ * v + (1.0 - beta2_) * g.cwiseProduct(g);
        param.array() -= lr_ * (m.array() / c1) / ((v.array() / c2).sqrt() + eps_);
    };
    if (p.embedding.size() > 0) update(p.embedding, grads.embedding, m_.embedding, v_.embedding);
    for (std::size_t i = 0; i < p.weights.size(); ++i) {
        update(p.weights[i], grads.weights[i], m_.weights[i], v_.weights[i]);
        update(p.biases[i], grads.biases[i], m_.biases[i], v_.biases[i]);
    }
}

// ---------------------------------------------------------------------------
// Checkpoints

namespace {

constexpr std::string_view kMagic = "MCNN1\n";

void put_f64(std::string& out, double v) {
    auto bits = std::bit_cast<std::uint64_t>(v);
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xFFu));
}

double get_f64(std::string_view bytes, std::size_t pos) {
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i)
        bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[pos + static_cast<std::size_t>(i)]))
                << (8 * i);
    return std::bit_cast<double>(bits);
}

class LineReader {
public:
    explicit LineReader(std::string_view bytes) : bytes_(bytes) {}

    std::string_view line() {
        const auto end = bytes_.find('\n', pos_);
        if (end == std::string_view::npos) throw ParseError("unterminated header line", pos_);
        auto l = bytes_.substr(pos_, end - pos_);
        pos_ = end + 1;
        return l;
    }
    std::size_t pos() const { return pos_; }

private:
    std::string_view bytes_;
    std::size_t pos_ = 0;
};

}  // namespace

std::string checkpoint_save(const DenseNetwork& net) {
    std::string out(kMagic);
    out += "layers=" + std::to_string(net.layer_count()) + " embed=" + (net.has_embedding() ? "1" : "0") + "\n";
    if (net.has_embedding())
        out += "embedding " + std::to_string(net.vocab()) + " " + std::to_string(net.input_width()) + "\n";
    for (std::size_t l = 0; l < net.layer_count(); ++l)
        out += std::to_string(net.layer_in(l)) + " " + std::to_string(net.layer_out(l)) + " " +
               std::string(to_string(net.activation(l))) + "\n";
    for (double v : net.parameters().flatten()) put_f64(out, v);
    return out;
}

DenseNetwork checkpoint_load(std::string_view bytes) {
    if (bytes.size() < kMagic.size() || bytes.substr(0, kMagic.size()) != kMagic)
        throw ParseError("missing MCNN1 magic", 0);
    LineReader reader(bytes.substr(kMagic.size()));
    const std::size_t base = kMagic.size();

    std::size_t start = base + reader.pos();
    std::istringstream header{std::string(reader.line())};
    std::string layers_field, embed_field;
    header >> layers_field >> embed_field;
    if (layers_field.rfind("layers=", 0) != 0 || embed_field.rfind("embed=", 0) != 0)
        throw ParseError("malformed header line", start);
    std::size_t layer_count = 0;
    try {
        layer_count = std::stoul(layers_field.substr(7));
    } catch (const std::exception&) {
        throw ParseError("bad layer count", start);
    }
    const std::string embed_flag = embed_field.substr(6);
    if (embed_flag != "0" && embed_flag != "1") throw ParseError("embed flag must be 0 or 1", start);
    if (layer_count == 0) throw ParseError("checkpoint declares zero layers", start);

    std::optional<EmbeddingSpec> embedding;
    if (embed_flag == "1") {
        start = base + reader.pos();
        std::istringstream l{std::string(reader.line())};
        std::string tag;
        EmbeddingSpec e{0, 0};
        if (!(l >> tag >> e.vocab >> e.width) || tag != "embedding" || e.vocab == 0 || e.width == 0)
            throw ParseError("malformed embedding line", start);
        embedding = e;
    }

    std::size_t input_width = 0;
    std::vector<LayerSpec> specs;
    for (std::size_t i = 0; i < layer_count; ++i) {
        start = base + reader.pos();
        std::istringstream l{std::string(reader.line())};
        std::size_t in = 0, out = 0;
        std::string act;
        if (!(l >> in >> out >> act) || in == 0 || out == 0) throw ParseError("malformed layer line", start);
        if (i == 0) input_width = in;
        else if (in != specs.back().width) throw ParseError("layer widths are not chained", start);
        try {
            specs.push_back({out, activation_from_string(act)});
        } catch (const InvalidSpecError&) {
            throw ParseError("unknown activation '" + act + "'", start);
        }
    }
    if (embedding && embedding->width != input_width)
        throw ParseError("embedding width disagrees with first layer", base);

    DenseNetwork net;
    try {
        net = DenseNetwork::create(input_width, specs, embedding, InitScheme::glorot(), 0);
    } catch (const Error& e) {
        throw ParseError(e.what(), base);
    }
    const std::size_t payload = base + reader.pos();
    const std::size_t expected = net.parameter_count() * 8;
    if (bytes.size() - payload != expected)
        throw ParseError("declared " + std::to_string(net.parameter_count()) + " parameters but payload holds " +
                             std::to_string((bytes.size() - payload) / 8) + " (" +
                             std::to_string(bytes.size() - payload) + " bytes)",
                         payload);
    std::vector<double> flat(net.parameter_count());
    for (std::size_t i = 0; i < flat.size(); ++i) flat[i] = get_f64(bytes, payload + 8 * i);
    net.params_.assign(flat);
    net.version_ = 0;
    return net;
}

void checkpoint_write_file(const DenseNetwork& net, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot open '" + path + "' for writing");
    const auto bytes = checkpoint_save(net);
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw Error("failed writing '" + path + "'");
}

DenseNetwork checkpoint_read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error("cannot open checkpoint '" + path + "'");
    std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    return checkpoint_load(bytes);
}

}  // namespace mineco
