#pragma once

// Dense feed-forward networks with hand-written reverse mode and Adam.
//
// Batches are row-major [batch x width]. A layer stores its weight as
// [in x out] so the forward map is  out = act(in * W + b).

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace mineco {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowVector = Eigen::Matrix<double, 1, Eigen::Dynamic>;

enum class Activation { relu, linear };

std::string_view to_string(Activation a);
Activation activation_from_string(std::string_view s);

struct LayerSpec {
    std::size_t width;
    Activation activation;
};

struct EmbeddingSpec {
    std::size_t vocab;
    std::size_t width;
};

/// Weight initialisation. Biases always start at zero.
struct InitScheme {
    enum class Kind { gaussian, glorot_uniform };
    Kind kind = Kind::glorot_uniform;
    double stddev = 0.05;

    static InitScheme gaussian(double stddev) { return {Kind::gaussian, stddev}; }
    static InitScheme glorot() { return {Kind::glorot_uniform, 0.0}; }
};

/// Same layout as the trainable state of a DenseNetwork; used for parameters,
/// gradients and optimizer moments alike.
struct ParameterSet {
    Matrix embedding;  // empty when the network has no embedding table
    std::vector<Matrix> weights;
    std::vector<RowVector> biases;

    std::size_t size() const;
    void set_zero();
    bool same_shape(const ParameterSet& other) const;
    ParameterSet& operator+=(const ParameterSet& other);
    ParameterSet& operator*=(double s);

    std::vector<double> flatten() const;
    void assign(std::span<const double> flat);
    double squared_norm() const;
};

/// Activations recorded by one forward pass.
struct GradientTape {
    std::uint64_t version = 0;
    std::vector<std::size_t> indices;  // embedding lookups, empty for dense input
    std::vector<Matrix> activations;   // activations[0] is the layer-0 input
};

struct ForwardResult {
    Matrix output;
    GradientTape tape;
};

struct BackwardResult {
    ParameterSet grads;
    Matrix input_cotangent;  // w.r.t. the dense input (embedded rows when embedding is used)
};

class DenseNetwork {
public:
    /// Builds a network. With an embedding, `input_width` must equal the
    /// embedding width or be zero.
    static DenseNetwork create(std::size_t input_width, std::span<const LayerSpec> layers,
                               std::optional<EmbeddingSpec> embedding, InitScheme init,
                               std::uint64_t seed);

    /// Throws ShapeError on width mismatch and NanAbortError if any output is NaN.
    ForwardResult forward(const Matrix& input) const;
    ForwardResult forward(std::span<const std::size_t> indices) const;

    /// Reverse pass for a scalar loss whose derivative w.r.t. the output is
    /// `output_cotangent`. Throws StaleTapeError if the parameters changed
    /// since `tape` was recorded.
    BackwardResult backward(const GradientTape& tape, const Matrix& output_cotangent) const;

    bool has_embedding() const { return params_.embedding.size() > 0; }
    std::size_t vocab() const { return static_cast<std::size_t>(params_.embedding.rows()); }
    std::size_t input_width() const { return static_cast<std::size_t>(params_.weights.front().rows()); }
    std::size_t output_width() const { return static_cast<std::size_t>(params_.weights.back().cols()); }
    std::size_t layer_count() const { return params_.weights.size(); }
    std::size_t layer_in(std::size_t i) const { return static_cast<std::size_t>(params_.weights[i].rows()); }
    std::size_t layer_out(std::size_t i) const { return static_cast<std::size_t>(params_.weights[i].cols()); }
    Activation activation(std::size_t i) const { return activations_[i]; }

    std::size_t parameter_count() const { return params_.size(); }
    const ParameterSet& parameters() const { return params_; }

    /// Replaces all parameters. Shapes must match. Invalidates outstanding tapes.
    void set_parameters(const ParameterSet& p);
    void set_parameters(std::span<const double> flat);

    /// Incremented on every mutation; tapes remember the value they were made under.
    std::uint64_t version() const { return version_; }

    bool operator==(const DenseNetwork& other) const;

private:
    DenseNetwork() = default;
    ForwardResult run_layers(Matrix input, std::vector<std::size_t> indices) const;
    ParameterSet& mutable_parameters() {
        ++version_;
        return params_;
    }

    ParameterSet params_;
    std::vector<Activation> activations_;
    std::uint64_t version_ = 0;

    friend class AdamState;
    friend DenseNetwork checkpoint_load(std::string_view bytes);
};

/// Adam with bias correction. Holds first/second moments shaped like the network.
class AdamState {
public:
    AdamState() = default;
    AdamState(const DenseNetwork& net, double learning_rate, double beta1 = 0.9, double beta2 = 0.999,
              double epsilon = 1e-8);

    /// One descent step: theta <- theta - lr * m_hat / (sqrt(v_hat) + eps).
    void step(DenseNetwork& net, const ParameterSet& grads);

    void reset();

    double learning_rate() const { return lr_; }
    void set_learning_rate(double lr) { lr_ = lr; }
    std::uint64_t steps() const { return step_; }
    const ParameterSet& first_moment() const { return m_; }
    const ParameterSet& second_moment() const { return v_; }

private:
    ParameterSet m_;
    ParameterSet v_;
    std::uint64_t step_ = 0;
    double lr_ = 1e-3;
    double beta1_ = 0.9;
    double beta2_ = 0.999;
    double eps_ = 1e-8;
};

inline void adam_step(DenseNetwork& net, const ParameterSet& grads, AdamState& state) {
    state.step(net, grads);
}

/// Portable checkpoint. Layout:
///   "MCNN1\n"
///   "layers=<k> embed=<0|1>\n"
///   "embedding <vocab> <width>\n"          (only when embed=1)
///   "<in> <out> <activation>\n"            (k lines)
///   little-endian float64 parameters: embedding table, then per layer the
///   [in x out] weight followed by the bias, all row-major.
std::string checkpoint_save(const DenseNetwork& net);
DenseNetwork checkpoint_load(std::string_view bytes);

void checkpoint_write_file(const DenseNetwork& net, const std::string& path);
DenseNetwork checkpoint_read_file(const std::string& path);

/// Throws NanAbortError naming `where` if m contains a NaN.
void check_finite(const Matrix& m, std::string_view where);

}  // namespace mineco
