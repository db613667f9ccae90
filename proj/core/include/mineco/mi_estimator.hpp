#pragma once

// Neural lower bounds on I(X;Y) from paired samples.
//
// A statistic network T scores concatenated pairs [x | y]. From 2k joint
// draws (x_i, y_i), the first k are kept as joint samples and the marginal
// samples pair x_i with y_{i+k}. Two bounds are provided:
//
//   Donsker-Varadhan:  mean_i T(x_i, y_i) - log mean_i exp T(x_i, y_{i+k})
//   f-divergence:      mean_i T(x_i, y_i) - mean_i exp(T(x_i, y_{i+k}) - 1)
//
// On any fixed pair of score vectors the DV value is >= the f-divergence
// value, because log u <= u/e for u > 0.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mineco/nn.hpp"

namespace mineco {

enum class EstimatorKind { donsker_varadhan, f_divergence };

std::string to_string(EstimatorKind kind);
EstimatorKind estimator_kind_from_string(const std::string& s);

struct MiEstimate {
    double nats = 0.0;
    double bits = 0.0;
    EstimatorKind kind = EstimatorKind::donsker_varadhan;
    std::size_t k = 0;

    static MiEstimate from_nats(double nats, EstimatorKind kind, std::size_t k);
};

/// T(x, y): input width 4n, relu hidden layers, one linear output.
class StatisticNetwork {
public:
    static constexpr double kInitStddev = 0.05;

    static StatisticNetwork create(std::size_t length, std::size_t hidden_width, std::uint64_t seed,
                                   std::size_t hidden_layers = 2);
    static StatisticNetwork from_network(DenseNetwork net);

    std::size_t length() const { return net_.input_width() / 4; }
    std::size_t hidden_width() const { return net_.layer_out(0); }

    const DenseNetwork& network() const { return net_; }
    DenseNetwork& network() { return net_; }

private:
    explicit StatisticNetwork(DenseNetwork net) : net_(std::move(net)) {}
    DenseNetwork net_;
};

/// Joint rows [x_i | y_i] and marginal rows [x_i | y_{i+k}], each k x 4n.
struct SampleBatch {
    std::size_t k = 0;
    Matrix joint;
    Matrix marginal;
};

/// `x` and `y` are the 2k paired signals, [2k x 2n] each.
/// Throws DegenerateInputError for an odd batch or k < 2.
SampleBatch split_joint_marginal(const Matrix& x, const Matrix& y);

/// Scalar estimator value from the two score vectors, in nats.
double dv_value(std::span<const double> joint_scores, std::span<const double> marginal_scores);
double fdiv_value(std::span<const double> joint_scores, std::span<const double> marginal_scores);
double estimator_value(EstimatorKind kind, std::span<const double> joint_scores,
                       std::span<const double> marginal_scores);

/// d value / d score for both halves.
std::pair<Matrix, Matrix> estimator_score_cotangents(EstimatorKind kind, std::span<const double> joint_scores,
                                                     std::span<const double> marginal_scores);

struct EstimatorEvaluation {
    MiEstimate estimate;
    ForwardResult joint;
    ForwardResult marginal;
};

EstimatorEvaluation dv_estimate(const StatisticNetwork& tnet, const SampleBatch& batch);
EstimatorEvaluation fdiv_estimate(const StatisticNetwork& tnet, const SampleBatch& batch);
EstimatorEvaluation estimate(EstimatorKind kind, const StatisticNetwork& tnet, const SampleBatch& batch);

struct EstimatorGradients {
    ParameterSet theta;   // d value / d theta
    Matrix x_cotangent;   // [2k x 2n]; rows >= k are zero (their x is dropped)
    Matrix y_cotangent;   // [2k x 2n]; row i < k from the joint term, row i + k from marginal pair i
};

/// Exact gradients of the evaluated estimator value (the ascent direction).
EstimatorGradients estimator_gradients(const StatisticNetwork& tnet, const EstimatorEvaluation& eval);

/// Produces 2k fresh paired samples (x, y), each [2k x 2n].
using SampleSource = std::function<std::pair<Matrix, Matrix>(std::size_t batch_2k)>;

struct StatisticTrainingResult {
    std::vector<double> trace_nats;
    std::optional<std::string> abort_reason;
};

/// Adam ascent of the estimator value over theta. `state`, when given, is
/// used and left updated; otherwise a fresh one is created at `lr`.
StatisticTrainingResult train_statistic_network(StatisticNetwork& tnet, const SampleSource& source,
                                                std::size_t iterations, std::size_t batch_2k, double lr,
                                                EstimatorKind kind = EstimatorKind::donsker_varadhan,
                                                AdamState* state = nullptr);

struct MiSummary {
    double mean_nats = 0.0;
    double mean_bits = 0.0;
    double stderr_bits = 0.0;
    std::vector<double> batch_bits;
};

/// Averages the estimator over `batches` fresh evaluation batches. The
/// standard error is the sample standard deviation over sqrt(batches).
MiSummary evaluate_mi(EstimatorKind kind, const StatisticNetwork& tnet, const SampleSource& source,
                      std::size_t batches, std::size_t batch_2k);

/// Value-trace CSV `iteration,value_nats,value_bits`.
void write_value_trace_csv(std::span<const double> trace_nats, const std::string& path,
                           std::size_t first_iteration = 0);

}  // namespace mineco
