#include "mineco/mi_estimator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "mineco/csv.hpp"
#include "mineco/errors.hpp"

namespace mineco {

std::string to_string(EstimatorKind kind) {
    return kind == EstimatorKind::donsker_varadhan ? "donsker_varadhan" : "f_divergence";
}

EstimatorKind estimator_kind_from_string(const std::string& s) {
    if (s == "donsker_varadhan" || s == "dv") return EstimatorKind::donsker_varadhan;
    if (s == "f_divergence" || s == "fdiv") return EstimatorKind::f_divergence;
    throw InvalidSpecError("unknown estimator kind '" + s + "'");
}

MiEstimate MiEstimate::from_nats(double nats, EstimatorKind kind, std::size_t k) {
    return {nats, nats / std::numbers::ln2, kind, k};
}

StatisticNetwork StatisticNetwork::create(std::size_t length, std::size_t hidden_width, std::uint64_t seed,
                                          std::size_t hidden_layers) {
    if (length == 0) throw InvalidSpecError("block length must be >= 1");
    std::vector<LayerSpec> layers(hidden_layers, LayerSpec{hidden_width, Activation::relu});
    layers.push_back({1, Activation::linear});
    return StatisticNetwork(
        DenseNetwork::create(4 * length, layers, std::nullopt, InitScheme::gaussian(kInitStddev), seed));
}

StatisticNetwork StatisticNetwork::from_network(DenseNetwork net) {
    if (net.has_embedding() || net.output_width() != 1 || net.input_width() % 4 != 0)
        throw InvalidSpecError("statistic network needs dense input of width 4n and a scalar output");
    if (net.activation(net.layer_count() - 1) != Activation::linear)
        throw InvalidSpecError("statistic network output must be linear");
    return StatisticNetwork(std::move(net));
}

SampleBatch split_joint_marginal(const Matrix& x, const Matrix& y) {
    if (x.rows() != y.rows() || x.cols() != y.cols()) throw ShapeError("x and y batches differ in shape");
    if (x.rows() % 2 != 0) throw DegenerateInputError("joint batch size must be even");
    const Eigen::Index k = x.rows() / 2;
    if (k < 2) throw DegenerateInputError("need k >= 2 joint samples");
    const Eigen::Index w = x.cols();
    SampleBatch b;
    b.k = static_cast<std::size_t>(k);
    b.joint.resize(k, 2 * w);
    b.marginal.resize(k, 2 * w);
    b.joint.leftCols(w) = x.topRows(k);
    b.joint.rightCols(w) = y.topRows(k);
    b.marginal.leftCols(w) = x.topRows(k);
    b.marginal.rightCols(w) = y.bottomRows(k);
    return b;
}

namespace {

double mean(std::span<const double> v) {
    double s = 0.0;
    for (double t : v) s += t;
    return s / static_cast<double>(v.size());
}

void require_scores(std::span<const double> joint, std::span<const double> marginal) {
    if (joint.empty() || marginal.empty()) throw ShapeError("empty score vector");
    for (double t : joint)
        if (std::isnan(t)) throw NanAbortError("NaN in joint scores");
    for (double t : marginal)
        if (std::isnan(t)) throw NanAbortError("NaN in marginal scores");
}

}  // namespace

double dv_value(std::span<const double> joint, std::span<const double> marginal) {
    require_scores(joint, marginal);
    const double shift = *std::max_element(marginal.begin(), marginal.end());
    double acc = 0.0;
    for (double t : marginal) acc += std::exp(t - shift);
    const double log_mean_exp = shift + std::log(acc / static_cast<double>(marginal.size()));
    return mean(joint) - log_mean_exp;
}

double fdiv_value(std::span<const double> joint, std::span<const double> marginal) {
    require_scores(joint, marginal);
    double acc = 0.0;
    for (double t : marginal) acc += std::exp(t - 1.0);
    return mean(joint) - acc / static_cast<double>(marginal.size());
}

double estimator_value(EstimatorKind kind, std::span<const double> joint, std::span<const double> marginal) {
    return kind == EstimatorKind::donsker_varadhan ? dv_value(joint, marginal) : fdiv_value(joint, marginal);
}

std::pair<Matrix, Matrix> estimator_score_cotangents(EstimatorKind kind, std::span<const double> joint,
                                                     std::span<const double> marginal) {
    require_scores(joint, marginal);
    const auto kj = static_cast<Eigen::Index>(joint.size());
    const auto km = static_cast<Eigen::Index>(marginal.size());
    Matrix dj = Matrix::Constant(kj, 1, 1.0 / static_cast<double>(kj));
    Matrix dm(km, 1);
    if (kind == EstimatorKind::donsker_varadhan) {
        // -softmax over the marginal scores.
        const double shift = *std::max_element(marginal.begin(), marginal.end());
        double total = 0.0;
        for (Eigen::Index i = 0; i < km; ++i) {
            dm(i, 0) = std::exp(marginal[static_cast<std::size_t>(i)] - shift);
            total += dm(i, 0);
        }
        dm /= -total;
    } else {
        for (Eigen::Index i = 0; i < km; ++i)
            dm(i, 0) = -std::exp(marginal[static_cast<std::size_t>(i)] - 1.0) / static_cast<double>(km);
    }
    return {std::move(dj), std::move(dm)};
}

namespace {

std::span<const double> scores(const ForwardResult& r) {
    return {r.output.data(), static_cast<std::size_t>(r.output.size())};
}

}  // namespace

EstimatorEvaluation estimate(EstimatorKind kind, const StatisticNetwork& tnet, const SampleBatch& batch) {
    if (batch.k < 2 || static_cast<std::size_t>(batch.joint.rows()) != batch.k ||
        static_cast<std::size_t>(batch.marginal.rows()) != batch.k)
        throw DegenerateInputError("sample batch halves must both hold k >= 2 rows");
    EstimatorEvaluation e;
    e.joint = tnet.network().forward(batch.joint);
    e.marginal = tnet.network().forward(batch.marginal);
    const double nats = estimator_value(kind, scores(e.joint), scores(e.marginal));
    e.estimate = MiEstimate::from_nats(nats, kind, batch.k);
    return e;
}

EstimatorEvaluation dv_estimate(const StatisticNetwork& tnet, const SampleBatch& batch) {
    return estimate(EstimatorKind::donsker_varadhan, tnet, batch);
}

EstimatorEvaluation fdiv_estimate(const StatisticNetwork& tnet, const SampleBatch& batch) {
    return estimate(EstimatorKind::f_divergence, tnet, batch);
}

EstimatorGradients estimator_gradients(const StatisticNetwork& tnet, const EstimatorEvaluation& eval) {
    const auto [dj, dm] = estimator_score_cotangents(eval.estimate.kind, scores(eval.joint), scores(eval.marginal));
    auto bj = tnet.network().backward(eval.joint.tape, dj);
    auto bm = tnet.network().backward(eval.marginal.tape, dm);

    EstimatorGradients g;
    g.theta = std::move(bj.grads);
    g.theta += bm.grads;

    const Eigen::Index k = static_cast<Eigen::Index>(eval.estimate.k);
    const Eigen::Index w = bj.input_cotangent.cols() / 2;
    g.x_cotangent = Matrix::Zero(2 * k, w);
    g.y_cotangent.resize(2 * k, w);
    g.x_cotangent.topRows(k) = bj.input_cotangent.leftCols(w) + bm.input_cotangent.leftCols(w);
    g.y_cotangent.topRows(k) = bj.input_cotangent.rightCols(w);
    g.y_cotangent.bottomRows(k) = bm.input_cotangent.rightCols(w);
    return g;
}

StatisticTrainingResult train_statistic_network(StatisticNetwork& tnet, const SampleSource& source,
                                                std::size_t iterations, std::size_t batch_2k, double lr,
                                                EstimatorKind kind, AdamState* state) {
    AdamState local;
    if (!state) {
        local = AdamState(tnet.network(), lr);
        state = &local;
    } else {
        state->set_learning_rate(lr);
    }
    StatisticTrainingResult result;
    result.trace_nats.reserve(iterations);
    for (std::size_t it = 0; it < iterations; ++it) {
        try {
            auto [x, y] = source(batch_2k);
            const auto batch = split_joint_marginal(x, y);
            const auto eval = estimate(kind, tnet, batch);
            auto grads = estimator_gradients(tnet, eval);
            grads.theta *= -1.0;
            state->step(tnet.network(), grads.theta);
            result.trace_nats.push_back(eval.estimate.nats);
        } catch (const NanAbortError& e) {
            result.abort_reason = std::string("aborted at iteration ") + std::to_string(it) + ": " + e.what();
            break;
        }
    }
    return result;
}

MiSummary evaluate_mi(EstimatorKind kind, const StatisticNetwork& tnet, const SampleSource& source,
                      std::size_t batches, std::size_t batch_2k) {
    if (batches == 0) throw InvalidSpecError("need at least one evaluation batch");
    MiSummary s;
    for (std::size_t b = 0; b < batches; ++b) {
        auto [x, y] = source(batch_2k);
        const auto e = estimate(kind, tnet, split_joint_marginal(x, y));
        s.batch_bits.push_back(e.estimate.bits);
        s.mean_nats += e.estimate.nats;
    }
    const double n = static_cast<double>(batches);
    s.mean_nats /= n;
    s.mean_bits = s.mean_nats / std::numbers::ln2;
    if (batches > 1) {
        double var = 0.0;
        for (double v : s.batch_bits) var += (v - s.mean_bits) * (v - s.mean_bits);
        var /= n - 1.0;
        s.stderr_bits = std::sqrt(var / n);
    }
    return s;
}

void write_value_trace_csv(std::span<const double> trace, const std::string& path, std::size_t first) {
    CsvWriter csv(path, {"iteration", "value_nats", "value_bits"});
    for (std::size_t i = 0; i < trace.size(); ++i) csv.row(first + i, trace[i], trace[i] / std::numbers::ln2);
}

}  // namespace mineco
