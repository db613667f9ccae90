#include <benchmark/benchmark.h>

#include "mineco/channel.hpp"
#include "mineco/encoder.hpp"
#include "mineco/mi_estimator.hpp"
#include "mineco/trainer.hpp"

using namespace mineco;

namespace {

Matrix normal_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
    CounterRng rng(seed);
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
    return m;
}

void BM_StatisticForwardBackward(benchmark::State& state) {
    const auto k = static_cast<Eigen::Index>(state.range(0));
    auto tnet = StatisticNetwork::create(1, 20, 1);
    const Matrix in = normal_matrix(k, 4, 2);
    const Matrix cot = Matrix::Ones(k, 1);
    for (auto _ : state) {
        auto fwd = tnet.network().forward(in);
        benchmark::DoNotOptimize(tnet.network().backward(fwd.tape, cot));
    }
    state.SetItemsProcessed(state.iterations() * k);
}
BENCHMARK(BM_StatisticForwardBackward)->Arg(100)->Arg(1000);

void BM_DvEstimate(benchmark::State& state) {
    const auto b = static_cast<Eigen::Index>(state.range(0));
    auto tnet = StatisticNetwork::create(1, 20, 1);
    const auto batch = split_joint_marginal(normal_matrix(b, 2, 3), normal_matrix(b, 2, 4));
    for (auto _ : state) benchmark::DoNotOptimize(dv_estimate(tnet, batch).estimate.nats);
}
BENCHMARK(BM_DvEstimate)->Arg(200)->Arg(2000);

void BM_Awgn(benchmark::State& state) {
    const auto x = SignalBatch::zeros(static_cast<std::size_t>(state.range(0)), 1);
    CounterRng rng(5);
    for (auto _ : state) benchmark::DoNotOptimize(awgn_transmit(x, 0.1, rng));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Awgn)->Arg(10000);

void BM_EncoderAscentStep(benchmark::State& state) {
    auto enc = Encoder::create({16, 1, 0, {}}, 1);
    auto tnet = StatisticNetwork::create(1, 20, 2);
    AdamState adam(enc.network(), 0.001);
    CounterRng rng(6);
    const auto batch = static_cast<std::size_t>(state.range(0));
    for (auto _ : state)
        benchmark::DoNotOptimize(
            encoder_ascent_step(enc, tnet, adam, EstimatorKind::donsker_varadhan, batch, 0.05, rng));
}
BENCHMARK(BM_EncoderAscentStep)->Arg(100)->Arg(1000);

}  // namespace

BENCHMARK_MAIN();
