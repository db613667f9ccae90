#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "mineco/channel.hpp"

namespace mineco {

/// Square M-QAM with unit average energy and per-axis Gray labels.
/// Point m sits at grid column m % sqrt(M) and row m / sqrt(M).
struct QamConstellation {
    std::size_t order = 0;
    std::vector<std::complex<double>> points;
    std::vector<std::uint32_t> labels;

    std::size_t side() const;
    SignalBatch as_signal() const;
};

/// M in {4, 16, 64}; anything else throws InvalidSpecError.
QamConstellation qam_table(std::size_t order);

/// Minimum-distance decision, lowest index on ties.
std::size_t qam_detect(std::complex<double> y, const QamConstellation& table);
std::vector<std::size_t> qam_detect(const SignalBatch& y, const QamConstellation& table);

/// Gaussian tail Q(x) = erfc(x / sqrt 2) / 2.
double q_function(double x);

/// Exact square-QAM symbol error probability at total complex noise variance sigma^2:
/// P = 1 - (1 - p)^2,  p = 2 (1 - 1/sqrt M) Q(sqrt(3 / ((M - 1) sigma^2))).
double qam_ser_theoretical(std::size_t order, double noise_variance);

}  // namespace mineco
