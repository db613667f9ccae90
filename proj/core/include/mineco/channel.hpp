#pragma once

// Complex AWGN channel with unit-power normalisation.
//
// Signals travel as row-major real matrices of shape [batch x 2n], each row
// holding n complex symbols interleaved as (re_0, im_0, re_1, im_1, ...).
//
// Power normalisation is the batch average: the mean of |x_i|^2 over every
// symbol of every codeword in the batch is brought to 1. The per-codeword
// constraint (1/n) sum_i |x_i(m)|^2 <= P therefore holds only in expectation;
// evaluation reports the worst per-codeword power so the gap is visible.

#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>

#include "mineco/nn.hpp"
#include "mineco/rng.hpp"

namespace mineco {

class SignalBatch {
public:
    SignalBatch() = default;
    /// `iq` must have an even, nonzero column count and finite entries.
    explicit SignalBatch(Matrix iq);

    static SignalBatch zeros(std::size_t batch, std::size_t length);

    std::size_t batch() const { return static_cast<std::size_t>(iq_.rows()); }
    std::size_t length() const { return static_cast<std::size_t>(iq_.cols() / 2); }

    std::complex<double> at(std::size_t row, std::size_t symbol) const {
        const auto r = static_cast<Eigen::Index>(row);
        const auto c = static_cast<Eigen::Index>(2 * symbol);
        return {iq_(r, c), iq_(r, c + 1)};
    }
    void set(std::size_t row, std::size_t symbol, std::complex<double> v) {
        const auto r = static_cast<Eigen::Index>(row);
        const auto c = static_cast<Eigen::Index>(2 * symbol);
        iq_(r, c) = v.real();
        iq_(r, c + 1) = v.imag();
    }

    const Matrix& iq() const { return iq_; }
    Matrix& iq() { return iq_; }

    /// Mean |x_i|^2 over the batch and the block.
    double mean_power() const;
    /// Largest per-codeword average power (1/n) sum_i |x_i(m)|^2.
    double max_codeword_power() const;

private:
    Matrix iq_;
};

struct ChannelParams {
    double noise_variance = 0.0;  // total complex variance: re and im each get half
    std::uint64_t seed = 0;
};

/// Either Eb/N0 in dB with a rate in bits per complex channel use, or a linear P/sigma^2.
struct SnrSpec {
    enum class Kind { ebn0_db, linear };
    Kind kind = Kind::linear;
    double value = 1.0;
    double rate = 1.0;

    static SnrSpec ebn0(double db, double rate_bits) { return {Kind::ebn0_db, db, rate_bits}; }
    static SnrSpec linear_snr(double snr) { return {Kind::linear, snr, 1.0}; }
};

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }

/// Additive noise matrix with i.i.d. N(0, sigma^2/2) entries.
Matrix awgn_noise(std::size_t batch, std::size_t length, double noise_variance, CounterRng& rng);

/// y = x + z. Throws DomainError for negative variance.
SignalBatch awgn_transmit(const SignalBatch& x, double noise_variance, CounterRng& rng);
SignalBatch awgn_transmit(const SignalBatch& x, const ChannelParams& params);

struct NormalizedBatch {
    SignalBatch signal;
    double scale = 1.0;  // sqrt of the input mean power
};

/// x / sqrt(mean power). Throws DegenerateInputError on an all-zero batch.
NormalizedBatch normalize_power(const SignalBatch& x);

/// Pulls a cotangent on the normalised output back to the raw input.
Matrix normalize_power_backward(const Matrix& raw, double scale, const Matrix& output_cotangent);

/// With unit symbol energy: sigma^2 = 1/snr, or 1/(R * EbN0_linear).
double noise_variance_from_snr(const SnrSpec& spec);

/// log2(1 + snr) bits per complex channel use.
double capacity_awgn(double snr_linear);

}  // namespace mineco
