#include "mineco/channel.hpp"

#include <cmath>
#include <string>

#include "mineco/errors.hpp"

namespace mineco {

SignalBatch::SignalBatch(Matrix iq) : iq_(std::move(iq)) {
    if (iq_.cols() == 0 || iq_.cols() % 2 != 0)
        throw ShapeError("signal matrix needs an even, nonzero number of columns");
    check_finite(iq_, "signal batch");
}

SignalBatch SignalBatch::zeros(std::size_t batch, std::size_t length) {
    if (length == 0) throw ShapeError("signal length must be >= 1");
    SignalBatch s;
    s.iq_ = Matrix::Zero(static_cast<Eigen::Index>(batch), static_cast<Eigen::Index>(2 * length));
    return s;
}

double SignalBatch::mean_power() const {
    if (iq_.size() == 0) return 0.0;
    return iq_.squaredNorm() / static_cast<double>(batch() * length());
}

double SignalBatch::max_codeword_power() const {
    double worst = 0.0;
    for (Eigen::Index r = 0; r < iq_.rows(); ++r)
        worst = std::max(worst, iq_.row(r).squaredNorm() / static_cast<double>(length()));
    return worst;
}

Matrix awgn_noise(std::size_t batch, std::size_t length, double noise_variance, CounterRng& rng) {
    if (!(noise_variance >= 0.0)) throw DomainError("noise variance must be >= 0");
    Matrix z(static_cast<Eigen::Index>(batch), static_cast<Eigen::Index>(2 * length));
    const double sd = std::sqrt(noise_variance / 2.0);
    for (Eigen::Index r = 0; r < z.rows(); ++r) {
        for (Eigen::Index c = 0; c < z.cols(); c += 2) {
            const auto [a, b] = rng.normal_pair();
            z(r, c) = sd * a;
            z(r, c + 1) = sd * b;
        }
    }
    return z;
}

SignalBatch awgn_transmit(const SignalBatch& x, double noise_variance, CounterRng& rng) {
    if (!(noise_variance >= 0.0)) throw DomainError("noise variance must be >= 0");
    if (noise_variance == 0.0) return x;
    Matrix y = x.iq() + awgn_noise(x.batch(), x.length(), noise_variance, rng);
    return SignalBatch(std::move(y));
}

SignalBatch awgn_transmit(const SignalBatch& x, const ChannelParams& params) {
    CounterRng rng(params.seed);
    return awgn_transmit(x, params.noise_variance, rng);
}

NormalizedBatch normalize_power(const SignalBatch& x) {
    const double p = x.mean_power();
    if (!(p > 0.0)) throw DegenerateInputError("cannot normalise an all-zero batch");
    const double scale = std::sqrt(p);
    NormalizedBatch out;
    out.scale = scale;
    out.signal = SignalBatch(Matrix(x.iq() / scale));
    return out;
}

Matrix normalize_power_backward(const Matrix& raw, double scale, const Matrix& g) {
    // x = u / s with s^2 = |u|^2 / N, so dx/du = I/s - u u^T / (N s^3).
    const double count = static_cast<double>(raw.size()) / 2.0;
    const double dot = (raw.array() * g.array()).sum();
    return g / scale - raw * (dot / (count * scale * scale * scale));
}

double noise_variance_from_snr(const SnrSpec& spec) {
    if (spec.kind == SnrSpec::Kind::linear) {
        if (!(spec.value > 0.0)) throw DomainError("linear SNR must be positive");
        return 1.0 / spec.value;
    }
    if (!(spec.rate > 0.0)) throw DomainError("rate must be positive for an Eb/N0 spec");
    return 1.0 / (spec.rate * db_to_linear(spec.value));
}

double capacity_awgn(double snr_linear) {
    if (!(snr_linear >= 0.0)) throw DomainError("SNR must be >= 0, got " + std::to_string(snr_linear));
    return std::log2(1.0 + snr_linear);
}

}  // namespace mineco
