#include "mineco/qam.hpp"

#include <cmath>
#include <limits>

#include "mineco/errors.hpp"

namespace mineco {

std::size_t QamConstellation::side() const {
    return static_cast<std::size_t>(std::lround(std::sqrt(static_cast<double>(order))));
}

SignalBatch QamConstellation::as_signal() const {
    auto s = SignalBatch::zeros(points.size(), 1);
    for (std::size_t i = 0; i < points.size(); ++i) s.set(i, 0, points[i]);
    return s;
}

QamConstellation qam_table(std::size_t order) {
    if (order != 4 && order != 16 && order != 64)
        throw InvalidSpecError("unsupported QAM order " + std::to_string(order) + " (use 4, 16 or 64)");
    QamConstellation c;
    c.order = order;
    const std::size_t side = c.side();
    std::uint32_t axis_bits = 0;
    while ((std::size_t{1} << axis_bits) < side) ++axis_bits;
    // Mean energy of the odd-integer grid {±1, ±3, ...}^2 is 2 (M - 1) / 3.
    const double scale = 1.0 / std::sqrt(2.0 * (static_cast<double>(order) - 1.0) / 3.0);
    for (std::size_t m = 0; m < order; ++m) {
        const auto col = m % side;
        const auto row = m / side;
        const double re = 2.0 * static_cast<double>(col) - static_cast<double>(side - 1);
        const double im = 2.0 * static_cast<double>(row) - static_cast<double>(side - 1);
        c.points.emplace_back(re * scale, im * scale);
        const auto gray = [](std::size_t v) { return static_cast<std::uint32_t>(v ^ (v >> 1)); };
        c.labels.push_back(gray(col) | (gray(row) << axis_bits));
    }
    return c;
}

std::size_t qam_detect(std::complex<double> y, const QamConstellation& table) {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < table.points.size(); ++i) {
        const double d = std::norm(y - table.points[i]);
        if (d < best_d) {
            best_d = d;
            best = i;
        }
    }
    return best;
}

std::vector<std::size_t> qam_detect(const SignalBatch& y, const QamConstellation& table) {
    if (y.length() != 1) throw ShapeError("QAM detection expects one complex symbol per block");
    std::vector<std::size_t> out(y.batch());
    for (std::size_t i = 0; i < y.batch(); ++i) out[i] = qam_detect(y.at(i, 0), table);
    return out;
}

double q_function(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

double qam_ser_theoretical(std::size_t order, double noise_variance) {
    if (order != 4 && order != 16 && order != 64) throw InvalidSpecError("unsupported QAM order");
    if (!(noise_variance > 0.0)) throw DomainError("noise variance must be positive");
    const double m = static_cast<double>(order);
    const double p = 2.0 * (1.0 - 1.0 / std::sqrt(m)) * q_function(std::sqrt(3.0 / ((m - 1.0) * noise_variance)));
    return 1.0 - (1.0 - p) * (1.0 - p);
}

}  // namespace mineco
