#pragma once

#include "mineco/channel.hpp"
#include "mineco/rng.hpp"

namespace mineco {

/// Noise level used while training: a fixed point, a per-batch uniform dB
/// draw, or a linear dB ramp over training progress.
struct TrainingSnr {
    enum class Mode { fixed, uniform_range, ramp };
    enum class Scale { ebn0_db, snr_db, snr_linear, noise_variance };

    Mode mode = Mode::fixed;
    Scale scale = Scale::ebn0_db;
    double lo = 7.0;
    double hi = 7.0;
    double rate = 1.0;  // bits per complex channel use, for the Eb/N0 scale

    static TrainingSnr ebn0(double db, double rate_bits) {
        return {Mode::fixed, Scale::ebn0_db, db, db, rate_bits};
    }
    static TrainingSnr ebn0_range(double lo_db, double hi_db, double rate_bits) {
        return {Mode::uniform_range, Scale::ebn0_db, lo_db, hi_db, rate_bits};
    }
    static TrainingSnr linear_snr(double snr) { return {Mode::fixed, Scale::snr_linear, snr, snr, 1.0}; }
    static TrainingSnr variance(double sigma2) { return {Mode::fixed, Scale::noise_variance, sigma2, sigma2, 1.0}; }

    /// Throws InvalidSpecError when lo > hi or the scale is inconsistent.
    void validate() const;

    /// Noise variance at level `value` on this spec's scale.
    double variance_at(double value) const;

    /// Per-batch variance. `progress` in [0, 1] only matters for the ramp.
    double sample(CounterRng& rng, double progress = 0.0) const;

    /// Variance at the upper end of the range (the nominal training point).
    double nominal_variance() const { return variance_at(hi); }
};

/// Draws sigma^2 for one batch.
inline double training_snr_sample(const TrainingSnr& spec, CounterRng& rng, double progress = 0.0) {
    return spec.sample(rng, progress);
}

}  // namespace mineco
