#include "mineco/training_snr.hpp"

#include <algorithm>

#include "mineco/errors.hpp"

namespace mineco {

void TrainingSnr::validate() const {
    if (lo > hi) throw InvalidSpecError("training SNR range has lo > hi");
    if (scale == Scale::ebn0_db && !(rate > 0.0)) throw DomainError("rate must be positive for an Eb/N0 spec");
    if (scale == Scale::noise_variance && lo < 0.0) throw DomainError("noise variance must be >= 0");
    if (scale == Scale::snr_linear && !(lo > 0.0)) throw DomainError("linear SNR must be positive");
}

double TrainingSnr::variance_at(double value) const {
    switch (scale) {
        case Scale::ebn0_db: return noise_variance_from_snr(SnrSpec::ebn0(value, rate));
        case Scale::snr_db: return noise_variance_from_snr(SnrSpec::linear_snr(db_to_linear(value)));
        case Scale::snr_linear: return noise_variance_from_snr(SnrSpec::linear_snr(value));
        case Scale::noise_variance: return value;
    }
    return value;
}

double TrainingSnr::sample(CounterRng& rng, double progress) const {
    validate();
    switch (mode) {
        case Mode::fixed: return variance_at(hi);
        case Mode::uniform_range: return variance_at(lo + (hi - lo) * rng.uniform());
        case Mode::ramp: return variance_at(lo + (hi - lo) * std::clamp(progress, 0.0, 1.0));
    }
    return variance_at(hi);
}

}  // namespace mineco
