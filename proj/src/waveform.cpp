#include "mgsim/waveform.hpp"

#include <cmath>

#include "mgsim/errors.hpp"

namespace mgsim {

double instantaneous(Complex rms_phasor, double omega, double t) {
    return std::sqrt(2.0) * (rms_phasor * std::polar(1.0, omega * t)).real();
}

std::vector<MeasurementSample> synthesize_waveforms(const std::vector<PhasorSegment>& segments,
                                                    double f0, double fs, double duration) {
    if (fs < 20.0 * f0)
        throw BadSamplingRate("sampling rate below 20x system frequency");
    double ratio = fs / f0;
    if (std::abs(ratio - std::round(ratio)) > 1e-9)
        throw BadSamplingRate("sampling rate must be an integer multiple of system frequency");
    if (segments.empty() || segments.front().t_start > 0.0)
        throw ScenarioError("waveform synthesis needs a segment covering t = 0");

    const double omega = 2.0 * pi() * f0;
    const double dt = 1.0 / fs;
    const std::size_t n = static_cast<std::size_t>(std::llround(duration * fs));
    std::vector<MeasurementSample> out;
    out.reserve(n);
    std::size_t seg = 0;
    for (std::size_t k = 0; k < n; ++k) {
        double t = static_cast<double>(k) * dt;
        while (seg + 1 < segments.size() && segments[seg + 1].t_start <= t + 1e-12) ++seg;
        const PhasorSegment& s = segments[seg];
        MeasurementSample m;
        m.t = t;
        m.va = instantaneous(s.v.a, omega, t);
        m.vb = instantaneous(s.v.b, omega, t);
        m.vc = instantaneous(s.v.c, omega, t);
        m.ia = instantaneous(s.i.a, omega, t);
        m.ib = instantaneous(s.i.b, omega, t);
        m.ic = instantaneous(s.i.c, omega, t);
        out.push_back(m);
    }
    return out;
}

PhasorEstimate estimate_phasors(std::span<const MeasurementSample> window, double f0) {
    if (window.size() < 2) throw ShortWindow("phasor window too short");
    double dt = window[1].t - window[0].t;
    double span = static_cast<double>(window.size()) * dt;
    double cycles = span * f0;
    if (std::abs(cycles - std::round(cycles)) > 1e-6 || cycles < 0.999)
        throw ShortWindow("phasor window must span whole cycles");

    const double omega = 2.0 * pi() * f0;
    Complex acc[6] = {};
    for (const auto& s : window) {
        Complex k = std::polar(1.0, -omega * s.t);
        acc[0] += s.va * k;
        acc[1] += s.vb * k;
        acc[2] += s.vc * k;
        acc[3] += s.ia * k;
        acc[4] += s.ib * k;
        acc[5] += s.ic * k;
    }
    const double scale = std::sqrt(2.0) / static_cast<double>(window.size());
    for (auto& a : acc) a *= scale;
    return {{acc[0], acc[1], acc[2]}, {acc[3], acc[4], acc[5]}};
}

SlidingPhasorEstimator::SlidingPhasorEstimator(std::size_t window_samples, double f0, double fs)
    : window_(window_samples), kernel_(window_samples), omega_(2.0 * pi() * f0) {
    if (window_samples < 2) throw ShortWindow("sliding window too short");
    double cycles = static_cast<double>(window_samples) * f0 / fs;
    if (std::abs(cycles - std::round(cycles)) > 1e-6)
        throw ShortWindow("sliding window must span whole cycles");
    for (auto& s : sums_) s = Complex(0.0, 0.0);
}

void SlidingPhasorEstimator::push(const MeasurementSample& s) {
    Complex k_new = std::polar(1.0, -omega_ * s.t);
    if (count_ >= window_.size()) {
        const MeasurementSample& old = window_[head_];
        Complex k_old = kernel_[head_];
        sums_[0] -= old.va * k_old;
        sums_[1] -= old.vb * k_old;
        sums_[2] -= old.vc * k_old;
        sums_[3] -= old.ia * k_old;
        sums_[4] -= old.ib * k_old;
        sums_[5] -= old.ic * k_old;
    }
    window_[head_] = s;
    kernel_[head_] = k_new;
    sums_[0] += s.va * k_new;
    sums_[1] += s.vb * k_new;
    sums_[2] += s.vc * k_new;
    sums_[3] += s.ia * k_new;
    sums_[4] += s.ib * k_new;
    sums_[5] += s.ic * k_new;
    head_ = (head_ + 1) % window_.size();
    if (count_ < window_.size()) ++count_;
}

PhasorEstimate SlidingPhasorEstimator::estimate() const {
    const double scale = std::sqrt(2.0) / static_cast<double>(window_.size());
    return {{sums_[0] * scale, sums_[1] * scale, sums_[2] * scale},
            {sums_[3] * scale, sums_[4] * scale, sums_[5] * scale}};
}

} // namespace mgsim
