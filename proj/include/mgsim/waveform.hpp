#ifndef MGSIM_WAVEFORM_HPP
#define MGSIM_WAVEFORM_HPP

#include <cstddef>
#include <span>
#include <vector>

#include "mgsim/phasor.hpp"

namespace mgsim {

/// One instantaneous reading of all six channels at a measurement point.
struct MeasurementSample {
    double t = 0.0;
    double va = 0.0, vb = 0.0, vc = 0.0;
    double ia = 0.0, ib = 0.0, ic = 0.0;
};

/// Steady phasors holding from t_start until the next segment.
struct PhasorSegment {
    double t_start = 0.0;
    ThreePhase v; // RMS volts
    ThreePhase i; // RMS amperes
};

double instantaneous(Complex rms_phasor, double omega, double t);

/// Samples x(t) = √2·Re(X e^{jωt}) over [0, duration), stitching segments
/// at their start times. Segments must be sorted; the first must start at
/// or before 0. Throws BadSamplingRate when fs < 20·f0 or fs/f0 is not an
/// integer.
std::vector<MeasurementSample> synthesize_waveforms(const std::vector<PhasorSegment>& segments,
                                                    double f0, double fs, double duration);

struct PhasorEstimate {
    ThreePhase v;
    ThreePhase i;
};

/// Single-frequency correlation over a window spanning a whole number of
/// cycles; returns RMS phasors. Throws ShortWindow otherwise.
PhasorEstimate estimate_phasors(std::span<const MeasurementSample> window, double f0);

/// Sliding single-bin correlator over the last N samples, O(1) per sample.
class SlidingPhasorEstimator {
public:
    SlidingPhasorEstimator(std::size_t window_samples, double f0, double fs);

    void push(const MeasurementSample& s);
    bool full() const { return count_ >= window_.size(); }
    PhasorEstimate estimate() const;

private:
    std::vector<MeasurementSample> window_;
    std::vector<Complex> kernel_; // e^{-jω t} per slot
    std::size_t head_ = 0;
    std::size_t count_ = 0;
    double omega_;
    Complex sums_[6];
};

} // namespace mgsim

#endif
