#ifndef MGSIM_PHASOR_HPP
#define MGSIM_PHASOR_HPP

#include <cmath>
#include <complex>

namespace mgsim {

using Complex = std::complex<double>;

inline constexpr double pi() { return 3.141592653589793238462643383279502884; }

/// Rotation operator 1∠120°.
Complex alpha();
/// 1∠240°, i.e. alpha squared.
Complex alpha2();

/// Single-frequency RMS phasor. Stored rectangular; polar accessors
/// normalize the angle to (-pi, pi].
class Phasor {
public:
    Phasor() : v_(0.0, 0.0) {}
    explicit Phasor(Complex v) : v_(v) {}

    /// Polar constructor, angle in degrees. Magnitude must be >= 0.
    static Phasor from_polar_deg(double magnitude, double angle_deg);
    /// Polar constructor, angle in radians. Magnitude must be >= 0.
    static Phasor from_polar_rad(double magnitude, double angle_rad);

    Complex value() const { return v_; }
    double magnitude() const { return std::abs(v_); }
    double angle_rad() const { return v_ == Complex(0.0, 0.0) ? 0.0 : std::arg(v_); }
    double angle_deg() const { return angle_rad() * 180.0 / pi(); }

    Phasor operator+(const Phasor& o) const { return Phasor(v_ + o.v_); }
    Phasor operator-(const Phasor& o) const { return Phasor(v_ - o.v_); }
    Phasor operator*(Complex c) const { return Phasor(v_ * c); }
    Phasor operator*(double s) const { return Phasor(v_ * s); }

private:
    Complex v_;
};

/// One three-phase quantity (all entries share the same unit; a set is
/// built either from voltages or from currents, never a mix).
struct ThreePhase {
    Complex a{0.0, 0.0};
    Complex b{0.0, 0.0};
    Complex c{0.0, 0.0};

    ThreePhase operator+(const ThreePhase& o) const { return {a + o.a, b + o.b, c + o.c}; }
    ThreePhase operator-(const ThreePhase& o) const { return {a - o.a, b - o.b, c - o.c}; }
    ThreePhase operator*(Complex s) const { return {a * s, b * s, c * s}; }
};

/// Symmetrical components of a three-phase set.
struct SequenceSet {
    Complex pos{0.0, 0.0};
    Complex neg{0.0, 0.0};
    Complex zero{0.0, 0.0};

    SequenceSet operator+(const SequenceSet& o) const { return {pos + o.pos, neg + o.neg, zero + o.zero}; }
    SequenceSet operator-(const SequenceSet& o) const { return {pos - o.pos, neg - o.neg, zero - o.zero}; }
    SequenceSet operator*(Complex s) const { return {pos * s, neg * s, zero * s}; }
};

/// Forward transform: pos = (a + α b + α² c)/3, neg = (a + α² b + α c)/3,
/// zero = (a + b + c)/3.
SequenceSet fortescue_decompose(const ThreePhase& abc);

/// Inverse transform: a = pos + neg + zero, b = α² pos + α neg + zero,
/// c = α pos + α² neg + zero.
ThreePhase fortescue_compose(const SequenceSet& seq);

/// A balanced positive-sequence triple built from the phase-a phasor.
ThreePhase balanced_three_phase(Complex phase_a);

} // namespace mgsim

#endif
