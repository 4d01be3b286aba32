#include "mgsim/phasor.hpp"

#include <stdexcept>

namespace mgsim {

Complex alpha() {
    // exp(j 2π/3)
    return Complex(-0.5, 0.5 * std::sqrt(3.0));
}

Complex alpha2() {
    return Complex(-0.5, -0.5 * std::sqrt(3.0));
}

Phasor Phasor::from_polar_deg(double magnitude, double angle_deg) {
    return from_polar_rad(magnitude, angle_deg * pi() / 180.0);
}

Phasor Phasor::from_polar_rad(double magnitude, double angle_rad) {
    if (magnitude < 0.0)
        throw std::invalid_argument("Phasor: negative magnitude in polar form");
    return Phasor(std::polar(magnitude, angle_rad));
}

SequenceSet fortescue_decompose(const ThreePhase& x) {
    const Complex a = alpha();
    const Complex a2 = alpha2();
    SequenceSet s;
    s.pos = (x.a + a * x.b + a2 * x.c) / 3.0;
    s.neg = (x.a + a2 * x.b + a * x.c) / 3.0;
    s.zero = (x.a + x.b + x.c) / 3.0;
    return s;
}

ThreePhase fortescue_compose(const SequenceSet& s) {
    const Complex a = alpha();
    const Complex a2 = alpha2();
    ThreePhase x;
    x.a = s.pos + s.neg + s.zero;
    x.b = a2 * s.pos + a * s.neg + s.zero;
    x.c = a * s.pos + a2 * s.neg + s.zero;
    return x;
}

ThreePhase balanced_three_phase(Complex phase_a) {
    return {phase_a, alpha2() * phase_a, alpha() * phase_a};
}

} // namespace mgsim
