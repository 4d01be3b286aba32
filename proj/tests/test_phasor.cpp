#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "mgsim/phasor.hpp"

using namespace mgsim;

namespace {

// independent route: explicit 3x3 matrix multiplication
ThreePhase compose_by_matrix(const SequenceSet& s) {
    Complex A[3][3] = {{1.0, 1.0, 1.0}, {alpha2(), alpha(), 1.0}, {alpha(), alpha2(), 1.0}};
    Complex in[3] = {s.pos, s.neg, s.zero};
    Complex out[3] = {};
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) out[r] += A[r][c] * in[c];
    return {out[0], out[1], out[2]};
}

SequenceSet decompose_by_matrix(const ThreePhase& x) {
    Complex A[3][3] = {{1.0, alpha(), alpha2()}, {1.0, alpha2(), alpha()}, {1.0, 1.0, 1.0}};
    Complex in[3] = {x.a, x.b, x.c};
    Complex out[3] = {};
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) out[r] += A[r][c] * in[c];
    return {out[0] / 3.0, out[1] / 3.0, out[2] / 3.0};
}

double dist(Complex a, Complex b) { return std::abs(a - b); }

Complex random_complex(std::mt19937& rng, double scale) {
    std::uniform_real_distribution<double> d(-scale, scale);
    return {d(rng), d(rng)};
}

} // namespace

TEST_CASE("alpha operator identities") {
    Complex a = alpha();
    CHECK(std::abs(a * a * a - Complex(1.0, 0.0)) < 1e-12);
    CHECK(std::abs(Complex(1.0, 0.0) + a + a * a) < 1e-12);
    CHECK(std::abs(a - std::polar(1.0, 2.0 * pi() / 3.0)) < 1e-15);
}

TEST_CASE("phasor polar form") {
    Phasor p = Phasor::from_polar_deg(10.0, 120.0);
    CHECK(p.magnitude() == doctest::Approx(10.0));
    CHECK(p.angle_deg() == doctest::Approx(120.0));
    CHECK_THROWS(Phasor::from_polar_deg(-1.0, 0.0));

    // angle normalized to (-pi, pi]
    Phasor q = Phasor::from_polar_deg(1.0, 270.0);
    CHECK(q.angle_deg() == doctest::Approx(-90.0));
}

TEST_CASE("balanced positive-sequence set decomposes to pure positive") {
    ThreePhase x{std::polar(1.0, 0.0), std::polar(1.0, -2.0 * pi() / 3.0),
                 std::polar(1.0, 2.0 * pi() / 3.0)};
    SequenceSet s = fortescue_decompose(x);
    CHECK(dist(s.pos, Complex(1.0, 0.0)) < 1e-12);
    CHECK(std::abs(s.neg) < 1e-12);
    CHECK(std::abs(s.zero) < 1e-12);
}

TEST_CASE("co-phasal set is pure zero sequence") {
    ThreePhase x{Complex(1.0, 0.0), Complex(1.0, 0.0), Complex(1.0, 0.0)};
    SequenceSet s = fortescue_decompose(x);
    CHECK(std::abs(s.pos) < 1e-12);
    CHECK(std::abs(s.neg) < 1e-12);
    CHECK(dist(s.zero, Complex(1.0, 0.0)) < 1e-12);
}

TEST_CASE("single energized phase splits equally") {
    ThreePhase x{Complex(1.0, 0.0), Complex(0.0, 0.0), Complex(0.0, 0.0)};
    SequenceSet s = fortescue_decompose(x);
    CHECK(dist(s.pos, Complex(1.0 / 3.0, 0.0)) < 1e-12);
    CHECK(dist(s.neg, Complex(1.0 / 3.0, 0.0)) < 1e-12);
    CHECK(dist(s.zero, Complex(1.0 / 3.0, 0.0)) < 1e-12);
}

TEST_CASE("pure positive sequence composes to a balanced set") {
    SequenceSet s{Complex(1.0, 0.0), Complex(0.0, 0.0), Complex(0.0, 0.0)};
    ThreePhase x = fortescue_compose(s);
    CHECK(dist(x.a, std::polar(1.0, 0.0)) < 1e-12);
    CHECK(dist(x.b, std::polar(1.0, -2.0 * pi() / 3.0)) < 1e-12);
    CHECK(dist(x.c, std::polar(1.0, 2.0 * pi() / 3.0)) < 1e-12);

    SequenceSet z{};
    ThreePhase zero = fortescue_compose(z);
    CHECK(std::abs(zero.a) + std::abs(zero.b) + std::abs(zero.c) == 0.0);
}

TEST_CASE("round trip on 1000 random triples within 1e-9 relative") {
    std::mt19937 rng(20240901);
    for (int i = 0; i < 1000; ++i) {
        ThreePhase x{random_complex(rng, 100.0), random_complex(rng, 100.0),
                     random_complex(rng, 100.0)};
        ThreePhase back = fortescue_compose(fortescue_decompose(x));
        double scale = std::max({std::abs(x.a), std::abs(x.b), std::abs(x.c), 1e-12});
        CHECK(dist(back.a, x.a) / scale < 1e-9);
        CHECK(dist(back.b, x.b) / scale < 1e-9);
        CHECK(dist(back.c, x.c) / scale < 1e-9);

        SequenceSet s{random_complex(rng, 100.0), random_complex(rng, 100.0),
                      random_complex(rng, 100.0)};
        SequenceSet round = fortescue_decompose(fortescue_compose(s));
        double sscale = std::max({std::abs(s.pos), std::abs(s.neg), std::abs(s.zero), 1e-12});
        CHECK(dist(round.pos, s.pos) / sscale < 1e-9);
        CHECK(dist(round.neg, s.neg) / sscale < 1e-9);
        CHECK(dist(round.zero, s.zero) / sscale < 1e-9);
    }
}

TEST_CASE("transforms match the explicit matrix route") {
    std::mt19937 rng(7);
    for (int i = 0; i < 200; ++i) {
        ThreePhase x{random_complex(rng, 10.0), random_complex(rng, 10.0),
                     random_complex(rng, 10.0)};
        SequenceSet s1 = fortescue_decompose(x);
        SequenceSet s2 = decompose_by_matrix(x);
        CHECK(dist(s1.pos, s2.pos) < 1e-12);
        CHECK(dist(s1.neg, s2.neg) < 1e-12);
        CHECK(dist(s1.zero, s2.zero) < 1e-12);

        SequenceSet s{random_complex(rng, 10.0), random_complex(rng, 10.0),
                      random_complex(rng, 10.0)};
        ThreePhase c1 = fortescue_compose(s);
        ThreePhase c2 = compose_by_matrix(s);
        CHECK(dist(c1.a, c2.a) < 1e-12);
        CHECK(dist(c1.b, c2.b) < 1e-12);
        CHECK(dist(c1.c, c2.c) < 1e-12);
    }
}

TEST_CASE("linearity of the decomposition") {
    std::mt19937 rng(99);
    for (int i = 0; i < 100; ++i) {
        ThreePhase x{random_complex(rng, 10.0), random_complex(rng, 10.0),
                     random_complex(rng, 10.0)};
        ThreePhase y{random_complex(rng, 10.0), random_complex(rng, 10.0),
                     random_complex(rng, 10.0)};
        SequenceSet sum = fortescue_decompose(x + y);
        SequenceSet parts = fortescue_decompose(x) + fortescue_decompose(y);
        CHECK(dist(sum.pos, parts.pos) < 1e-12);
        CHECK(dist(sum.neg, parts.neg) < 1e-12);
        CHECK(dist(sum.zero, parts.zero) < 1e-12);
    }
}

TEST_CASE("balanced triples of any magnitude and angle stay balanced") {
    std::mt19937 rng(123);
    std::uniform_real_distribution<double> mag(0.01, 1000.0);
    std::uniform_real_distribution<double> ang(-pi(), pi());
    for (int i = 0; i < 100; ++i) {
        Complex a = std::polar(mag(rng), ang(rng));
        ThreePhase x = balanced_three_phase(a);
        SequenceSet s = fortescue_decompose(x);
        CHECK(std::abs(s.neg) / std::abs(a) < 1e-12);
        CHECK(std::abs(s.zero) / std::abs(a) < 1e-12);
    }
}
