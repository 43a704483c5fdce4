#include "spincat/pulse.hpp"

#include <doctest.h>

#include <cmath>

using namespace spincat;

namespace {

double dist(const Mat& a, const Mat& b) { return (a - b).cwiseAbs().maxCoeff(); }
Mat comm(const Mat& a, const Mat& b) { return a * b - b * a; }

}  // namespace

TEST_CASE("joint operators obey the spin algebra") {
    const auto s = SpinLength::from_value(2);
    const Mat sx = electron_op(s, Axis::x), sy = electron_op(s, Axis::y), sz = electron_op(s, Axis::z);
    CHECK(dist(comm(sx, sy), imag_unit * sz) < 1e-14);
    CHECK(dist(sz * sz, 0.25 * Mat::Identity(sz.rows(), sz.cols())) < 1e-14);
    // Electron order is (down, up): S_z is -1/2 on the first block.
    CHECK(sz(0, 0).real() == doctest::Approx(-0.5));
    const Mat nz = coupled_op(s, Axis::z, Component::z);
    CHECK(dist(nz, sz * (2.0 * coupled_op(s, Axis::z, Component::z)) * sz * 2.0) < 1e-14);
    CHECK(dist(coupled_op(s, Axis::x, Component::plus), coupled_op(s, Axis::x, Component::x) +
                                                             imag_unit * coupled_op(s, Axis::x, Component::y)) < 1e-14);
}

TEST_CASE("RWA Hamiltonian") {
    const auto s = SpinLength::from_value(1.5);
    DriveParams p;
    p.tones = {{0.5, 0.2, 0.3}, {-1.0, 1.0, 0.1}};
    const Mat h = h_rwa(s, p, 0.7);
    CHECK(dist(h, h.adjoint()) < 1e-14);
    // Drive part alone at t = 0 is sum Omega_k (cos phi_k Sx + sin phi_k Sy).
    DriveParams bare = p;
    bare.omega_n = bare.a = bare.a_nc = 0.0;
    const Mat d = h_rwa(s, bare, 0.0);
    const Mat ref = 0.3 * (std::cos(0.2) * electron_op(s, Axis::x) + std::sin(0.2) * electron_op(s, Axis::y)) +
                    0.1 * (std::cos(1.0) * electron_op(s, Axis::x) + std::sin(1.0) * electron_op(s, Axis::y));
    CHECK(dist(d, ref) < 1e-14);
    CHECK_FALSE(rwa_warning(p).has_value());
    p.tones.push_back({0.0, 0.0, 500.0});
    CHECK(rwa_warning(p).has_value());
}

TEST_CASE("square wave Fourier coefficients") {
    for (int h : {1, 2, 3}) {
        const PulseSequence seq = square_wave(1.0, h);
        CHECK_NOTHROW(seq.validate());
        const auto f = fourier_coeffs(seq, 8);
        const auto q = fourier_coeffs_quadrature(seq, 8, 200000);
        for (int l = 0; l <= 8; ++l) {
            CHECK(f.p[l] == doctest::Approx(q.p[l]).epsilon(1e-4).scale(1.0));
            CHECK(f.q[l] == doctest::Approx(q.q[l]).epsilon(1e-4).scale(1.0));
        }
        // sign(sin(pi h t / tau)) has Q_h = 4 / pi and nothing at the even multiples.
        CHECK(f.q[h] == doctest::Approx(4.0 / pi).epsilon(1e-12));
        CHECK(std::abs(f.p[h]) < 1e-12);
        CHECK(std::abs(f.q[2 * h]) < 1e-12);
        CHECK(std::abs(f.p[0]) < 1e-12);
    }
    CHECK_THROWS(square_wave(1.0, 0));
}

TEST_CASE("sequence validation and evaluation") {
    PulseSequence bad;
    bad.switches = {0.5, 0.3};
    CHECK_THROWS(bad.validate());
    bad.switches = {0.5, 2.5};
    CHECK_THROWS(bad.validate());
    const PulseSequence seq = square_wave(1.0, 1);
    CHECK(seq.value(0.5) == 1);
    CHECK(seq.value(1.5) == -1);
    CHECK(seq.value(2.5) == 1);
    double covered = 0.0;
    for (const auto& sgm : seq.segments()) covered += sgm.end - sgm.start;
    CHECK(covered == doctest::Approx(2.0));
}

TEST_CASE("shifts move the modulation and rotate the Fourier pair") {
    const PulseSequence seq = square_wave(1.0, 2);
    const PulseSequence sh = shifted(seq, 0.3);
    for (double t : {0.05, 0.41, 0.77, 1.13, 1.61, 1.99}) CHECK(sh.value(t) == seq.value(t - 0.3));
    const PulseSequence qs = quarter_shifted(seq, 2);
    const auto a = fourier_coeffs(seq, 4), b = fourier_coeffs(qs, 4);
    CHECK(std::abs(b.p[2]) == doctest::Approx(std::abs(a.q[2])).epsilon(1e-12));
    CHECK(std::abs(b.q[2]) < 1e-12);
    // The power per harmonic does not depend on the shift.
    const auto c = fourier_coeffs(shifted(seq, 0.123), 6), a6 = fourier_coeffs(seq, 6);
    for (int l = 0; l <= 6; ++l) CHECK(std::abs(std::hypot(c.p[l], c.q[l]) - std::hypot(a6.p[l], a6.q[l])) < 1e-12);
}

TEST_CASE("optimizer keeps the sequence odd") {
    const auto r = optimize_sequence(2, 1.0, 4, 1e-3, 0.0);
    CHECK_NOTHROW(r.sequence.validate());
    const auto f = fourier_coeffs(r.sequence, 4);
    for (int l = 0; l <= 4; ++l) CHECK(std::abs(f.p[l]) < 1e-12);
    CHECK(std::abs(f.q[2]) == doctest::Approx(std::abs(r.q)).epsilon(1e-12));
    CHECK(std::abs(r.q) >= 4.0 / pi - 1e-9);  // at least the plain square wave
}

TEST_CASE("XY8 resonance tracking") {
    // Oracle: integrate a k times the toggling sign (+, -, +, ...) numerically.
    const double a = 1.0, k = 3.0, tau = 0.4;
    auto integral = [&](double t) {
        const int n = 200000;
        double acc = 0.0;
        for (int i = 0; i < n; ++i) {
            const double x = (i + 0.5) * t / n;
            acc += (static_cast<int>(std::floor(x / tau)) % 2 == 0 ? 1.0 : -1.0) * a * k * t / n;
        }
        return acc;
    };
    for (double t : {0.1, 0.5, 0.9, 1.3, 2.05}) CHECK(xy8_resonance_track(a, k, tau, t) == doctest::Approx(integral(t)).epsilon(1e-4));
    // The tracked phase is continuous at the pulse times; the literal schedule jumps.
    for (int n = 1; n <= 4; ++n) {
        const double t = n * tau;
        CHECK(std::abs(xy8_resonance_track(a, k, tau, t - 1e-9) - xy8_resonance_track(a, k, tau, t)) < 1e-6);
    }
    CHECK(std::abs(xy8_resonance_track_literal(a, k, tau, tau - 1e-9) - xy8_resonance_track_literal(a, k, tau, tau)) > 1.0);
    CHECK_THROWS(xy8_resonance_track(a, k, tau, -1.0));
}

TEST_CASE("compensation phase") {
    CHECK(compensation_phase(pi, 0.5, 1.0, 1.0) == doctest::Approx(0.0).epsilon(1e-12).scale(1.0));
    CHECK(compensation_phase(1.0, 2.0, 1.0, 3.0) == doctest::Approx(1.5));
    CHECK_THROWS(compensation_phase(1.0, 0.0, 1.0, 1.0));
}

TEST_CASE("sideband closed forms") {
    const auto s = SpinLength::from_value(4);
    const double g = std::sqrt(4.0 * 5.0 - 1.0 * 2.0);
    CHECK(sideband_gate_time(0.01, s, 1.0, SidebandDirection::raise) == doctest::Approx(2.0 * pi / (0.01 * g)));
    CHECK(sideband_gate_time(0.01, s, -1.0, SidebandDirection::lower) == doctest::Approx(2.0 * pi / (0.01 * g)));
    CHECK_THROWS(sideband_gate_time(0.01, s, 4.0, SidebandDirection::raise));
    DriveParams p;
    p.omega_n = 10.0;
    CHECK(sideband_resonance(p, 1.0, SidebandDirection::raise) == doctest::Approx(11.5));
    CHECK(sideband_resonance(p, 1.0, SidebandDirection::lower) == doctest::Approx(-9.5));
    CHECK_THROWS(sideband_transfer(s, p, 4.0, SidebandDirection::raise, 0.0, 1.0));
    CHECK(sideband_transfer(s, p, 1.0, SidebandDirection::raise, 11.5, 0.0) == doctest::Approx(0.0));
}

TEST_CASE("Schrieffer-Wolff generator signs") {
    const auto s = SpinLength::from_value(3);
    DriveParams p;
    p.tones = {{0.0, 0.4, 0.2}};
    const auto r = sw_generator_check(s, p, 0.3);
    CHECK(r.generator_residual < 1e-12);
    CHECK(r.printed_sign_residual > 1e-3);
    CHECK(r.drive_residual < 1e-12);
    CHECK(r.collinear_residual < 1e-12);
    CHECK(r.printed_collinear_residual > 1e-3);
}
