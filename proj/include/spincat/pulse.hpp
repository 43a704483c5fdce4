#pragma once

#include "spincat/spin.hpp"

#include <optional>
#include <string>
#include <vector>

namespace spincat {

struct Tone {
    double detuning = 0.0;   // Delta_k = omega_k - omega_e
    double phase = 0.0;      // phi_k
    double amplitude = 0.0;  // Omega_k
};

enum class TransverseAxis { x, y };

// Angular frequencies in units of a = 1.
struct DriveParams {
    double omega = 0.0;  // Rabi amplitude for single-tone gates
    double delta = 0.0;  // detuning for single-tone gates
    double omega_e = 1000.0;
    double omega_n = 10.0;
    double a = 1.0;
    double a_nc = 0.1;
    TransverseAxis nc_axis = TransverseAxis::y;
    std::vector<Tone> tones;
};

// Joint electron (x) ensemble operators, electron order (down, up), index e * (2I+1) + r.
Mat electron_op(SpinLength s, Axis axis);            // S_axis (x) 1
Mat coupled_op(SpinLength s, Axis e, Component n);   // S_e (x) I_n

// omega_n Iz + a Sz Iz + a_nc Sz I_{x|y} + sum_k Omega_k [cos(D_k t + phi_k) Sx + sin(D_k t + phi_k) Sy]
Mat h_rwa(SpinLength s, const DriveParams& p, double t);
// Returns a message when some tone violates Omega << omega_k + omega_e.
std::optional<std::string> rwa_warning(const DriveParams& p, double ratio = 0.1);

// Square modulation f(t) in {+1, -1} over one period [0, 2 tau).
struct PulseSequence {
    double tau = 1.0;
    std::vector<double> switches;  // strictly increasing, in [0, 2 tau)
    int initial_sign = 1;

    double period() const { return 2.0 * tau; }
    int value(double t) const;
    void validate() const;
    // Piecewise-constant segments (start, end, sign) covering one period.
    struct Segment {
        double start;
        double end;
        int sign;
    };
    std::vector<Segment> segments() const;
};

PulseSequence square_wave(double tau, int harmonic);
// Same modulation delayed by dt (mod the period).
PulseSequence shifted(const PulseSequence& seq, double dt);
// Advance by a quarter period of harmonic l, tau / (2 l). A sin-type sequence becomes its cos-type
// partner with P_l' = Q_l; the cos-type form drives S_z I_x and keeps the toggling phase zero-mean.
PulseSequence quarter_shifted(const PulseSequence& seq, int harmonic);

struct FourierResult {
    double tau = 1.0;
    std::vector<double> p;  // P_l, l = 0..l_max
    std::vector<double> q;  // Q_l

    double omega(int l) const { return pi * l / tau; }
};

// P_l, Q_l = (1/tau) int_0^{2tau} f(t) {cos, sin}(pi l t / tau) dt, integrated exactly per segment.
FourierResult fourier_coeffs(const PulseSequence& seq, int l_max);
// Midpoint-rule reference for the same integrals.
FourierResult fourier_coeffs_quadrature(const PulseSequence& seq, int l_max, int samples);

struct OptimizeResult {
    PulseSequence sequence;
    double q = 0.0;
    double p = 0.0;
    bool budget_limited = false;  // best found misses the constraint or the Q floor
};

// Maximize |Q_l| with |P_l| <= p_tol over sequences with at most max_switches per period.
// Sequences are kept odd about t = 0, which forces every P_l to vanish.
OptimizeResult optimize_sequence(int l_target = 2, double tau = 1.0, int max_switches = 8, double p_tol = 1e-3,
                                 double q_floor = 0.6);

struct EngineeredRotation {
    double fidelity = 0.0;            // against the ideal conditional rotation at the predicted strength
    double fitted_fidelity = 0.0;     // against the ideal at the fitted strength and axis
    double effective_strength = 0.0;  // fitted, per unit S_z (x) I_axis
    double predicted_strength = 0.0;  // a_nc * sqrt(P_l^2 + Q_l^2) / 2
    double axis_angle = 0.0;          // fitted in-plane axis, radians from +x
    double predicted_axis = 0.0;
    double duration = 0.0;
    int periods = 0;
};

// Exact piecewise propagation of omega_n Iz + f(t) Sz (omega_e + a Iz + a_nc Ix) with the pulse
// period matched to omega_l = omega_n, compared with exp(-i theta Sz (x) I_axis).
EngineeredRotation engineered_rotation_sim(const PulseSequence& seq, int harmonic, SpinLength s,
                                           const DriveParams& p, double theta_target);

// Phase compensation for tone k: (psi / Omega_k * a k) mod 2 pi.
double compensation_phase(double psi, double omega_k, double a, double k);

// Electron precession phase tracked through ensemble pi pulses every tau.
double xy8_resonance_track(double a, double k, double tau, double t);
// The schedule exactly as printed: (-1)^n a k t + (-1)^n 2 tau a k floor(n/2).
double xy8_resonance_track_literal(double a, double k, double tau, double t);

struct BlockReport {
    double m = 0.0;
    bool targeted = false;
    double fidelity = 0.0;  // targeted blocks: against the ideal rotation; others: against identity
    double leakage = 0.0;   // spin-flip probability from |dn, M>
    double bound = 0.0;     // Omega^2 / (Omega^2 + delta'^2) for the nearest tone
};

struct MultitoneOptions {
    bool xy8 = false;
    bool track = true;       // follow the flipped resonance during XY8
    int xy8_cycles = 1;      // number of 8-pulse blocks
    double steps_per_unit = 0.0;  // 0: (50 max||H||) rule
};

struct MultitoneResult {
    double duration = 0.0;
    std::vector<BlockReport> blocks;
    bool tone_collision = false;
    double frame_fidelity = 0.0;  // |Tr(U0^dag U)|^2 / D^2 over the whole space


    double worst_target_fidelity() const;
    double worst_leakage() const;
};

// Rotation by psi about x (tone phase 0) on every M in targets, one tone per target with amplitude
// p.omega and detuning a*M. Fidelities are taken in the frame of the undriven diagonal dynamics.
MultitoneResult multitone_cond_rotation(SpinLength s, const DriveParams& p, const std::vector<double>& targets,
                                        double psi, const MultitoneOptions& opts = {});

// 1 - |Tr(U_0^dag U)|^2 / D^2 between the same driven run with and without a_nc.
double nc_sensitivity(SpinLength s, const DriveParams& p, const std::vector<double>& targets, double psi,
                      const MultitoneOptions& opts = {});

enum class SidebandDirection { raise, lower };  // nuclear M -> M + 1 or M - 1 while the electron flips up

struct SidebandResult {
    double t_gate = 0.0;        // first transfer maximum in the exact simulation
    double t_closed_form = 0.0; // 2 pi / (a_nc' g)
    double fidelity = 0.0;      // population transferred
    double detuning = 0.0;      // optimized drive detuning
    double resonance = 0.0;     // closed-form omega_n +- ... resonance condition
    bool regime_ok = true;      // Omega <= 0.1 |delta|
};

double sideband_gate_time(double a_nc_eff, SpinLength s, double m, SidebandDirection dir);
double sideband_resonance(const DriveParams& p, double m, SidebandDirection dir);
// Exact propagation in the frame of the drive for |dn, M> -> |up, M +- 1>.
SidebandResult sideband_flipflop(SpinLength s, const DriveParams& p, double m, SidebandDirection dir);
double sideband_transfer(SpinLength s, const DriveParams& p, double m, SidebandDirection dir, double detuning, double t);

struct GeneratorCheck {
    double generator_residual = 0.0;  // ||[H0, G1] + V|| for G1 = +i (a_nc/omega_n) Sz Ix
    double printed_sign_residual = 0.0;  // same with the printed sign of G1
    double drive_residual = 0.0;  // ||[G1_printed, H_drive] - (a_nc Omega/omega_n)(cos Sy - sin Sx) Ix||
    double collinear_residual = 0.0;  // ||[G1_printed, a Sz Iz] + (a a_nc / 4 omega_n) Iy||
    double printed_collinear_residual = 0.0;  // same against the printed -i (a a_nc/omega_n) Sz Iy
};

GeneratorCheck sw_generator_check(SpinLength s, const DriveParams& p, double t);

}  // namespace spincat
