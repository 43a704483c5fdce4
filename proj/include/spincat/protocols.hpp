#pragma once

#include "spincat/cat_code.hpp"
#include "spincat/gates.hpp"

#include <array>
#include <string>
#include <vector>

namespace spincat {

struct ProtocolParams {
    CatCode code;
    double omega_e = 1000.0;
    double omega_n = 10.0;
    double a = 1.0;
    int k_int = 0;
    double eps_supp = 1e-6;

    explicit ProtocolParams(CatCode c) : code(std::move(c)) {}
    HamiltonianTerms collinear() const { return {omega_e, omega_n, a, 0.0}; }
};

// Nominal splitting angles 2 arccos(sqrt((n-i)/(n-i+1))), i = 1..N/2.
std::vector<double> encoding_angles(int n_components);

struct EncodingCalibration {
    std::vector<double> angles;        // calibrated on the simulated state
    std::vector<double> nominal;       // arccos form
    double phase_fix = 0.0;            // CondR(z) angle on {-I} aligning the |1_L> branch
    cplx output_phase = 1.0;           // <0_L| encode(|dn>|I,I>)
    double max_angle_deviation = 0.0;  // |calibrated - nominal|
    double split_shortfall = 0.0;      // largest unreachable down-weight in a splitting step
};

EncodingCalibration calibrate_encoding(const CatCode& code);

Circuit twocat_stage(const EncodingCalibration& cal, const CatCode& code);
Circuit splitting_stage(const EncodingCalibration& cal, const CatCode& code, const MSet& pole_set);
Circuit encode_circuit(const ProtocolParams& p);
Circuit decode_circuit(const ProtocolParams& p);

MSet gamma_set(const ProtocolParams& p, int k, int l);

enum class LogicalGate { cnot_ensemble, cnot_electron, hadamard, phase };
std::string gate_label(LogicalGate g);

Circuit cnot_ensemble_control(const ProtocolParams& p, int k, int l);
Circuit cnot_electron_control(const ProtocolParams& p);

struct HadamardChoice {
    double t_h = 0.0;
    double codespace_fidelity = 0.0;
    std::vector<std::pair<double, double>> candidates;  // (t, fidelity)
};

Circuit hadamard_circuit(const ProtocolParams& p, int k, int l, double t_h);
Circuit hadamard_circuit(const ProtocolParams& p, int k, int l);  // calibrated t_H
HadamardChoice calibrate_hadamard(const ProtocolParams& p, int k, int l);
Circuit phase_gate_circuit(const ProtocolParams& p, double theta, int k, int l);

Circuit build_logical_gate(const ProtocolParams& p, LogicalGate g, int k, int l, double theta = pi / 8.0);

// Ideal action on logical (x) electron, index 2*b + e with e = 0 for down.
// The phase gate is diag(1, e^{i theta}) for a down electron; an up electron sees the
// conjugate logical phase, i.e. exp(i theta/2 (1 - Z_L Z_e)).
Eigen::Matrix4cd ideal_action(LogicalGate g, double theta = pi / 8.0);

// Joint state for logical amplitudes c (index 2*b + e) under an optional error word.
JointState encode_logical(const CatCode& code, const Eigen::Vector4cd& c, const ErrorWord& error = {});

// Euler angles (a, b, c) with U ~ Rz(a) Ry(b) Rz(c) up to global phase, electron basis (dn, up).
std::array<double, 3> zyz_angles(const Eigen::Matrix2cd& u);

double free_time_after_flips(double t_flip, double a);
Circuit correct_pm(const ProtocolParams& p, int k, double t_flip_elapsed = 0.0);

// Physical bookkeeping for the pumping stages.
double dephasing_stage_time(int l, int k_int, double total_time, double omega_n);
double refocus_time(double phase_offset, double polarization, double omega_n);

Circuit twocat_unsplit_widened(const ProtocolParams& p, int l);
Circuit dephasing_pump_stage(const ProtocolParams& p, int l);
Circuit twocat_resplit(const ProtocolParams& p);
Circuit correct_dephasing_single(const ProtocolParams& p, int l);

// Two ensembles A and B sharing one electron; state index ((e * dA) + rA) * dB + rB.
struct TwoEnsembleState {
    SpinLength spin_a;
    SpinLength spin_b;
    Vec amp;
};

struct TransferStep {
    int ensemble;  // 0 = A, 1 = B
    Circuit circuit;
};

struct TransferCircuit {
    std::vector<TransferStep> steps;
    int cnot_count = 0;
};

inline constexpr long transfer_dimension_budget = 4000;

TransferCircuit correct_dephasing_transfer(const ProtocolParams& pa, const ProtocolParams& pb);
TwoEnsembleState apply_transfer(const TransferCircuit& c, const TwoEnsembleState& s);
TwoEnsembleState two_ensemble_product(cplx down, cplx up, const DickeVector& a, const DickeVector& b);
Mat reduced_ensemble_b(const TwoEnsembleState& s);
Mat reduced_electron(const TwoEnsembleState& s);

}  // namespace spincat
