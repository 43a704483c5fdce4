#pragma once

#include "spincat/cat_code.hpp"
#include "spincat/spin.hpp"

#include <string>
#include <variant>
#include <vector>

namespace spincat {

// Electron {down, up} tensor ensemble (M = I..-I); index = e * (2I+1) + r.
struct JointState {
    SpinLength spin;
    Vec amp;

    int ens_dim() const { return spin.dim(); }
    Vec block(int electron) const { return amp.segment(electron * spin.dim(), spin.dim()); }
};

JointState product_state(cplx down, cplx up, const DickeVector& ens);
// Reduced ensemble state and electron populations.
Mat ensemble_density(const JointState& s);
Mat ensemble_density(const Mat& rho, SpinLength s);
Mat electron_density(const JointState& s);
Mat electron_density(const Mat& rho, SpinLength s);

struct HamiltonianTerms {
    double omega_e = 0.0;
    double omega_n = 0.0;
    double a = 0.0;
    double a_nc = 0.0;
};

namespace gate {
struct Theta { double angle; };
// exp(-i angle/2 sigma_axis) on the electron when the ensemble is in m_set.
struct CondR { Axis axis; double angle; MSet m_set; };
// Rabi block {|dn, M+1>, |up, M>} with unit coupling g_M.
struct FlipFlop { double t; double m; };
// Rabi block {|dn, M-1>, |up, M>}.
struct FlipFlip { double t; double m; };
struct Ux { double angle; };
struct Uy { double angle; };
struct EnsR { Axis axis; double angle; };
struct Pi { double phi; };
struct FreeEvolve { double t; HamiltonianTerms h; };
struct ResetElectron {};
}  // namespace gate

using GateOp = std::variant<gate::Theta, gate::CondR, gate::FlipFlop, gate::FlipFlip, gate::Ux,
                            gate::Uy, gate::EnsR, gate::Pi, gate::FreeEvolve, gate::ResetElectron>;

struct Circuit {
    std::string name;
    std::string note;
    std::vector<GateOp> ops;
    cplx tracked_phase = 1.0;  // known global phase of the ideal logical action

    Circuit& add(GateOp op) {
        ops.push_back(std::move(op));
        return *this;
    }
    Circuit& append(const Circuit& other);
    bool is_unitary() const;
};

std::string gate_name(const GateOp& g);
bool is_unitary(const GateOp& g);

Mat gate_unitary(const GateOp& g, SpinLength s);
Mat circuit_unitary(const Circuit& c, SpinLength s);
GateOp dagger(const GateOp& g);
Circuit dagger(const Circuit& c);

Circuit pi_gate(double phi);

JointState apply_gate(const GateOp& g, const JointState& s);
JointState apply_circuit(const Circuit& c, const JointState& s);
Mat apply_gate(const GateOp& g, const Mat& rho, SpinLength s);
Mat apply_circuit(const Circuit& c, const Mat& rho, SpinLength s);
Mat reset_electron(const Mat& rho, SpinLength s);
// Applies a unitary circuit to every column of a (2(2I+1)) x n block.
void apply_circuit_columns(const Circuit& c, Mat& columns, SpinLength s);

double flipflop_coupling(SpinLength s, double m);
double flipflip_coupling(SpinLength s, double m);

}  // namespace spincat
