#pragma once

#include "spincat/noise.hpp"
#include "spincat/spin.hpp"

#include <stdexcept>

namespace spincat {

// d rho/dt = -i[H, rho] + sum_m gamma_m (L rho L^dag - {L^dag L, rho}/2), L in {I+, I-, Iz}.
struct LindbladModel {
    SpinLength spin;
    NoiseParams noise;
    Mat hamiltonian;  // empty means H = 0
    bool ladder_recycling = true;  // false keeps only the no-jump part of the ladder terms

    LindbladModel(SpinLength s, NoiseParams n, Mat h = {}) : spin(s), noise(n), hamiltonian(std::move(h)) {}
    bool diagonal_hamiltonian() const;
};

// Full right-hand side. The banded version works element-wise and is OpenMP-parallel over
// columns; the reference version is a serial dense-matrix transcription.
Mat lindblad_rhs(const LindbladModel& model, const Mat& rho);
Mat lindblad_rhs_reference(const LindbladModel& model, const Mat& rho);

struct SolverOptions {
    double step_norm = 0.05;   // ||explicit part|| * dt
    double trace_tol = 1e-8;
    int max_halvings = 4;
    bool symmetrize = true;
};

struct EvolveResult {
    Mat rho;
    double trace_drift = 0.0;
    double dt = 0.0;
    long steps = 0;
};

class NumericalFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Lawson RK4: dephasing and a diagonal H are integrated exactly, the ladder terms explicitly.
EvolveResult lindblad_evolve(const LindbladModel& model, const Mat& rho0, double t, const SolverOptions& opts = {});
// Plain RK4 on the dense reference RHS; for cross-checks at small dimension.
EvolveResult lindblad_evolve_reference(const LindbladModel& model, const Mat& rho0, double t, double dt);

// Norm estimate of the explicit (ladder) part, used to size the step.
double ladder_rate_bound(const LindbladModel& model);

}  // namespace spincat
