#pragma once

#include "spincat/gates.hpp"
#include "spincat/protocols.hpp"

#include <map>
#include <string>
#include <vector>

namespace spincat {

// effective: engineered rotations follow the averaged S_z I_x Hamiltonian exactly (the collinear
// correction is dropped, as in the effective-Hamiltonian picture); exact: their error is taken from
// exact piecewise propagation at the cycle's spin length.
enum class EngineeredModel { effective, exact };

// Semi-analytic timing model of one single-ensemble correction cycle (I+- stage, then I_z stage).
// Durations and error rates come from the pulse-engine gate models; idle collective noise acts
// for the whole cycle. Units: a = 1.
struct CycleConfig {
    int n_components = 6;
    int spin = 100;
    double a = 1.0;
    double a_nc = 0.1;
    double omega_n = 10.0;
    double f_target = 0.998;
    double gamma_tot = 1e-7;  // idle collective noise, in units of a
    double eta = 100.0;
    double kappa_sideband = 0.1;  // sideband drive Omega <= kappa * omega_n
    double omega_rf = 1.0;        // global nuclear rotation rate
    int harmonic = 2;             // modulation harmonic used for Theta
    int l_cap = 3;                // largest dephasing order tried
    int grid = 20;                // coarse grid points per drive amplitude
    EngineeredModel engineered = EngineeredModel::effective;
    // Sideband tones on levels whose weight in every codeword and ladder-error branch is below this
    // are left out; the dropped weight is charged to the stage error.
    double tone_cutoff = 1e-9;
};

// Per-gate allocation: multi-tone conditional drive and sideband drive amplitudes.
struct CycleAllocation {
    double omega_cond = 0.05;
    double omega_sideband = 0.1;
    int l = 1;
};

struct StageReport {
    std::string name;
    double duration = 0.0;
    double error = 0.0;  // 1 - product of layer fidelities
    int layers = 0;
};

struct CycleTiming {
    StageReport pm;
    StageReport z;
    double idle_error = 0.0;
    double tau_exec = 0.0;
    double fidelity = 0.0;
};

struct CycleResult {
    bool feasible = false;
    CycleAllocation allocation;
    CycleTiming timing;
    std::string bottleneck;  // stage with the largest irreducible error when infeasible
};

class CycleModel {
public:
    explicit CycleModel(const CycleConfig& cfg);

    const CycleConfig& config() const { return cfg_; }
    CycleTiming evaluate(const CycleAllocation& alloc) const;
    double idle_error(int l, double tau) const;
    double engineered_error(double theta) const;
    double engineered_strength() const { return g_er_; }

private:
    StageReport walk(const Circuit& c, const CycleAllocation& alloc) const;

    CycleConfig cfg_;
    ProtocolParams params_;
    double g_er_ = 0.0;
    Circuit pm_;
    std::vector<Circuit> z_;  // index l - 1
    double pm_dropped_ = 0.0;
    std::vector<double> z_dropped_;
    std::map<long, double> er_error_;
    std::vector<std::vector<double>> idle_table_;  // [l - 1][grid]
    std::vector<double> idle_log_tau_;
};

CycleResult realistic_cycle_time(const CycleConfig& cfg);

}  // namespace spincat
