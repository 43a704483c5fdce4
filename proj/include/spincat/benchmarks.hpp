#pragma once

#include "spincat/lindblad.hpp"
#include "spincat/noise.hpp"
#include "spincat/protocols.hpp"

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace spincat {

struct BenchmarkConfig {
    int n_components = 6;
    int spin = 60;
    double eta = 10.0;
    double f_target = 0.999;
    double tau_hi = 1e3;      // search cap in 1/gamma_tot
    double rel_width = 1e-3;  // bisection stopping width
    int l_min = 0;
    int l_max = -1;           // -1: sweep up to 2I/N + 2
    int k = -1;               // -1: ladder order of the code
    bool swap_ladder = false;
    BlochAverage average = BlochAverage::two_point;
    SolverOptions solver{};

    double epsilon() const { return 1.0 - f_target; }
};

struct TauMaxResult {
    double tau_max = 0.0;
    int l_used = 0;
    double fidelity = 0.0;  // at tau_max
    bool unbounded = false;
    int evaluations = 0;
    double max_trace_drift = 0.0;
};

// Largest idle time tau with recovered F_avg >= F_target, l swept per tau.
TauMaxResult tau_max(const BenchmarkConfig& cfg);

// Recovered F_avg after an idle time tau for every l in [l_min, l_max]; index 0 is l_min.
std::vector<double> recovered_fidelity_sweep(const BenchmarkConfig& cfg, double tau);

double dicke_time(double eta, int spin, double eps);
double dicke_infidelity(double t, double eta, int spin);

enum class JumpAccounting { first_jump, full_channel };

// Average infidelity (six cardinal inputs) of the {|I,-I>, |I,-I+1>} encoding under the
// collective Lindblad model. first_jump counts any ladder jump as a failure.
double dicke_lindblad_infidelity(double t, double eta, int spin, JumpAccounting how);

struct ImprovementResult {
    TauMaxResult tau;
    double t_dicke = 0.0;
    double ratio = 0.0;
};

ImprovementResult improvement_ratio(const BenchmarkConfig& cfg);

// Published improvement factors at I = 210 for N in {6, 10}, eta in {10, 100, 1000}.
std::optional<double> table_one_reference(int n_components, double eta);

struct FTGateReport {
    LogicalGate gate;
    std::string word;
    std::array<double, 4> fidelity{};  // inputs |0>, |1>, |+>, |->
    bool annihilated = false;

    double worst() const;
    double spread() const;
};

// Inject E on the codeword, run the gate circuit, recover ideally, compare with the ideal action.
// The electron starts in (|dn> + |up>)/sqrt(2).
FTGateReport ft_gate_test(LogicalGate gate, const ErrorWord& word, const ProtocolParams& p, int k, int l);

}  // namespace spincat
