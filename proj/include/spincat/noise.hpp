#pragma once

#include "spincat/cat_code.hpp"
#include "spincat/gates.hpp"
#include "spincat/spin.hpp"

#include <string>
#include <vector>

namespace spincat {

// Collective rates in units of gamma_tot.
struct NoiseParams {
    double gamma_plus = 0.0;
    double gamma_minus = 0.0;
    double gamma_z = 0.0;

    double eta() const { return gamma_z / (gamma_plus + gamma_minus); }
    double total() const { return gamma_plus + gamma_minus + gamma_z; }
    NoiseParams swapped() const { return {gamma_minus, gamma_plus, gamma_z}; }
};

// Equal split of the ladder rate; normalized to gamma_tot = 1 unless told otherwise.
NoiseParams bias_rates(double eta, bool normalized = true);

struct Channel {
    std::vector<Mat> kraus;

    Mat apply(const Mat& rho) const;
    // Largest |entry| of sum K^dagger K - 1.
    double completeness_error() const;
    bool trace_preserving(double tol = 1e-8) const { return completeness_error() <= tol; }
};

// Pushes a channel through a joint (electron x ensemble) density matrix.
Mat apply_to_ensemble(const Channel& c, const Mat& joint_rho, SpinLength s);

struct RecoveredWord {
    ErrorWord word;
    int rank = 0;  // accepted columns (2, or fewer after dropping dependent images)
};

// Each accepted error word owns an orthonormal pair w_{j,0}, w_{j,1} that is mapped back onto
// the orthonormalized codewords. Kraus operator j is sum_b |c_b><w_{j,b}|.
struct RecoveryMap {
    SpinLength spin;
    int k = 0;
    int l = 0;
    Mat codewords;                 // d x 2, Lowdin-orthonormalized |0_L>, |1_L>
    std::vector<Mat> frames;       // d x 2 each; a dropped column is zero
    std::vector<RecoveredWord> words;
    std::vector<std::string> dropped;

    Channel channel() const;
    // Weight of rho outside the span of the accepted images.
    double failure_weight(const Mat& rho) const;
    // <psi_L| R(rho) |psi_L> for a logical amplitude pair.
    double fidelity(const Mat& rho, const Eigen::Vector2cd& psi) const;
    // Same for an ensemble (x) electron state against target amplitudes t(2b + e).
    double joint_fidelity(const Vec& joint, const Eigen::Vector4cd& target) const;
};

RecoveryMap ideal_recovery(const CatCode& code, int k, int l, double rank_tol = 1e-10);

enum class BlochAverage { two_point, weighted };

// F = (F_0 + F_+)/2, or (F_0 + 2 F_+)/3 with BlochAverage::weighted.
double avg_logical_fidelity(const CatCode& code, const Channel& channel, const RecoveryMap& recovery,
                            BlochAverage how = BlochAverage::two_point);
// Evolved logical inputs already in hand (rho_0 from |0_L>, rho_plus from |+_L>).
double avg_logical_fidelity(const RecoveryMap& recovery, const Mat& rho_0, const Mat& rho_plus,
                            BlochAverage how = BlochAverage::two_point);

// Normalized E|psi>; throws if E annihilates the state.
DickeVector inject_error(const DickeVector& state, const ErrorWord& word);
JointState inject_error(const JointState& state, const ErrorWord& word);

}  // namespace spincat
