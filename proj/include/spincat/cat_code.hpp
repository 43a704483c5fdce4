#pragma once

#include "spincat/spin.hpp"

#include <string>
#include <utility>
#include <vector>

namespace spincat {

using MSet = std::vector<double>;

class CatCode {
public:
    // N must satisfy N >= 2 and N = 2 (mod 4); I must be an integer.
    CatCode(int n_components, SpinLength spin, int dephasing_order = 0);

    int n_components() const { return n_; }
    int sectors() const { return n_ / 2; }
    SpinLength spin() const { return spin_; }
    int ladder_order() const { return (n_ - 2) / 4; }
    int dephasing_order() const { return l_; }
    void set_dephasing_order(int l);

    const DickeVector& zero() const { return zero_; }
    const DickeVector& one() const { return one_; }
    const DickeVector& codeword(int which) const { return which == 0 ? zero_ : one_; }

    // M mod N/2 mapped into [0, N/2).
    int sector_of(double m) const;

private:
    int n_;
    SpinLength spin_;
    int l_;
    DickeVector zero_;
    DickeVector one_;
};

DickeVector logical_state(const CatCode& code, int which);
// alpha |0_L> + beta |1_L>, normalized.
DickeVector logical_superposition(const CatCode& code, cplx alpha, cplx beta);

Operator sector_projector(SpinLength s, int n_components, int sector);
MSet sector_mset(SpinLength s, int n_components, int sector);
Eigen::VectorXd sector_populations(const CatCode& code, const Vec& amp);

enum class Factor { plus, minus, z };

struct ErrorWord {
    std::vector<Factor> factors;  // leftmost factor acts last

    int count(Factor f) const;
    std::string label() const;
    bool in_set(int k, int l) const;
};

ErrorWord ladder_word(int shift, int dephasing_power);  // I+^shift or I-^|shift|, times Iz^power
std::vector<ErrorWord> error_set(int k, int l);
ErrorWord parse_error_word(const std::string& text);

Mat word_matrix(const ErrorWord& w, SpinLength s);
Vec apply_word(const ErrorWord& w, SpinLength s, const Vec& amp);

// Frame where the codewords separate in Iz: rotate(logical, y, -pi/2).
DickeVector rotated_logical(const CatCode& code, int which);
inline constexpr double rotated_frame_angle = -pi / 2.0;

MSet support_gamma(const CatCode& code, int k, int l, double eps_supp);
// Closed-form ranges for N = 6 around the rotated lobes at +I and -I/2, widened by
// a width proportional to sqrt(I) and the correctable order.
MSet support_gamma_closed_form(const CatCode& code, int k, int l, double width_factor);

Operator chebyshev_op(SpinLength s, int m);

cplx kl_offdiag(const CatCode& code, const ErrorWord& ei, const ErrorWord& ej);
double kl_diag_diff(const CatCode& code, const ErrorWord& e);

int max_dephasing_order(const CatCode& code, double tol);
int max_dephasing_order_power(const CatCode& code, double tol);

struct KLFitResult {
    double alpha = 0.0;
    double beta = 0.0;
    double residual = 0.0;
    bool degenerate = false;
    std::vector<std::pair<int, int>> samples;  // (I, l_max)
};

KLFitResult fit_alpha_beta(int n_components, const std::vector<int>& spins, double tol);
KLFitResult fit_line(const std::vector<std::pair<int, int>>& samples);

}  // namespace spincat
