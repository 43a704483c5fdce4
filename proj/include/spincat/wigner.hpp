#pragma once

#include "spincat/spin.hpp"

#include <vector>

namespace spincat {

struct SphericalGrid {
    std::vector<double> theta;  // [0, pi], strictly increasing
    std::vector<double> phi;    // [0, 2 pi), strictly increasing
};

struct SphericalField {
    SphericalGrid grid;
    Eigen::MatrixXd values;  // rows follow theta, columns follow phi
    double max_imag = 0.0;   // largest discarded imaginary part
};

SphericalGrid make_grid(int n_theta, int n_phi);

// Spherical tensor operator T_kq stored along its single nonzero diagonal:
// entry r holds <M+q|T_kq|M> for M = I - r, zero where M+q is out of range.
struct TensorDiagonal {
    int k = 0;
    int q = 0;
    std::vector<double> entries;
};

// All T_kq for one rank k, ordered q = k, k-1, ..., -k. Unit Hilbert-Schmidt norm.
std::vector<TensorDiagonal> tensor_operators(SpinLength s, int k);
Mat tensor_matrix(SpinLength s, const TensorDiagonal& t);

SphericalField wigner_sphere(const Mat& rho, SpinLength s, const SphericalGrid& grid);
SphericalField wigner_sphere(const DickeVector& psi, const SphericalGrid& grid);

// Trapezoid-in-phi, Simpson-in-cos-weighted quadrature of a field over the sphere.
double integrate_sphere(const SphericalField& f);

}  // namespace spincat
