#pragma once

#include <Eigen/Dense>

#include <complex>
#include <vector>

namespace spincat {

using cplx = std::complex<double>;
using Vec = Eigen::VectorXcd;
using Mat = Eigen::MatrixXcd;
using RVec = Eigen::VectorXd;

inline constexpr double pi = 3.14159265358979323846;
inline constexpr cplx imag_unit{0.0, 1.0};

// Total spin stored as 2I so half-integers are exact.
class SpinLength {
public:
    constexpr SpinLength() = default;
    static SpinLength from_twice(int two_i);
    static SpinLength from_value(double i);

    constexpr int twice() const { return two_i_; }
    constexpr int dim() const { return two_i_ + 1; }
    constexpr double value() const { return 0.5 * two_i_; }
    constexpr bool is_integer() const { return two_i_ % 2 == 0; }

    // Basis index 0 is M = I, the last index is M = -I.
    constexpr double m_at(int index) const { return value() - index; }
    int index_of(double m) const;
    bool contains(double m) const;

    friend constexpr bool operator==(SpinLength a, SpinLength b) { return a.two_i_ == b.two_i_; }

private:
    explicit constexpr SpinLength(int two_i) : two_i_(two_i) {}
    int two_i_ = 0;
};

enum class Structure { diagonal, banded, general };

struct Operator {
    Mat mat;
    Structure structure = Structure::general;

    int dim() const { return static_cast<int>(mat.rows()); }
};

struct DickeVector {
    SpinLength spin;
    Vec amp;

    double norm() const { return amp.norm(); }
};

enum class Component { z, plus, minus, x, y };
enum class Axis { x, y, z };

RVec m_values(SpinLength s);

// <M+1|I+|M> and <M-1|I-|M> as functions of M.
double raise_coeff(SpinLength s, double m);
double lower_coeff(SpinLength s, double m);

Operator op_collective(SpinLength s, Component which);

// exp(-i angle I_axis) as a dense matrix.
Mat rotation_matrix(SpinLength s, Axis axis, double angle);

DickeVector rotate(const DickeVector& state, Axis axis, double angle);
DickeVector coherent_state(SpinLength s, double theta, double phi);
DickeVector dicke_state(SpinLength s, double m);

cplx expectation(const DickeVector& state, const Mat& op);
cplx inner(const DickeVector& a, const DickeVector& b);

// Largest |entry| of U^dagger U - 1.
double unitarity_error(const Mat& u);

}  // namespace spincat
