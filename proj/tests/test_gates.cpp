#include "spincat/gates.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace spincat;

namespace {

// Dense joint-space oracles: electron (dn, up) (x) ensemble, built with Kronecker products.
Mat kron(const Mat& a, const Mat& b) {
    Mat out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

Mat expm_herm(const Mat& h, double t) {
    Eigen::SelfAdjointEigenSolver<Mat> es(h);
    const Vec ph = (-imag_unit * t * es.eigenvalues().cast<cplx>()).array().exp();
    return es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
}

Mat sz() {
    Mat m = Mat::Zero(2, 2);
    m(0, 0) = -0.5;
    m(1, 1) = 0.5;
    return m;
}
Mat s_plus() {  // |up><dn|
    Mat m = Mat::Zero(2, 2);
    m(1, 0) = 1.0;
    return m;
}

Mat ens(SpinLength s, Component c) { return op_collective(s, c).mat; }
Mat eye(int n) { return Mat::Identity(n, n); }
double dist(const Mat& a, const Mat& b) { return (a - b).cwiseAbs().maxCoeff(); }

Mat level_projector(SpinLength s, int e, double m) {
    Mat p = Mat::Zero(2 * s.dim(), 2 * s.dim());
    const int i = e * s.dim() + s.index_of(m);
    p(i, i) = 1.0;
    return p;
}

Vec random_state(int n, unsigned seed) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> g;
    Vec v(n);
    for (auto& x : v) x = {g(rng), g(rng)};
    return v / v.norm();
}

}  // namespace

TEST_CASE("free evolution matches exp(-iHt) of the hyperfine Hamiltonian") {
    const auto s = SpinLength::from_value(3);
    const int d = s.dim();
    for (double anc : {0.0, 0.3}) {
        const HamiltonianTerms h{7.0, 1.5, 0.8, anc};
        const Mat ham = h.omega_e * kron(sz(), eye(d)) + h.omega_n * kron(eye(2), ens(s, Component::z)) +
                        h.a * kron(sz(), ens(s, Component::z)) + h.a_nc * kron(sz(), ens(s, Component::x));
        CHECK(dist(gate_unitary(gate::FreeEvolve{0.37, h}, s), expm_herm(ham, 0.37)) < 1e-10);
    }
}

TEST_CASE("Theta is exp(-i angle Sz Ix)") {
    const auto s = SpinLength::from_value(2.5);
    const Mat gen = kron(sz(), ens(s, Component::x));
    CHECK(dist(gate_unitary(gate::Theta{1.1}, s), expm_herm(gen, 1.1)) < 1e-10);
}

TEST_CASE("flip-flop and flip-flip act on one Rabi pair") {
    const auto s = SpinLength::from_value(4);
    const int d = s.dim();
    const Mat ff = kron(s_plus(), ens(s, Component::minus));
    const Mat ffl = kron(s_plus(), ens(s, Component::plus));
    for (double m : {-3.0, 0.0, 2.0}) {
        const Mat p = level_projector(s, 0, m + 1) + level_projector(s, 1, m);
        const Mat h = p * (ff + ff.adjoint()) * p;
        CHECK(dist(gate_unitary(gate::FlipFlop{0.7, m}, s), expm_herm(h, 0.7)) < 1e-10);
        const Mat q = level_projector(s, 0, m - 1) + level_projector(s, 1, m);
        const Mat h2 = q * (ffl + ffl.adjoint()) * q;
        CHECK(dist(gate_unitary(gate::FlipFlip{0.7, m}, s), expm_herm(h2, 0.7)) < 1e-10);
    }
    // Full transfer at t = pi / (2 g).
    const double g = flipflop_coupling(s, 1.0);
    const JointState in = product_state(0.0, 1.0, dicke_state(s, 1.0));
    const JointState out = apply_gate(gate::FlipFlop{pi / (2.0 * g), 1.0}, in);
    CHECK(std::abs(out.amp(s.index_of(2.0))) == doctest::Approx(1.0).epsilon(1e-12));
    // Edge levels without a partner are left alone.
    CHECK(dist(gate_unitary(gate::FlipFlop{0.3, 4.0}, s), eye(2 * d)) < 1e-15);
    CHECK_THROWS(gate_unitary(gate::FlipFlop{0.3, 5.0}, s));
}

TEST_CASE("conditional electron rotation acts only on the chosen levels") {
    const auto s = SpinLength::from_value(3);
    const int d = s.dim();
    const MSet set{3.0, 0.0, -2.0};
    Mat proj = Mat::Zero(d, d);
    for (double m : set) proj(s.index_of(m), s.index_of(m)) = 1.0;
    Mat sx = Mat::Zero(2, 2);
    sx(0, 1) = sx(1, 0) = 1.0;
    Mat sy = Mat::Zero(2, 2);
    sy(0, 1) = imag_unit;
    sy(1, 0) = -imag_unit;
    const Mat szp = 2.0 * sz();
    const Mat paulis[] = {sx, sy, szp};
    const Axis axes[] = {Axis::x, Axis::y, Axis::z};
    for (int a = 0; a < 3; ++a) {
        const Mat ref = kron(expm_herm(0.5 * paulis[a], 0.9), proj) + kron(eye(2), eye(d) - proj);
        CHECK(dist(gate_unitary(gate::CondR{axes[a], 0.9, set}, s), ref) < 1e-12);
    }
    // Electron rotations are CondR on every level.
    MSet all;
    for (int r = 0; r < d; ++r) all.push_back(s.m_at(r));
    CHECK(dist(gate_unitary(gate::Ux{0.4}, s), gate_unitary(gate::CondR{Axis::x, 0.4, all}, s)) < 1e-15);
    CHECK(dist(gate_unitary(gate::Uy{0.4}, s), gate_unitary(gate::CondR{Axis::y, 0.4, all}, s)) < 1e-15);
}

TEST_CASE("Pi gate rotates only the down branch") {
    const auto s = SpinLength::from_value(2);
    const int d = s.dim();
    const Mat u = circuit_unitary(pi_gate(0.8), s);
    CHECK(dist(u.topLeftCorner(d, d), rotation_matrix(s, Axis::x, 0.8)) < 1e-12);
    CHECK(dist(u.bottomRightCorner(d, d), eye(d)) < 1e-12);
    CHECK(dist(gate_unitary(gate::Pi{0.8}, s), u) < 1e-12);
}

TEST_CASE("random circuits: unitarity, inverse and the three application routes") {
    const auto s = SpinLength::from_value(3.5);
    const int d = s.dim();
    Circuit c;
    c.add(gate::Theta{0.3})
        .add(gate::FlipFlop{0.5, 0.5})
        .add(gate::CondR{Axis::y, 1.2, {3.5, -1.5}})
        .add(gate::EnsR{Axis::y, 0.6})
        .add(gate::FreeEvolve{0.2, {3.0, 1.0, 0.5, 0.1}})
        .add(gate::FlipFlip{0.4, -0.5})
        .add(gate::Uy{0.9})
        .add(gate::Pi{1.3});
    const Mat u = circuit_unitary(c, s);
    CHECK(unitarity_error(u) < 1e-10);
    CHECK(dist(circuit_unitary(dagger(c), s), u.adjoint()) < 1e-10);
    CHECK(dist(circuit_unitary(dagger(c), s) * u, eye(2 * d)) < 1e-10);

    const Vec v = random_state(2 * d, 7);
    const JointState out = apply_circuit(c, JointState{s, v});
    CHECK((out.amp - u * v).cwiseAbs().maxCoeff() < 1e-12);
    const Mat rho = v * v.adjoint();
    CHECK(dist(apply_circuit(c, rho, s), u * rho * u.adjoint()) < 1e-12);
    Mat cols(2 * d, 3);
    cols << v, random_state(2 * d, 8), random_state(2 * d, 9);
    const Mat ref = u * cols;
    apply_circuit_columns(c, cols, s);
    CHECK(dist(cols, ref) < 1e-12);
}

TEST_CASE("electron reset is a channel") {
    const auto s = SpinLength::from_value(2);
    const int d = s.dim();
    const Vec v = random_state(2 * d, 3);
    const Mat rho = v * v.adjoint();
    Circuit c;
    c.add(gate::ResetElectron{});
    CHECK_FALSE(c.is_unitary());
    CHECK_THROWS(dagger(c));
    CHECK_THROWS(apply_circuit(c, JointState{s, v}));
    const Mat r = apply_circuit(c, rho, s);
    CHECK(std::abs(r.trace() - 1.0) < 1e-12);
    CHECK(std::abs(electron_density(r, s)(0, 0) - 1.0) < 1e-12);
    CHECK(dist(ensemble_density(r, s), ensemble_density(rho, s)) < 1e-12);
}

TEST_CASE("partial traces agree between state and density routes") {
    const auto s = SpinLength::from_value(2);
    const Vec v = random_state(2 * s.dim(), 11);
    const JointState js{s, v};
    const Mat rho = v * v.adjoint();
    CHECK(dist(electron_density(js), electron_density(rho, s)) < 1e-12);
    CHECK(dist(ensemble_density(js), ensemble_density(rho, s)) < 1e-12);
    const JointState p = product_state(0.6, 0.8, coherent_state(s, 0.4, 0.1));
    CHECK(std::abs(electron_density(p)(0, 1) - 0.48) < 1e-12);
}

TEST_CASE("circuit bookkeeping") {
    Circuit a, b;
    a.add(gate::Ux{0.1});
    a.tracked_phase = imag_unit;
    b.add(gate::Uy{0.2}).add(gate::ResetElectron{});
    b.tracked_phase = -1.0;
    a.append(b);
    CHECK(a.ops.size() == 3);
    CHECK(std::abs(a.tracked_phase + imag_unit) < 1e-15);
    CHECK(gate_name(a.ops[2]) == "ResetElectron");
    CHECK(dagger(Circuit{"x", "", {gate::Ux{0.1}}, imag_unit}).tracked_phase == -imag_unit);
}
