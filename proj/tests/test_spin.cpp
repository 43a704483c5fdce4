#include "spincat/spin.hpp"

#include <doctest.h>

#include <cmath>

using namespace spincat;

namespace {

Mat op(SpinLength s, Component c) { return op_collective(s, c).mat; }

double max_abs(const Mat& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("spin length stores 2I exactly") {
    const auto h = SpinLength::from_value(7.5);
    CHECK(h.twice() == 15);
    CHECK(h.dim() == 16);
    CHECK_FALSE(h.is_integer());
    CHECK(h.m_at(0) == 7.5);
    CHECK(h.m_at(15) == -7.5);
    CHECK(h.index_of(-0.5) == 8);
    CHECK(h.contains(0.5));
    CHECK_FALSE(h.contains(0.0));
    CHECK_FALSE(h.contains(8.5));
    CHECK_THROWS(SpinLength::from_value(1.25));
}

TEST_CASE("ladder coefficients match sqrt(I(I+1) - M(M+1))") {
    const auto s = SpinLength::from_value(5);
    for (int r = 0; r < s.dim(); ++r) {
        const double m = s.m_at(r);
        const double up = m < 5 ? std::sqrt(30.0 - m * (m + 1.0)) : 0.0;
        const double dn = m > -5 ? std::sqrt(30.0 - m * (m - 1.0)) : 0.0;
        CHECK(raise_coeff(s, m) == doctest::Approx(up).epsilon(1e-14));
        CHECK(lower_coeff(s, m) == doctest::Approx(dn).epsilon(1e-14));
    }
}

TEST_CASE("collective operators obey the angular momentum algebra") {
    for (double i : {0.5, 1.0, 1.5, 4.0, 7.5, 20.0}) {
        CAPTURE(i);
        const auto s = SpinLength::from_value(i);
        const Mat x = op(s, Component::x), y = op(s, Component::y), z = op(s, Component::z);
        CHECK(max_abs(x * y - y * x - imag_unit * z) < 1e-10);
        CHECK(max_abs(y * z - z * y - imag_unit * x) < 1e-10);
        CHECK(max_abs(z * x - x * z - imag_unit * y) < 1e-10);
        const Mat casimir = x * x + y * y + z * z;
        CHECK(max_abs(casimir - i * (i + 1.0) * Mat::Identity(s.dim(), s.dim())) < 1e-9);
        CHECK(max_abs(op(s, Component::plus) - (x + imag_unit * y)) < 1e-12);
        CHECK(max_abs(op(s, Component::minus) - (x - imag_unit * y)) < 1e-12);
    }
}

TEST_CASE("operator structure tags") {
    const auto s = SpinLength::from_value(3);
    CHECK(op_collective(s, Component::z).structure == Structure::diagonal);
    CHECK(op_collective(s, Component::plus).structure == Structure::banded);
}

TEST_CASE("rotation about y for I = 1 matches the Wigner small-d matrix") {
    const auto s = SpinLength::from_value(1);
    for (double b : {0.3, 1.1, 2.5}) {
        const Mat u = rotation_matrix(s, Axis::y, b);
        // rows/cols ordered M = 1, 0, -1
        const double c = std::cos(b), sn = std::sin(b);
        const double d[3][3] = {{(1 + c) / 2, -sn / std::sqrt(2.0), (1 - c) / 2},
                                {sn / std::sqrt(2.0), c, -sn / std::sqrt(2.0)},
                                {(1 - c) / 2, sn / std::sqrt(2.0), (1 + c) / 2}};
        for (int r = 0; r < 3; ++r)
            for (int k = 0; k < 3; ++k) CHECK(std::abs(u(r, k) - d[r][k]) < 1e-12);
    }
}

TEST_CASE("rotations are unitary and 2 pi gives (-1)^{2I}") {
    for (double i : {0.5, 3.0, 12.5, 30.0}) {
        const auto s = SpinLength::from_value(i);
        for (Axis a : {Axis::x, Axis::y, Axis::z}) {
            CHECK(unitarity_error(rotation_matrix(s, a, 0.7)) < 1e-10);
            const double sign = s.is_integer() ? 1.0 : -1.0;
            CHECK(max_abs(rotation_matrix(s, a, 2.0 * pi) - sign * Mat::Identity(s.dim(), s.dim())) < 1e-9);
        }
    }
}

TEST_CASE("rotation matrices agree with the exponential of the generator") {
    const auto s = SpinLength::from_value(6);
    for (auto [axis, comp] : {std::pair{Axis::x, Component::x}, {Axis::y, Component::y}, {Axis::z, Component::z}}) {
        Eigen::SelfAdjointEigenSolver<Mat> es(op(s, comp));
        const Vec ph = (-imag_unit * 0.9 * es.eigenvalues().cast<cplx>()).array().exp();
        const Mat ref = es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
        CHECK(max_abs(rotation_matrix(s, axis, 0.9) - ref) < 1e-10);
    }
}

TEST_CASE("coherent states: closed form agrees with rotating the top state") {
    const auto s = SpinLength::from_value(10);
    for (auto [th, ph] : {std::pair{0.0, 0.0}, {pi / 2, 0.0}, {1.0, 2.0}, {pi, 0.4}}) {
        const DickeVector cs = coherent_state(s, th, ph);
        const Vec ref = rotation_matrix(s, Axis::z, ph) * rotation_matrix(s, Axis::y, th) * dicke_state(s, 10).amp;
        CHECK(std::abs(std::abs(cs.amp.dot(ref)) - 1.0) < 1e-10);
        CHECK(cs.norm() == doctest::Approx(1.0));
        CHECK(expectation(cs, op(s, Component::z)).real() == doctest::Approx(10.0 * std::cos(th)).epsilon(1e-10));
        CHECK(expectation(cs, op(s, Component::x)).real() ==
              doctest::Approx(10.0 * std::sin(th) * std::cos(ph)).epsilon(1e-10));
    }
}

TEST_CASE("coherent state overlaps are cos(angle/2)^{2I}") {
    const auto s = SpinLength::from_value(15);
    for (double d : {0.2, pi / 3, 1.5}) {
        const double ov = std::abs(inner(coherent_state(s, pi / 2, 0.0), coherent_state(s, pi / 2, d)));
        CHECK(ov == doctest::Approx(std::pow(std::cos(d / 2.0), 30.0)).epsilon(1e-10));
    }
}

TEST_CASE("dicke states and rotate") {
    const auto s = SpinLength::from_value(2);
    const DickeVector d = dicke_state(s, -1);
    CHECK(std::abs(d.amp(3) - 1.0) < 1e-15);
    CHECK(d.amp.norm() == doctest::Approx(1.0));
    const DickeVector r = rotate(d, Axis::y, 0.4);
    CHECK(std::abs(inner(r, {s, rotation_matrix(s, Axis::y, 0.4) * d.amp}) - 1.0) < 1e-12);
    CHECK_THROWS(dicke_state(s, 3));
}
