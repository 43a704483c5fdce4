#include "spincat/cat_code.hpp"
#include "spincat/wigner.hpp"

#include <doctest.h>

#include <cmath>

using namespace spincat;

namespace {

SphericalField product(const SphericalField& a, const SphericalField& b) {
    SphericalField f = a;
    f.values = a.values.cwiseProduct(b.values);
    return f;
}

}  // namespace

TEST_CASE("tensor operators are Hilbert-Schmidt orthonormal") {
    const auto s = SpinLength::from_value(3);
    std::vector<Mat> ops;
    for (int k = 0; k <= 6; ++k)
        for (const auto& t : tensor_operators(s, k)) ops.push_back(tensor_matrix(s, t));
    CHECK(ops.size() == 49);
    double worst = 0.0;
    for (std::size_t i = 0; i < ops.size(); ++i)
        for (std::size_t j = 0; j < ops.size(); ++j) {
            const cplx ip = (ops[i].adjoint() * ops[j]).trace();
            worst = std::max(worst, std::abs(ip - (i == j ? 1.0 : 0.0)));
        }
    CHECK(worst < 1e-10);
}

TEST_CASE("rank-1 tensor operators are proportional to the spin components") {
    const auto s = SpinLength::from_value(4);
    const auto t = tensor_operators(s, 1);  // q = 1, 0, -1
    const Mat t10 = tensor_matrix(s, t[1]);
    const Mat z = op_collective(s, Component::z).mat;
    const cplx ratio = t10(0, 0) / z(0, 0);
    CHECK((t10 - ratio * z).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("wigner integral keeps only the rank-0 term") {
    for (double i : {2.0, 7.5, 30.0}) {
        const auto s = SpinLength::from_value(i);
        const auto g = make_grid(481, 241);
        const double expected = std::sqrt(4.0 * pi / (2.0 * i + 1.0));
        CHECK(integrate_sphere(wigner_sphere(coherent_state(s, 1.0, 0.5), g)) == doctest::Approx(expected).epsilon(1e-6));
        CHECK(integrate_sphere(wigner_sphere(dicke_state(s, s.m_at(1)), g)) == doctest::Approx(expected).epsilon(1e-6));
    }
}

TEST_CASE("overlap formula: integral of W_rho W_sigma equals Tr(rho sigma)") {
    const auto s = SpinLength::from_value(5);
    const auto g = make_grid(121, 241);
    const DickeVector a = coherent_state(s, 0.8, 0.3), b = coherent_state(s, 1.3, 1.0);
    const auto wa = wigner_sphere(a, g), wb = wigner_sphere(b, g);
    CHECK(integrate_sphere(product(wa, wa)) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(integrate_sphere(product(wa, wb)) == doctest::Approx(std::norm(inner(a, b))).epsilon(1e-6));
}

TEST_CASE("wigner function is real and rotation covariant") {
    const auto s = SpinLength::from_value(8);
    const auto g = make_grid(37, 72);
    const DickeVector psi = dicke_state(s, 5);
    const auto w0 = wigner_sphere(psi, g);
    CHECK(w0.max_imag < 1e-12);
    // A rotation about z shifts the field in phi; 72 samples make 4 grid steps = 20 degrees.
    const auto wr = wigner_sphere(rotate(coherent_state(s, 1.0, 0.0), Axis::z, 4 * 2 * pi / 72), g);
    const auto wc = wigner_sphere(coherent_state(s, 1.0, 0.0), g);
    double worst = 0.0;
    for (int i = 0; i < 37; ++i)
        for (int j = 0; j < 72; ++j) worst = std::max(worst, std::abs(wr.values(i, (j + 4) % 72) - wc.values(i, j)));
    CHECK(worst < 1e-10);
}

TEST_CASE("density-matrix and state-vector routes agree") {
    const auto s = SpinLength::from_value(6);
    const auto g = make_grid(19, 36);
    const DickeVector psi = coherent_state(s, 2.0, 1.0);
    const Mat rho = psi.amp * psi.amp.adjoint();
    CHECK((wigner_sphere(rho, s, g).values - wigner_sphere(psi, g).values).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("coherent state peaks at its own direction") {
    const auto s = SpinLength::from_value(30);
    const auto g = make_grid(181, 361);
    const auto w = wigner_sphere(coherent_state(s, 1.0, 0.5), g);
    Eigen::Index r = 0, c = 0;
    w.values.maxCoeff(&r, &c);
    CHECK(g.theta[r] == doctest::Approx(1.0).epsilon(0.02));
    CHECK(g.phi[c] == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("N = 6 codeword shows three equatorial lobes") {
    const auto s = SpinLength::from_value(30);
    const CatCode code(6, s);
    const auto g = make_grid(181, 360);
    const auto w = wigner_sphere(code.zero(), g);
    const auto single = wigner_sphere(coherent_state(s, pi / 2, 0.0), g);
    const int eq = 90;
    CHECK(g.theta[eq] == doctest::Approx(pi / 2));
    // Three-fold symmetry about z and lobes at phi = 0, 120, 240 degrees, each with a third of
    // the weight of a lone coherent state.
    double sym = 0.0;
    for (int i = 0; i < 181; ++i)
        for (int j = 0; j < 360; ++j) sym = std::max(sym, std::abs(w.values(i, j) - w.values(i, (j + 120) % 360)));
    CHECK(sym < 1e-9);
    for (int lobe : {0, 120, 240}) {
        const double v = w.values(eq, lobe);
        CHECK(v > w.values(eq, (lobe + 1) % 360));
        CHECK(v > w.values(eq, (lobe + 359) % 360));
        CHECK(v > w.values(eq - 1, lobe));
        CHECK(v > w.values(eq + 1, lobe));
        CHECK(v == doctest::Approx(single.values(eq, 0) / 3.0).epsilon(0.1));
    }
    // The poles are nearly empty.
    CHECK(std::abs(w.values(0, 0)) < 1e-2 * single.values(eq, 0));
    CHECK(std::abs(w.values(180, 0)) < 1e-2 * single.values(eq, 0));
}
