#include "spincat/cat_code.hpp"

#include <doctest.h>

#include <cmath>

using namespace spincat;

namespace {

// Codewords straight from the definition: equal superpositions of N/2 equatorial coherent
// states, the |1_L> set offset by 2 pi / N.
Vec codeword_from_components(int n, SpinLength s, int which) {
    Vec v = Vec::Zero(s.dim());
    for (int j = 0; j < n / 2; ++j) v += coherent_state(s, pi / 2, (4.0 * j + 2.0 * which) * pi / n).amp;
    return v / v.norm();
}

double prob_outside_mod(const Vec& v, SpinLength s, int mod) {
    double out = 0.0;
    for (int r = 0; r < s.dim(); ++r) {
        const long m = std::lround(s.m_at(r));
        if (((m % mod) + mod) % mod != 0) out += std::norm(v(r));
    }
    return out;
}

}  // namespace

TEST_CASE("code parameter validation") {
    CHECK_THROWS(CatCode(4, SpinLength::from_value(10)));
    CHECK_THROWS(CatCode(6, SpinLength::from_value(10.5)));
    CHECK_THROWS(CatCode(6, SpinLength::from_value(10), -1));
    const CatCode c(10, SpinLength::from_value(20));
    CHECK(c.sectors() == 5);
    CHECK(c.ladder_order() == 2);
}

TEST_CASE("codewords equal the coherent-state superpositions") {
    for (int n : {6, 10})
        for (int i : {9, 15, 30}) {
            CAPTURE(n);
            CAPTURE(i);
            const auto s = SpinLength::from_value(i);
            const CatCode code(n, s);
            for (int b = 0; b < 2; ++b) {
                const Vec ref = codeword_from_components(n, s, b);
                CHECK(std::abs(std::abs(ref.dot(code.codeword(b).amp)) - 1.0) < 1e-12);
            }
        }
}

TEST_CASE("codewords live in M = 0 mod N/2") {
    for (int i : {9, 15, 30}) {
        const auto s = SpinLength::from_value(i);
        const CatCode code(6, s);
        CHECK(prob_outside_mod(code.zero().amp, s, 3) < 1e-12);
        CHECK(prob_outside_mod(code.one().amp, s, 3) < 1e-12);
        const auto pops = sector_populations(code, code.zero().amp);
        CHECK(pops(0) == doctest::Approx(1.0));
    }
}

TEST_CASE("codeword overlap is the geometric coherent-state sum") {
    // Each |0_L> component sits pi/3 from two |1_L> components; overlaps of equatorial coherent
    // states are real and equal to cos(delta/2)^{2I}.
    double prev = 1.0;
    for (int i : {9, 15, 21, 30}) {
        const auto s = SpinLength::from_value(i);
        const CatCode code(6, s);
        const double ov = std::abs(code.zero().amp.dot(code.one().amp));
        const double c = std::pow(std::cos(pi / 6), 2 * i), far = std::pow(std::cos(pi / 2), 2 * i);
        const double norm0 = 1.0 + 2.0 * std::pow(std::cos(pi / 3), 2 * i);
        CHECK(ov == doctest::Approx((2.0 * c + far) / norm0).epsilon(1e-9));
        CHECK(ov < prev);
        prev = ov;
    }
}

TEST_CASE("sector bookkeeping") {
    const auto s = SpinLength::from_value(7);
    const CatCode code(6, s);
    CHECK(code.sector_of(0) == 0);
    CHECK(code.sector_of(-1) == 2);
    CHECK(code.sector_of(4) == 1);
    Mat total = Mat::Zero(s.dim(), s.dim());
    for (int k = 0; k < 3; ++k) {
        const Mat p = sector_projector(s, 6, k).mat;
        CHECK((p * p - p).cwiseAbs().maxCoeff() < 1e-15);
        total += p;
        for (double m : sector_mset(s, 6, k)) CHECK(code.sector_of(m) == k);
    }
    CHECK((total - Mat::Identity(s.dim(), s.dim())).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("error words parse, print and count") {
    const ErrorWord w = parse_error_word("I+Iz^2");
    CHECK(w.label() == "I+Iz^2");
    CHECK(w.count(Factor::plus) == 1);
    CHECK(w.count(Factor::z) == 2);
    CHECK(w.in_set(1, 2));
    CHECK_FALSE(w.in_set(1, 1));
    CHECK(parse_error_word("1").factors.empty());
    CHECK(parse_error_word("Iz^3").label() == "Iz^3");
    CHECK_THROWS(parse_error_word("Ix"));
    CHECK(error_set(1, 2).size() == 9);
    CHECK(error_set(0, 0).size() == 1);
}

TEST_CASE("error word matrices: leftmost factor acts last") {
    const auto s = SpinLength::from_value(4);
    const Mat p = op_collective(s, Component::plus).mat, z = op_collective(s, Component::z).mat;
    CHECK((word_matrix(parse_error_word("I+Iz"), s) - p * z).cwiseAbs().maxCoeff() < 1e-12);
    const Vec v = coherent_state(s, 1.0, 0.2).amp;
    CHECK((apply_word(parse_error_word("IzI+I-"), s, v) - z * p * op_collective(s, Component::minus).mat * v)
              .cwiseAbs()
              .maxCoeff() < 1e-12);
}

TEST_CASE("Chebyshev operator matches cos(m arccos x)") {
    const auto s = SpinLength::from_value(6);
    for (int m : {0, 1, 2, 5}) {
        const Mat t = chebyshev_op(s, m).mat;
        for (int r = 0; r < s.dim(); ++r)
            CHECK(t(r, r).real() == doctest::Approx(std::cos(m * std::acos(s.m_at(r) / 6.0))).epsilon(1e-12));
    }
}

TEST_CASE("KL quantities against direct matrix elements") {
    const auto s = SpinLength::from_value(12);
    const CatCode code(6, s);
    const ErrorWord a = parse_error_word("I+Iz"), b = parse_error_word("Iz^2");
    const Mat ma = word_matrix(a, s), mb = word_matrix(b, s);
    const cplx ref = (ma * code.zero().amp).dot(mb * code.one().amp);
    CHECK(std::abs(kl_offdiag(code, a, b) - ref) < 1e-12);
    const double diag = (ma * code.zero().amp).squaredNorm() - (ma * code.one().amp).squaredNorm();
    CHECK(kl_diag_diff(code, a) == doctest::Approx(diag).epsilon(1e-12));
}

TEST_CASE("Chebyshev and power criteria agree for I <= 20") {
    for (int n : {6, 10})
        for (int i = 5; i <= 20; ++i) {
            CAPTURE(n);
            CAPTURE(i);
            const CatCode code(n, SpinLength::from_value(i));
            for (double tol : {1e-6, 1e-8, 1e-10})
                CHECK(max_dephasing_order(code, tol) == max_dephasing_order_power(code, tol));
        }
}

TEST_CASE("correctable dephasing order grows with I") {
    int prev = -1;
    for (int i : {30, 60, 90, 120}) {
        const int l = max_dephasing_order(CatCode(6, SpinLength::from_value(i)), 1e-6);
        CHECK(l >= prev);
        prev = l;
    }
    CHECK(prev > 0);
}

TEST_CASE("line fit") {
    const auto r = fit_line({{10, 2}, {20, 4}, {30, 6}});
    CHECK(r.alpha == doctest::Approx(0.2));
    CHECK(r.beta == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(r.residual < 1e-12);
    CHECK(fit_line({{10, 1}}).degenerate);
    CHECK_THROWS(fit_alpha_beta(6, {10, 20}, 1e-6));
}

TEST_CASE("support sets stay inside the spin range") {
    const auto s = SpinLength::from_value(30);
    const CatCode code(6, s, 2);
    const MSet g = support_gamma(code, 1, 2, 1e-6);
    CHECK_FALSE(g.empty());
    for (double m : g) CHECK(s.contains(m));
    // A looser threshold can only shrink the set.
    CHECK(support_gamma(code, 1, 2, 1e-3).size() <= g.size());
}

TEST_CASE("rotated logical states separate in Iz") {
    // The phi = 0 lobe of |0_L> rotates onto the north pole, the phi = pi lobe of |1_L> onto
    // the south pole; the other lobes land near M = +-I/2.
    const auto s = SpinLength::from_value(30);
    const CatCode code(6, s);
    const DickeVector r0 = rotated_logical(code, 0), r1 = rotated_logical(code, 1);
    CHECK(r0.norm() == doctest::Approx(1.0));
    double north0 = 0.0, north1 = 0.0, south1 = 0.0;
    for (int r = 0; r < s.dim(); ++r) {
        const double m = s.m_at(r);
        if (m > 25) north0 += std::norm(r0.amp(r)), north1 += std::norm(r1.amp(r));
        if (m < -25) south1 += std::norm(r1.amp(r));
    }
    CHECK(north0 == doctest::Approx(1.0 / 3.0).epsilon(1e-3));
    CHECK(south1 == doctest::Approx(1.0 / 3.0).epsilon(1e-3));
    CHECK(north1 < 1e-3);
}

TEST_CASE("Chebyshev operator against its power-basis expansion") {
    const auto one = SpinLength::from_value(1);
    const Mat t2 = chebyshev_op(one, 2).mat;
    CHECK(std::abs(t2(0, 0) - 1.0) < 1e-15);
    CHECK(std::abs(t2(1, 1) + 1.0) < 1e-15);
    CHECK(std::abs(t2(2, 2) - 1.0) < 1e-15);
    CHECK((chebyshev_op(one, 0).mat - Mat::Identity(3, 3)).cwiseAbs().maxCoeff() == 0.0);
    // T_15(x) = 16384 x^15 - 61440 x^13 + 92160 x^11 - 70400 x^9 + 28800 x^7 - 6048 x^5 + 560 x^3 - 15 x
    const auto s = SpinLength::from_value(20);
    const double c[] = {-15, 560, -6048, 28800, -70400, 92160, -61440, 16384};
    const Mat t15 = chebyshev_op(s, 15).mat;
    for (int r = 0; r < s.dim(); ++r) {
        const double x = s.m_at(r) / 20.0;
        double v = 0.0;
        for (int j = 0; j < 8; ++j) v += c[j] * std::pow(x, 2 * j + 1);
        CHECK(std::abs(t15(r, r).real() - v) < 1e-8);
    }
}

TEST_CASE("ladder words move codewords between sectors") {
    for (int n : {6, 10}) {
        const auto s = SpinLength::from_value(24);
        const CatCode code(n, s);
        for (int j = -code.ladder_order(); j <= code.ladder_order(); ++j) {
            const Vec v = apply_word(ladder_word(j, 1), s, code.one().amp);
            const int target = ((j % code.sectors()) + code.sectors()) % code.sectors();
            const auto pops = sector_populations(code, v / v.norm());
            CHECK(pops(target) == doctest::Approx(1.0).epsilon(1e-12));
        }
        // Different sectors are exactly orthogonal.
        CHECK(kl_offdiag(code, parse_error_word("I+"), parse_error_word("Iz")) == cplx(0.0));
    }
}

TEST_CASE("KL off-diagonal terms are small across the correctable set") {
    // Words are measured in units of I per factor, the same scale as T_m(Iz/I).
    const auto s = SpinLength::from_value(60);
    const CatCode code(6, s);
    const double tol = 1e-6;
    const int l = max_dephasing_order(code, tol);
    CHECK(l >= 1);
    const auto words = error_set(code.ladder_order(), l);
    for (const auto& a : words)
        for (const auto& b : words) {
            const double unit = std::pow(60.0, static_cast<double>(a.factors.size() + b.factors.size()));
            const double scale = apply_word(a, s, code.zero().amp).norm() * apply_word(b, s, code.one().amp).norm();
            CHECK(std::abs(kl_offdiag(code, a, b)) / unit <= tol * (scale / unit + 1.0));
        }
    CHECK(std::abs(kl_offdiag(code, parse_error_word("Iz^2"), parse_error_word("Iz^2"))) / std::pow(60.0, 4) <= 1e-6);
}
