#include "spincat/benchmarks.hpp"
#include "spincat/protocols.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace spincat;

namespace {

const LogicalGate all_gates[] = {LogicalGate::cnot_ensemble, LogicalGate::cnot_electron, LogicalGate::hadamard,
                                 LogicalGate::phase};

CatCode code_with_order(int n, int spin) {
    CatCode c(n, SpinLength::from_value(spin));
    c.set_dephasing_order(max_dephasing_order(c, 1e-6));
    return c;
}

// 2x2 electron rotation taken from a single-level ensemble.
Eigen::Matrix2cd electron_gate(Axis a, double angle) {
    const auto s = SpinLength::from_value(0);
    return gate_unitary(gate::CondR{a, angle, {0.0}}, s);
}

}  // namespace

TEST_CASE("nominal splitting angles") {
    const auto a = encoding_angles(6);
    REQUIRE(a.size() == 3);
    CHECK(a[0] == doctest::Approx(2.0 * std::acos(std::sqrt(2.0 / 3.0))));
    CHECK(a[1] == doctest::Approx(pi / 2.0));
    CHECK(a[2] == doctest::Approx(pi));
    // Each step moves 1/(n-i+1) of the remaining weight, so the products telescope.
    const auto b = encoding_angles(10);
    double remaining = 1.0;
    for (double th : b) remaining *= std::pow(std::cos(th / 2.0), 2);
    CHECK(remaining == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("encoding reaches the analytic codewords") {
    for (int spin : {30, 60}) {
        CAPTURE(spin);
        const ProtocolParams p(CatCode(6, SpinLength::from_value(spin)));
        const auto s = p.code.spin();
        const Circuit enc = encode_circuit(p);
        for (int b = 0; b < 2; ++b) {
            const JointState in = product_state(b == 0 ? 1.0 : 0.0, b == 1 ? 1.0 : 0.0, dicke_state(s, s.value()));
            const JointState out = apply_circuit(enc, in);
            CHECK(std::norm(p.code.codeword(b).amp.dot(out.block(0))) >= 1.0 - 1e-6);
            CHECK(out.block(1).norm() < 1e-3);
        }
        const Mat u = circuit_unitary(decode_circuit(p), s) * circuit_unitary(enc, s);
        CHECK((u - Mat::Identity(u.rows(), u.cols())).cwiseAbs().maxCoeff() < 1e-9);
        CHECK(calibrate_encoding(p.code).split_shortfall < 1e-6);
    }
}

TEST_CASE("small-I encoding records its shortfall instead of failing") {
    const CatCode code(6, SpinLength::from_value(3));
    const auto cal = calibrate_encoding(code);
    CHECK(cal.angles.size() == 3);
    CHECK(cal.split_shortfall >= 0.0);
    CHECK_NOTHROW(encode_circuit(ProtocolParams(code)));
}

TEST_CASE("zyz decomposition reproduces the rotation") {
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> u(-pi, pi);
    for (int trial = 0; trial < 20; ++trial) {
        const Eigen::Matrix2cd target = electron_gate(Axis::z, u(rng)) * electron_gate(Axis::y, u(rng)) *
                                        electron_gate(Axis::z, u(rng)) * std::exp(imag_unit * u(rng));
        const auto ang = zyz_angles(target);
        const Eigen::Matrix2cd back =
            electron_gate(Axis::z, ang[0]) * electron_gate(Axis::y, ang[1]) * electron_gate(Axis::z, ang[2]);
        CHECK(std::abs((back.adjoint() * target).trace()) / 2.0 == doctest::Approx(1.0).epsilon(1e-10));
    }
}

TEST_CASE("ideal logical actions are unitary") {
    for (auto g : all_gates) {
        const Eigen::Matrix4cd u = ideal_action(g, 0.3);
        CHECK((u.adjoint() * u - Eigen::Matrix4cd::Identity()).cwiseAbs().maxCoeff() < 1e-15);
    }
    // The phase gate is diagonal with the conjugate phase on an up electron.
    const Eigen::Matrix4cd p = ideal_action(LogicalGate::phase, 0.3);
    CHECK(std::abs(p(2, 2) - std::exp(imag_unit * 0.3)) < 1e-15);
    CHECK(std::abs(p(1, 1) - std::exp(imag_unit * 0.3)) < 1e-15);
}

TEST_CASE("logical gates on error-free inputs") {
    const ProtocolParams p(code_with_order(6, 60));
    const int l = p.code.dephasing_order();
    for (auto g : all_gates) {
        CAPTURE(gate_label(g));
        const Circuit c = build_logical_gate(p, g, 1, l);
        CHECK(c.is_unitary());
        CHECK(unitarity_error(circuit_unitary(c, p.code.spin())) < 1e-10);
        CHECK(ft_gate_test(g, ErrorWord{}, p, 1, l).worst() > 0.9999);
    }
}

TEST_CASE("logical gates keep codespace sector populations") {
    const ProtocolParams p(code_with_order(6, 60));
    const int l = p.code.dephasing_order();
    for (auto g : all_gates) {
        const Circuit c = build_logical_gate(p, g, 1, l);
        for (int b = 0; b < 5; ++b) {
            Eigen::Vector4cd v = Eigen::Vector4cd::Zero();
            if (b < 4)
                v(b) = 1.0;
            else
                v.setConstant(0.5);
            const JointState in = encode_logical(p.code, v);
            const JointState out = apply_circuit(c, in);
            const auto d = (sector_populations(p.code, in.amp) - sector_populations(p.code, out.amp)).cwiseAbs().maxCoeff();
            CHECK(d <= 1e-8);
        }
    }
}

TEST_CASE("Hadamard calibration picks the better candidate time") {
    const ProtocolParams p(code_with_order(6, 30));
    const auto h = calibrate_hadamard(p, 1, 0);
    REQUIRE(h.candidates.size() == 2);
    for (const auto& [t, f] : h.candidates) CHECK(f <= h.codespace_fidelity);
    CHECK(h.codespace_fidelity > 0.999);
}

TEST_CASE("ladder correction restores single I+ and I- errors") {
    const ProtocolParams p(code_with_order(6, 30));
    const auto s = p.code.spin();
    const Circuit c = correct_pm(p, 1);
    Eigen::Vector4cd v = Eigen::Vector4cd::Zero();
    v(0) = v(2) = 1.0 / std::sqrt(2.0);
    const JointState ref = encode_logical(p.code, v);
    for (const char* w : {"1", "I+", "I-"}) {
        CAPTURE(w);
        const JointState st = encode_logical(p.code, v, parse_error_word(w));
        const Mat out = apply_circuit(c, Mat(st.amp * st.amp.adjoint()), s);
        CHECK(std::abs(out.trace() - 1.0) < 1e-10);
        CHECK((ref.amp.adjoint() * out * ref.amp)(0, 0).real() >= 0.999);
    }
    CHECK_THROWS(correct_pm(p, 0));
    CHECK_THROWS(correct_pm(p, 2));
}

TEST_CASE("flip timing helpers") {
    CHECK(free_time_after_flips(0.0, 1.0) == 0.0);
    CHECK(free_time_after_flips(1.0, 1.0) == doctest::Approx(4.0 * pi - 1.0));
    CHECK(free_time_after_flips(4.0 * pi, 1.0) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK_THROWS(free_time_after_flips(1.0, 0.0));
    CHECK(dephasing_stage_time(2, 1, 0.0, 10.0) == doctest::Approx(pi / 2.0));
    CHECK_THROWS(dephasing_stage_time(0, 1, 0.0, 10.0));
    CHECK(refocus_time(0.0, 1.0, 0.5) == doctest::Approx(pi));
}

TEST_CASE("single-ensemble dephasing correction keeps the trace") {
    const ProtocolParams p(code_with_order(6, 30));
    const Circuit c = correct_dephasing_single(p, 1);
    CHECK_FALSE(c.is_unitary());
    Eigen::Vector4cd v = Eigen::Vector4cd::Zero();
    v(0) = 1.0;
    const JointState st = encode_logical(p.code, v, parse_error_word("Iz"));
    const Mat out = apply_circuit(c, Mat(st.amp * st.amp.adjoint()), p.code.spin());
    CHECK(std::abs(out.trace() - 1.0) < 1e-10);
    CHECK((out - out.adjoint()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK_THROWS(correct_dephasing_single(p, 0));
}

TEST_CASE("two-ensemble transfer moves the logical state to B") {
    CatCode a(6, SpinLength::from_value(15)), b(6, SpinLength::from_value(15));
    const ProtocolParams pa(a), pb(b);
    const TransferCircuit t = correct_dephasing_transfer(pa, pb);
    CHECK(t.cnot_count == 4);
    const DickeVector psi = logical_superposition(a, 0.6, 0.8);
    const TwoEnsembleState in = two_ensemble_product(1.0, 0.0, psi, b.zero());
    const TwoEnsembleState out = apply_transfer(t, in);
    CHECK(out.amp.norm() == doctest::Approx(1.0).epsilon(1e-12));
    const Mat rho_b = reduced_ensemble_b(out);
    const DickeVector want = logical_superposition(b, 0.6, 0.8);
    CHECK((want.amp.adjoint() * rho_b * want.amp)(0, 0).real() > 0.99);
    CHECK(std::abs(reduced_electron(out).trace() - 1.0) < 1e-12);
    CHECK_THROWS(two_ensemble_product(1.0, 0.0, coherent_state(SpinLength::from_value(60), 1, 0),
                                      coherent_state(SpinLength::from_value(60), 1, 0)));
}
