#include "spincat/benchmarks.hpp"

#include <doctest.h>

#include <cmath>

using namespace spincat;

TEST_CASE("Dicke closed forms") {
    for (double eta : {10.0, 100.0, 1000.0})
        for (int spin : {30, 210}) {
            const NoiseParams n = bias_rates(eta);
            const double lin = n.gamma_z / 6.0 + 2.0 * spin * (n.gamma_plus + n.gamma_minus);
            CHECK(dicke_time(eta, spin, 1e-3) == doctest::Approx(1e-3 / lin));
            // For small t the infidelity is linear with the same rate.
            CHECK(dicke_infidelity(1e-8, eta, spin) == doctest::Approx(lin * 1e-8).epsilon(1e-6));
            CHECK(dicke_infidelity(dicke_time(eta, spin, 1e-4), eta, spin) == doctest::Approx(1e-4).epsilon(1e-3));
        }
    CHECK(dicke_infidelity(0.0, 10.0, 30) == 0.0);
    CHECK_THROWS(dicke_time(10.0, 30, 0.0));
    CHECK_THROWS(dicke_infidelity(-1.0, 10.0, 30));
}

TEST_CASE("Dicke Lindblad infidelity: accounting variants bracket the closed form") {
    const double t = dicke_time(10.0, 30, 2e-3);
    const double closed = dicke_infidelity(t, 10.0, 30);
    const double first = dicke_lindblad_infidelity(t, 10.0, 30, JumpAccounting::first_jump);
    const double full = dicke_lindblad_infidelity(t, 10.0, 30, JumpAccounting::full_channel);
    CHECK(first == doctest::Approx(closed).epsilon(0.1));
    CHECK(full <= first + 1e-12);
    CHECK(full > 0.0);
    CHECK(dicke_lindblad_infidelity(0.0, 10.0, 30, JumpAccounting::first_jump) == doctest::Approx(0.0).scale(1.0));
    CHECK_THROWS(dicke_lindblad_infidelity(t, 10.0, 0, JumpAccounting::first_jump));
}

TEST_CASE("published improvement factors") {
    CHECK(table_one_reference(6, 10.0).value() == 3.93);
    CHECK(table_one_reference(6, 100.0).value() == 4.13);
    CHECK(table_one_reference(6, 1000.0).value() == 5.60);
    CHECK(table_one_reference(10, 10.0).value() == 14.82);
    CHECK(table_one_reference(10, 100.0).value() == 13.45);
    CHECK(table_one_reference(10, 1000.0).value() == 4.01);
    CHECK_FALSE(table_one_reference(14, 10.0).has_value());
    CHECK_FALSE(table_one_reference(6, 50.0).has_value());
}

TEST_CASE("recovered fidelity decreases with idle time") {
    BenchmarkConfig cfg;
    cfg.spin = 30;
    cfg.eta = 10.0;
    cfg.l_min = 0;
    cfg.l_max = 2;
    double prev = 1.0 + 1e-12;
    for (double tau : {0.0, 1e-4, 1e-3, 1e-2}) {
        const auto f = recovered_fidelity_sweep(cfg, tau);
        REQUIRE(f.size() == 3);
        const double best = *std::max_element(f.begin(), f.end());
        CHECK(best <= prev);
        prev = best;
        if (tau == 0.0)
            for (double v : f) CHECK(v == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("tau_max sits on the fidelity threshold") {
    BenchmarkConfig cfg;
    cfg.spin = 30;
    cfg.eta = 10.0;
    cfg.f_target = 0.999;
    const auto r = tau_max(cfg);
    CHECK_FALSE(r.unbounded);
    CHECK(r.tau_max > 0.0);
    CHECK(r.fidelity >= cfg.f_target - 1e-9);
    CHECK(r.max_trace_drift < 1e-8);
    // Just beyond tau_max every decoder order falls short.
    BenchmarkConfig past = cfg;
    const auto f = recovered_fidelity_sweep(past, r.tau_max * (1.0 + 10.0 * cfg.rel_width));
    for (double v : f) CHECK(v < cfg.f_target);
    const auto ratio = improvement_ratio(cfg);
    CHECK(ratio.ratio == doctest::Approx(ratio.tau.tau_max / dicke_time(10.0, 30, 1e-3)));
}

TEST_CASE("fault-tolerance report") {
    CatCode code(6, SpinLength::from_value(60));
    code.set_dephasing_order(max_dephasing_order(code, 1e-6));
    const ProtocolParams p(code);
    const auto ok = ft_gate_test(LogicalGate::cnot_ensemble, parse_error_word("Iz"), p, 1, code.dephasing_order());
    CHECK(ok.word == "Iz");
    CHECK_FALSE(ok.annihilated);
    CHECK(ok.worst() >= 0.99);
    CHECK(ok.spread() >= 0.0);
    const auto bad = ft_gate_test(LogicalGate::cnot_ensemble, parse_error_word("I+^2"), p, 1, code.dephasing_order());
    CHECK(bad.worst() < 0.99);
}
