#include "spincat/protocols.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace spincat {

namespace {

double wrap_angle(double x, double period) {
    double r = std::fmod(x, period);
    if (r < 0) r += period;
    return r;
}

MSet poles(SpinLength s) { return {s.value(), -s.value()}; }

double down_weight(const JointState& st) { return st.block(0).squaredNorm(); }

}  // namespace

std::vector<double> encoding_angles(int n_components) {
    const int n = n_components / 2;
    std::vector<double> out;
    for (int i = 1; i <= n; ++i)
        out.push_back(2.0 * std::acos(std::sqrt(static_cast<double>(n - i) / (n - i + 1))));
    return out;
}

Circuit twocat_stage(const EncodingCalibration& cal, const CatCode& code) {
    const SpinLength s = code.spin();
    Circuit c;
    c.name = "twocat";
    c.add(gate::Ux{pi}).add(gate::Pi{pi}).add(gate::CondR{Axis::x, pi, {-s.value()}});
    if (cal.phase_fix != 0.0) c.add(gate::CondR{Axis::z, cal.phase_fix, {-s.value()}});
    return c;
}

Circuit splitting_stage(const EncodingCalibration& cal, const CatCode& code, const MSet& pole_set) {
    Circuit c;
    c.name = "split";
    const double step = 4.0 * pi / code.n_components();
    for (double th : cal.angles) c.add(gate::CondR{Axis::x, th, pole_set}).add(gate::Pi{step});
    return c;
}

namespace {

EncodingCalibration run_calibration(const CatCode& code) {
    const SpinLength s = code.spin();
    const int n = code.sectors();
    EncodingCalibration cal;
    cal.nominal = encoding_angles(code.n_components());

    JointState st = apply_circuit(twocat_stage(cal, code), product_state(1.0, 0.0, dicke_state(s, s.value())));
    const double step = 4.0 * pi / code.n_components();
    for (int i = 1; i <= n; ++i) {
        const double target = static_cast<double>(i) / n;
        auto weight_after = [&](double th) {
            return down_weight(apply_gate(gate::CondR{Axis::x, th, poles(s)}, st));
        };
        double th = pi;
        if (weight_after(pi) < target) {
            // Small I: the lobes overlap the pole set and the step cannot reach its target weight.
            cal.split_shortfall = std::max(cal.split_shortfall, target - weight_after(pi));
        } else {
            double lo = 0.0;
            double hi = pi;
            for (int it = 0; it < 80; ++it) {
                const double mid = 0.5 * (lo + hi);
                (weight_after(mid) < target ? lo : hi) = mid;
            }
            th = 0.5 * (lo + hi);
        }
        cal.angles.push_back(th);
        cal.max_angle_deviation = std::max(cal.max_angle_deviation, std::abs(th - cal.nominal[i - 1]));
        st = apply_gate(gate::CondR{Axis::x, th, poles(s)}, st);
        st = apply_gate(gate::Pi{step}, st);
    }

    // Align the relative phase of the two logical branches.
    Circuit probe = twocat_stage(cal, code);
    probe.append(splitting_stage(cal, code, poles(s))).add(gate::EnsR{Axis::y, pi / 2.0});
    const JointState out0 = apply_circuit(probe, product_state(1.0, 0.0, dicke_state(s, s.value())));
    const JointState out1 = apply_circuit(probe, product_state(0.0, 1.0, dicke_state(s, s.value())));
    const cplx o0 = code.zero().amp.dot(out0.block(0));
    const cplx o1 = code.one().amp.dot(out1.block(0));
    cal.phase_fix = 2.0 * (std::arg(o1) - std::arg(o0));
    cal.phase_fix = wrap_angle(cal.phase_fix, 4.0 * pi);
    cal.output_phase = o0 / std::abs(o0);
    return cal;
}

}  // namespace

EncodingCalibration calibrate_encoding(const CatCode& code) {
    static std::mutex mutex;
    static std::map<std::pair<int, int>, EncodingCalibration> cache;
    const auto key = std::make_pair(code.n_components(), code.spin().twice());
    {
        std::lock_guard lock(mutex);
        auto it = cache.find(key);
        if (it != cache.end()) return it->second;
    }
    EncodingCalibration cal = run_calibration(code);
    std::lock_guard lock(mutex);
    cache.emplace(key, cal);
    return cal;
}

Circuit encode_circuit(const ProtocolParams& p) {
    const EncodingCalibration cal = calibrate_encoding(p.code);
    Circuit c = twocat_stage(cal, p.code);
    c.append(splitting_stage(cal, p.code, poles(p.code.spin())));
    c.add(gate::EnsR{Axis::y, pi / 2.0});
    c.name = "encode";
    c.tracked_phase = cal.output_phase;
    return c;
}

Circuit decode_circuit(const ProtocolParams& p) {
    Circuit c = dagger(encode_circuit(p));
    c.name = "decode";
    return c;
}

MSet gamma_set(const ProtocolParams& p, int k, int l) { return support_gamma(p.code, k, l, p.eps_supp); }

std::string gate_label(LogicalGate g) {
    switch (g) {
        case LogicalGate::cnot_ensemble: return "CNOT_ens";
        case LogicalGate::cnot_electron: return "CNOT_el";
        case LogicalGate::hadamard: return "H";
        case LogicalGate::phase: return "P";
    }
    return "?";
}

namespace {

Circuit ensemble_conditional_flip(const MSet& gamma, double angle) {
    Circuit c;
    c.add(gate::EnsR{Axis::y, rotated_frame_angle})
        .add(gate::CondR{Axis::x, angle, gamma})
        .add(gate::EnsR{Axis::y, -rotated_frame_angle});
    return c;
}

}  // namespace

Circuit cnot_ensemble_control(const ProtocolParams& p, int k, int l) {
    Circuit c = ensemble_conditional_flip(gamma_set(p, k, l), pi);
    c.name = "cnot_ensemble_control";
    c.note = "|0_L>|e> -> -i |0_L> X|e>, |1_L>|e> unchanged";
    return c;
}

Circuit cnot_electron_control(const ProtocolParams& p) {
    const CatCode& code = p.code;
    const double t = pi / p.a;
    Circuit c;
    c.name = "cnot_electron_control";
    c.add(gate::FreeEvolve{t, p.collinear()});
    c.add(gate::EnsR{Axis::z, -(p.omega_n - p.a / 2.0) * t});
    // Undo the Zeeman phase and the (-1)^s phase picked up by sector s on the up branch.
    // Sector s is reached by the signed ladder shift closest to zero.
    const int n = code.sectors();
    for (int sector = 0; sector < n; ++sector) {
        const int shift = sector <= n / 2 ? sector : sector - n;
        const double angle = wrap_angle(-p.omega_e * t - pi * shift, 4.0 * pi);
        if (angle != 0.0) c.add(gate::CondR{Axis::z, angle, sector_mset(code.spin(), code.n_components(), sector)});
    }
    c.note = "|b>|dn> -> |b>|dn>, |b>|up> -> |1-b>|up>";
    return c;
}

std::array<double, 3> zyz_angles(const Eigen::Matrix2cd& u) {
    // Our (dn, up) basis is the standard (up, dn) basis reversed.
    Eigen::Matrix2cd v;
    v << u(1, 1), u(1, 0), u(0, 1), u(0, 0);
    v /= std::sqrt(v.determinant());
    const double b = 2.0 * std::atan2(std::abs(v(1, 0)), std::abs(v(0, 0)));
    const double sum = std::abs(v(1, 1)) > 1e-12 ? 2.0 * std::arg(v(1, 1)) : 0.0;
    const double diff = std::abs(v(1, 0)) > 1e-12 ? 2.0 * std::arg(v(1, 0)) : 0.0;
    return {0.5 * (sum + diff), b, 0.5 * (sum - diff)};
}

Circuit hadamard_circuit(const ProtocolParams& p, int k, int l, double t_h) {
    const CatCode& code = p.code;
    const int n = code.sectors();
    const Circuit cnot = cnot_ensemble_control(p, k, l);
    Circuit c;
    c.name = "hadamard";
    c.append(cnot);
    c.add(gate::FreeEvolve{t_h, p.collinear()});

    Eigen::Matrix2cd had;
    had << 1, 1, 1, -1;
    had /= std::sqrt(2.0);
    Eigen::Matrix2cd a_inv;
    a_inv << 0, imag_unit, 1, 0;
    Eigen::Matrix2cd target = Eigen::Matrix2cd::Zero();
    target(0, 0) = -1.0;
    target(1, 1) = imag_unit;
    for (int shift = -k; shift <= k; ++shift) {
        const double phi_dn = (p.omega_n - p.a / 2.0) * t_h * shift;
        const double phi_up = (p.omega_n + p.a / 2.0) * t_h * shift;
        Eigen::Matrix2cd dmat = Eigen::Matrix2cd::Zero();
        dmat(0, 0) = std::exp(imag_unit * (p.omega_e * t_h / 2.0 - phi_dn));
        dmat(1, 1) = std::exp(imag_unit * (-p.omega_e * t_h / 2.0 - phi_up));
        const Eigen::Matrix2cd dinv = dmat.inverse();
        const Eigen::Matrix2cd u = dinv * target * had * a_inv * dinv;
        const auto ang = zyz_angles(u);
        const int sector = ((shift % n) + n) % n;
        const MSet ms = sector_mset(code.spin(), code.n_components(), sector);
        c.add(gate::CondR{Axis::z, ang[2], ms}).add(gate::CondR{Axis::y, ang[1], ms}).add(gate::CondR{Axis::z, ang[0], ms});
    }
    c.add(gate::FreeEvolve{t_h, p.collinear()});
    c.add(gate::EnsR{Axis::z, -2.0 * p.omega_n * t_h});
    c.append(cnot);
    c.add(gate::Ux{pi});
    c.note = "t_H = " + std::to_string(t_h);
    return c;
}

namespace {

double codespace_gate_fidelity(const ProtocolParams& p, const Circuit& c, LogicalGate g, double theta) {
    const Eigen::Matrix4cd ideal = ideal_action(g, theta);
    double worst = 1.0;
    const double h = 1.0 / std::sqrt(2.0);
    const std::vector<Eigen::Vector2cd> logical = {Eigen::Vector2cd(1, 0), Eigen::Vector2cd(0, 1),
                                                   Eigen::Vector2cd(h, h), Eigen::Vector2cd(h, imag_unit * h)};
    for (const auto& lv : logical) {
        Eigen::Vector4cd in = Eigen::Vector4cd::Zero();
        in(0) = lv(0);
        in(2) = lv(1);
        const Eigen::Vector4cd want = ideal * in;
        const JointState out = apply_circuit(c, encode_logical(p.code, in));
        const JointState ref = encode_logical(p.code, want);
        worst = std::min(worst, std::norm(ref.amp.dot(out.amp)));
    }
    return worst;
}

}  // namespace

HadamardChoice calibrate_hadamard(const ProtocolParams& p, int k, int l) {
    HadamardChoice out;
    const double candidates[] = {pi / p.a, 2.0 * pi / (p.code.n_components() * p.a)};
    for (double t : candidates) {
        const double f = codespace_gate_fidelity(p, hadamard_circuit(p, k, l, t), LogicalGate::hadamard, 0.0);
        out.candidates.emplace_back(t, f);
        if (f > out.codespace_fidelity) {
            out.codespace_fidelity = f;
            out.t_h = t;
        }
    }
    return out;
}

Circuit hadamard_circuit(const ProtocolParams& p, int k, int l) {
    return hadamard_circuit(p, k, l, calibrate_hadamard(p, k, l).t_h);
}

Circuit phase_gate_circuit(const ProtocolParams& p, double theta, int k, int l) {
    if (!(p.omega_e > 0.0)) throw std::invalid_argument("phase gate needs omega_e > 0");
    const MSet gamma = gamma_set(p, k, l);
    Circuit c;
    c.name = "phase";
    c.add(gate::EnsR{Axis::y, rotated_frame_angle}).add(gate::CondR{Axis::x, pi, gamma});
    const double t = wrap_angle(theta, 2.0 * pi) / p.omega_e;
    if (t > 0.0) c.add(gate::FreeEvolve{t, {p.omega_e, 0.0, 0.0, 0.0}});
    c.add(gate::CondR{Axis::x, -pi, gamma}).add(gate::EnsR{Axis::y, -rotated_frame_angle});
    c.note = "diag(1, e^{i theta}) with theta = " + std::to_string(theta);
    return c;
}

Circuit build_logical_gate(const ProtocolParams& p, LogicalGate g, int k, int l, double theta) {
    switch (g) {
        case LogicalGate::cnot_ensemble: return cnot_ensemble_control(p, k, l);
        case LogicalGate::cnot_electron: return cnot_electron_control(p);
        case LogicalGate::hadamard: return hadamard_circuit(p, k, l);
        case LogicalGate::phase: return phase_gate_circuit(p, theta, k, l);
    }
    throw std::invalid_argument("unknown logical gate");
}

Eigen::Matrix4cd ideal_action(LogicalGate g, double theta) {
    Eigen::Matrix4cd u = Eigen::Matrix4cd::Zero();
    const double h = 1.0 / std::sqrt(2.0);
    switch (g) {
        case LogicalGate::cnot_ensemble:
            u(1, 0) = -imag_unit;
            u(0, 1) = -imag_unit;
            u(2, 2) = 1.0;
            u(3, 3) = 1.0;
            break;
        case LogicalGate::cnot_electron:
            u(0, 0) = 1.0;
            u(2, 2) = 1.0;
            u(3, 1) = 1.0;
            u(1, 3) = 1.0;
            break;
        case LogicalGate::hadamard:
            for (int e = 0; e < 2; ++e) {
                u(e, e) = h;
                u(e, 2 + e) = h;
                u(2 + e, e) = h;
                u(2 + e, 2 + e) = -h;
            }
            break;
        case LogicalGate::phase:
            // The electron is the phase ancilla: an up electron picks up the conjugate phase.
            u(0, 0) = 1.0;
            u(1, 1) = std::exp(imag_unit * theta);
            u(2, 2) = std::exp(imag_unit * theta);
            u(3, 3) = 1.0;
            break;
    }
    return u;
}

JointState encode_logical(const CatCode& code, const Eigen::Vector4cd& c, const ErrorWord& error) {
    const SpinLength s = code.spin();
    const int d = s.dim();
    Vec amp = Vec::Zero(2 * d);
    for (int e = 0; e < 2; ++e) {
        const Vec ens = c(e) * code.zero().amp + c(2 + e) * code.one().amp;
        amp.segment(e * d, d) = apply_word(error, s, ens);
    }
    const double nrm = amp.norm();
    if (nrm < 1e-300) throw std::invalid_argument("error word annihilates the logical state");
    return {s, amp / nrm};
}

double free_time_after_flips(double t_flip, double a) {
    if (!(a > 0.0) || t_flip < 0.0) throw std::invalid_argument("invalid flip timing");
    const double period = 4.0 * pi / a;
    return std::ceil(a * t_flip / (4.0 * pi) - 1e-12) * period - t_flip;
}

Circuit correct_pm(const ProtocolParams& p, int k, double t_flip_elapsed) {
    const CatCode& code = p.code;
    const SpinLength s = code.spin();
    const int n = code.sectors();
    if (k < 1) throw std::invalid_argument("ladder correction needs k >= 1");
    if (2 * k >= n + 1) throw std::invalid_argument("ladder order exceeds code capacity");
    Circuit c;
    c.name = "correct_pm";
    auto settle = [&]() {
        if (t_flip_elapsed > 0.0) {
            const double t_free = free_time_after_flips(t_flip_elapsed, p.a);
            if (t_free > 0.0) c.add(gate::FreeEvolve{t_free, {0.0, p.omega_n, p.a, 0.0}});
            const double total = t_flip_elapsed + t_free;
            c.add(gate::EnsR{Axis::z, -wrap_angle(p.omega_n * total, 2.0 * pi)});
        }
        c.add(gate::ResetElectron{});
    };
    // Raising errors: pump sectors 1..k down by one, k times.
    for (int stage = 0; stage < k; ++stage) {
        for (int sec = 1; sec <= k; ++sec)
            for (double m : sector_mset(s, code.n_components(), sec)) {
                if (!s.contains(m - 1.0)) continue;
                const double g = flipflop_coupling(s, m - 1.0);
                if (g > 0.0) c.add(gate::FlipFlop{pi / (2.0 * g), m - 1.0});
            }
        settle();
    }
    // Lowering errors: pump sectors n-1..n-k up by one.
    for (int stage = 0; stage < k; ++stage) {
        for (int sec = n - k; sec <= n - 1; ++sec)
            for (double m : sector_mset(s, code.n_components(), sec)) {
                if (!s.contains(m + 1.0)) continue;
                const double g = flipflip_coupling(s, m + 1.0);
                if (g > 0.0) c.add(gate::FlipFlip{pi / (2.0 * g), m + 1.0});
            }
        settle();
    }
    return c;
}

double dephasing_stage_time(int l, int k_int, double total_time, double omega_n) {
    if (l < 1) throw std::invalid_argument("stage index must be >= 1");
    const double t = (k_int * pi + total_time * (omega_n + 0.5)) / l;
    if (!(t > 0.0)) throw std::invalid_argument("stage time not positive; increase k_int");
    return t;
}

double refocus_time(double phase_offset, double polarization, double omega_n) {
    if (!(polarization > 0.0)) throw std::invalid_argument("polarization must be positive");
    return (2.0 * pi - phase_offset) / (2.0 * polarization * (omega_n + 0.5));
}

namespace {

MSet widened_poles(SpinLength s, int l) {
    MSet out;
    for (int j = 0; j <= l && j <= s.twice(); ++j) {
        out.push_back(s.value() - j);
        if (s.value() - j != -s.value() + j) out.push_back(-s.value() + j);
    }
    return out;
}

}  // namespace

Circuit twocat_unsplit_widened(const ProtocolParams& p, int l) {
    const EncodingCalibration cal = calibrate_encoding(p.code);
    const MSet wide = widened_poles(p.code.spin(), l);
    const double step = 4.0 * pi / p.code.n_components();
    Circuit c;
    c.name = "unsplit_widened";
    c.add(gate::EnsR{Axis::y, -pi / 2.0});
    for (auto it = cal.angles.rbegin(); it != cal.angles.rend(); ++it)
        c.add(gate::Pi{-step}).add(gate::CondR{Axis::x, -*it, wide});
    return c;
}

Circuit dephasing_pump_stage(const ProtocolParams& p, int l) {
    const SpinLength s = p.code.spin();
    const double top = s.value();
    Circuit c;
    c.name = "pump";
    for (int j = 0; j < l; ++j) {
        const double m_up = top - j;  // |dn, m_up - 1> -> |up, m_up>
        if (s.contains(m_up - 1.0)) {
            const double g = flipflip_coupling(s, m_up);
            if (g > 0.0) c.add(gate::FlipFlip{pi / (2.0 * g), m_up});
        }
        const double m_dn = -top + j;  // |dn, m_dn + 1> -> |up, m_dn>
        if (s.contains(m_dn + 1.0)) {
            const double g = flipflop_coupling(s, m_dn);
            if (g > 0.0) c.add(gate::FlipFlop{pi / (2.0 * g), m_dn});
        }
    }
    return c;
}

Circuit twocat_resplit(const ProtocolParams& p) {
    const EncodingCalibration cal = calibrate_encoding(p.code);
    Circuit c;
    c.name = "resplit";
    c.add(gate::Ux{pi});
    c.append(splitting_stage(cal, p.code, poles(p.code.spin())));
    c.add(gate::EnsR{Axis::y, pi / 2.0});
    return c;
}

Circuit correct_dephasing_single(const ProtocolParams& p, int l) {
    if (l < 1) throw std::invalid_argument("dephasing correction needs l >= 1");
    Circuit c;
    c.name = "correct_dephasing_single";
    c.append(twocat_unsplit_widened(p, l));
    c.add(gate::ResetElectron{});
    for (int stage = 0; stage < l; ++stage) {
        c.append(dephasing_pump_stage(p, l));
        c.add(gate::ResetElectron{});
    }
    c.append(twocat_resplit(p));
    c.name = "correct_dephasing_single";
    return c;
}

TwoEnsembleState two_ensemble_product(cplx down, cplx up, const DickeVector& a, const DickeVector& b) {
    const int da = a.spin.dim();
    const int db = b.spin.dim();
    if (2L * da * db > transfer_dimension_budget)
        throw std::invalid_argument("two-ensemble dimension exceeds budget");
    Vec amp(2 * da * db);
    const cplx e[2] = {down, up};
    for (int ei = 0; ei < 2; ++ei)
        for (int ra = 0; ra < da; ++ra)
            for (int rb = 0; rb < db; ++rb) amp((ei * da + ra) * db + rb) = e[ei] * a.amp(ra) * b.amp(rb);
    return {a.spin, b.spin, amp};
}

TransferCircuit correct_dephasing_transfer(const ProtocolParams& pa, const ProtocolParams& pb) {
    const long dim = 2L * pa.code.spin().dim() * pb.code.spin().dim();
    if (dim > transfer_dimension_budget) throw std::invalid_argument("two-ensemble dimension exceeds budget");
    const int ka = pa.code.ladder_order();
    const int kb = pb.code.ladder_order();
    TransferCircuit t;
    t.steps.push_back({0, cnot_ensemble_control(pa, ka, pa.code.dephasing_order())});
    t.steps.push_back({0, cnot_electron_control(pa)});
    t.steps.push_back({1, cnot_electron_control(pb)});
    t.steps.push_back({1, cnot_ensemble_control(pb, kb, pb.code.dephasing_order())});
    t.cnot_count = 4;
    // B now holds X_L|psi> and the electron is up.
    Circuit fix;
    fix.name = "transfer_fix";
    fix.add(gate::EnsR{Axis::z, 2.0 * pi / pb.code.n_components()}).add(gate::Ux{pi});
    t.steps.push_back({1, fix});
    return t;
}

TwoEnsembleState apply_transfer(const TransferCircuit& c, const TwoEnsembleState& s) {
    const int da = s.spin_a.dim();
    const int db = s.spin_b.dim();
    TwoEnsembleState out = s;
    for (const auto& step : c.steps) {
        if (step.ensemble == 0) {
            Mat cols(2 * da, db);
            for (int ei = 0; ei < 2; ++ei)
                for (int ra = 0; ra < da; ++ra)
                    for (int rb = 0; rb < db; ++rb) cols(ei * da + ra, rb) = out.amp((ei * da + ra) * db + rb);
            apply_circuit_columns(step.circuit, cols, s.spin_a);
            for (int ei = 0; ei < 2; ++ei)
                for (int ra = 0; ra < da; ++ra)
                    for (int rb = 0; rb < db; ++rb) out.amp((ei * da + ra) * db + rb) = cols(ei * da + ra, rb);
        } else {
            Mat cols(2 * db, da);
            for (int ei = 0; ei < 2; ++ei)
                for (int ra = 0; ra < da; ++ra)
                    for (int rb = 0; rb < db; ++rb) cols(ei * db + rb, ra) = out.amp((ei * da + ra) * db + rb);
            apply_circuit_columns(step.circuit, cols, s.spin_b);
            for (int ei = 0; ei < 2; ++ei)
                for (int ra = 0; ra < da; ++ra)
                    for (int rb = 0; rb < db; ++rb) out.amp((ei * da + ra) * db + rb) = cols(ei * db + rb, ra);
        }
    }
    return out;
}

Mat reduced_ensemble_b(const TwoEnsembleState& s) {
    const int da = s.spin_a.dim();
    const int db = s.spin_b.dim();
    Mat rho = Mat::Zero(db, db);
    for (int ei = 0; ei < 2; ++ei)
        for (int ra = 0; ra < da; ++ra) {
            const Vec v = s.amp.segment((ei * da + ra) * db, db);
            rho += v * v.adjoint();
        }
    return rho;
}

Mat reduced_electron(const TwoEnsembleState& s) {
    const long half = s.amp.size() / 2;
    const Vec dn = s.amp.head(half);
    const Vec up = s.amp.tail(half);
    Mat e(2, 2);
    e << dn.squaredNorm(), up.dot(dn), dn.dot(up), up.squaredNorm();
    return e;
}

}  // namespace spincat
