#include "spincat/pulse.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace spincat {

namespace {

// Electron operators in the (down, up) basis, already halved.
Eigen::Matrix2cd electron_pauli_half(Axis axis) {
    Eigen::Matrix2cd m = Eigen::Matrix2cd::Zero();
    switch (axis) {
        case Axis::x:
            m(0, 1) = m(1, 0) = 0.5;
            break;
        case Axis::y:
            m(0, 1) = 0.5 * imag_unit;
            m(1, 0) = -0.5 * imag_unit;
            break;
        case Axis::z:
            m(0, 0) = -0.5;
            m(1, 1) = 0.5;
            break;
    }
    return m;
}

Mat kron2(const Eigen::Matrix2cd& e, const Mat& n) {
    const Eigen::Index d = n.rows();
    Mat out = Mat::Zero(2 * d, 2 * d);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            if (e(i, j) != cplx(0.0)) out.block(i * d, j * d, d, d) = e(i, j) * n;
    return out;
}

Mat nuclear_op(SpinLength s, Component c) { return op_collective(s, c).mat; }

Mat embed_nuclear(const Mat& n) { return kron2(Eigen::Matrix2cd::Identity(), n); }

struct HermitianExp {
    Eigen::SelfAdjointEigenSolver<Mat> eig;

    explicit HermitianExp(const Mat& h) : eig(h) {}
    Mat operator()(double t) const {
        const RVec& e = eig.eigenvalues();
        Vec ph(e.size());
        for (Eigen::Index k = 0; k < e.size(); ++k) ph(k) = std::exp(-imag_unit * e(k) * t);
        return eig.eigenvectors() * ph.asDiagonal() * eig.eigenvectors().adjoint();
    }
};

Mat expm_hermitian(const Mat& h, double t) { return HermitianExp(h)(t); }

double gate_fidelity(const Mat& ideal, const Mat& u) {
    const double dim = static_cast<double>(u.rows());
    return std::norm((ideal.adjoint() * u).trace()) / (dim * dim);
}

double wrap_angle(double x, double period) {
    double r = std::fmod(x, period);
    if (r < 0.0) r += period;
    return r;
}

std::vector<Tone> active_tones(const DriveParams& p) {
    if (!p.tones.empty()) return p.tones;
    if (p.omega != 0.0) return {Tone{p.delta, 0.0, p.omega}};
    return {};
}

double golden_max(const auto& f, double lo, double hi, int iters = 60) {
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
    double f1 = f(x1), f2 = f(x2);
    for (int i = 0; i < iters; ++i) {
        if (f1 < f2) {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
        }
    }
    return f1 > f2 ? x1 : x2;
}

}  // namespace

Mat electron_op(SpinLength s, Axis axis) {
    return kron2(electron_pauli_half(axis), Mat::Identity(s.dim(), s.dim()));
}

Mat coupled_op(SpinLength s, Axis e, Component n) { return kron2(electron_pauli_half(e), nuclear_op(s, n)); }

Mat h_rwa(SpinLength s, const DriveParams& p, double t) {
    Mat h = p.omega_n * embed_nuclear(nuclear_op(s, Component::z)) + p.a * coupled_op(s, Axis::z, Component::z);
    if (p.a_nc != 0.0)
        h += p.a_nc * coupled_op(s, Axis::z, p.nc_axis == TransverseAxis::x ? Component::x : Component::y);
    const auto tones = active_tones(p);
    if (!tones.empty()) {
        const Mat sx = electron_op(s, Axis::x), sy = electron_op(s, Axis::y);
        for (const auto& tone : tones) {
            const double ph = tone.detuning * t + tone.phase;
            h += tone.amplitude * (std::cos(ph) * sx + std::sin(ph) * sy);
        }
    }
    return h;
}

std::optional<std::string> rwa_warning(const DriveParams& p, double ratio) {
    for (const auto& tone : active_tones(p)) {
        if (tone.amplitude < 0.0) return std::string("negative tone amplitude");
        const double carrier = 2.0 * p.omega_e + tone.detuning;  // omega_k + omega_e
        if (tone.amplitude > ratio * std::abs(carrier))
            return fmt::format("RWA questionable: Omega = {} against omega_k + omega_e = {}", tone.amplitude, carrier);
    }
    return std::nullopt;
}

// ---------------------------------------------------------------- sequences

int PulseSequence::value(double t) const {
    const double tt = wrap_angle(t, period());
    int sign = initial_sign;
    for (double sw : switches) {
        if (sw > tt) break;
        sign = -sign;
    }
    return sign;
}

void PulseSequence::validate() const {
    if (!(tau > 0.0)) throw std::invalid_argument("pulse sequence needs tau > 0");
    if (initial_sign != 1 && initial_sign != -1) throw std::invalid_argument("initial sign must be +-1");
    for (std::size_t i = 0; i < switches.size(); ++i) {
        if (switches[i] < 0.0 || switches[i] >= period())
            throw std::invalid_argument(fmt::format("switch {} outside [0, 2 tau)", switches[i]));
        if (i > 0 && !(switches[i] > switches[i - 1]))
            throw std::invalid_argument("switching times must be strictly increasing");
    }
}

std::vector<PulseSequence::Segment> PulseSequence::segments() const {
    validate();
    std::vector<Segment> out;
    double start = 0.0;
    int sign = initial_sign;
    for (double sw : switches) {
        if (sw > start) out.push_back({start, sw, sign});
        start = sw;
        sign = -sign;
    }
    if (period() > start) out.push_back({start, period(), sign});
    return out;
}

PulseSequence square_wave(double tau, int harmonic) {
    if (harmonic < 1) throw std::invalid_argument("square wave harmonic must be >= 1");
    PulseSequence seq;
    seq.tau = tau;
    // sign(sin(pi h t / tau)): flips every tau / h.
    for (int k = 1; k < 2 * harmonic; ++k) seq.switches.push_back(k * tau / harmonic);
    return seq;
}

PulseSequence shifted(const PulseSequence& seq, double dt) {
    const double per = seq.period();
    // Flip points of the periodic signal, including the wrap point when the ends differ.
    std::vector<double> flips;
    const auto segs = seq.segments();
    for (std::size_t i = 1; i < segs.size(); ++i) flips.push_back(segs[i].start);
    if (segs.front().sign != segs.back().sign) flips.push_back(0.0);
    PulseSequence out;
    out.tau = seq.tau;
    out.initial_sign = seq.value(-dt);
    for (double f : flips) {
        const double t = wrap_angle(f + dt, per);
        if (t > 1e-12 * per && t < per * (1.0 - 1e-12)) out.switches.push_back(t);
    }
    std::sort(out.switches.begin(), out.switches.end());
    return out;
}

PulseSequence quarter_shifted(const PulseSequence& seq, int harmonic) {
    if (harmonic < 1) throw std::invalid_argument("harmonic must be >= 1");
    return shifted(seq, -seq.tau / (2.0 * harmonic));
}

FourierResult fourier_coeffs(const PulseSequence& seq, int l_max) {
    if (l_max < 0) throw std::invalid_argument("l_max must be non-negative");
    FourierResult r;
    r.tau = seq.tau;
    r.p.assign(l_max + 1, 0.0);
    r.q.assign(l_max + 1, 0.0);
    for (const auto& sg : seq.segments()) {
        r.p[0] += sg.sign * (sg.end - sg.start) / seq.tau;
        for (int l = 1; l <= l_max; ++l) {
            const double w = r.omega(l);
            r.p[l] += sg.sign * (std::sin(w * sg.end) - std::sin(w * sg.start)) / (w * seq.tau);
            r.q[l] += sg.sign * (std::cos(w * sg.start) - std::cos(w * sg.end)) / (w * seq.tau);
        }
    }
    return r;
}

FourierResult fourier_coeffs_quadrature(const PulseSequence& seq, int l_max, int samples) {
    FourierResult r;
    r.tau = seq.tau;
    r.p.assign(l_max + 1, 0.0);
    r.q.assign(l_max + 1, 0.0);
    const double h = seq.period() / samples;
    for (int i = 0; i < samples; ++i) {
        const double t = (i + 0.5) * h;
        const int f = seq.value(t);
        for (int l = 0; l <= l_max; ++l) {
            r.p[l] += f * std::cos(r.omega(l) * t) * h / seq.tau;
            r.q[l] += f * std::sin(r.omega(l) * t) * h / seq.tau;
        }
    }
    return r;
}

namespace {

// Odd extension of switches u_1 < ... < u_m in (0, tau): flips at 0, u_i, tau, 2 tau - u_i.
PulseSequence odd_sequence(double tau, const std::vector<double>& u) {
    PulseSequence seq;
    seq.tau = tau;
    for (double x : u) seq.switches.push_back(x);
    seq.switches.push_back(tau);
    for (auto it = u.rbegin(); it != u.rend(); ++it) seq.switches.push_back(2.0 * tau - *it);
    return seq;
}

// Q_l of the odd extension: twice the half-period integral.
double odd_q(double tau, const std::vector<double>& u, int l) {
    const double w = pi * l / tau;
    double q = 0.0, start = 0.0;
    int sign = 1;
    auto add = [&](double a, double b) { q += sign * (std::cos(w * a) - std::cos(w * b)); };
    for (double x : u) {
        add(start, x);
        start = x;
        sign = -sign;
    }
    add(start, tau);
    return 2.0 * q / (w * tau);
}

}  // namespace

OptimizeResult optimize_sequence(int l_target, double tau, int max_switches, double p_tol, double q_floor) {
    if (l_target < 1) throw std::invalid_argument("target harmonic must be >= 1");
    if (max_switches < 2) throw std::invalid_argument("an odd sequence needs at least 2 switches per period");
    const int m_max = (max_switches - 2) / 2;
    const int grid = 40;
    const double h = tau / grid;

    std::vector<double> best_u;
    double best_q = odd_q(tau, {}, l_target);

    // Exhaustive grid over interior switch sets of every admissible size.
    std::vector<int> idx;
    for (int m = 1; m <= m_max; ++m) {
        idx.resize(m);
        for (int i = 0; i < m; ++i) idx[i] = i + 1;
        while (true) {
            std::vector<double> u(m);
            for (int i = 0; i < m; ++i) u[i] = idx[i] * h;
            const double q = odd_q(tau, u, l_target);
            if (std::abs(q) > std::abs(best_q) + 1e-12) {
                best_q = q;
                best_u = u;
            }
            int k = m - 1;
            while (k >= 0 && idx[k] == grid - m + k) --k;
            if (k < 0) break;
            ++idx[k];
            for (int j = k + 1; j < m; ++j) idx[j] = idx[j - 1] + 1;
        }
    }

    // Coordinate refinement with a shrinking step, keeping the ordering strict.
    double step = h / 2.0;
    while (step > 1e-10 * tau && !best_u.empty()) {
        bool moved = false;
        for (std::size_t i = 0; i < best_u.size(); ++i) {
            for (double dir : {-1.0, 1.0}) {
                auto u = best_u;
                u[i] += dir * step;
                const double lo = i == 0 ? 0.0 : u[i - 1];
                const double hi = i + 1 == u.size() ? tau : u[i + 1];
                if (u[i] <= lo || u[i] >= hi) continue;
                const double q = odd_q(tau, u, l_target);
                if (std::abs(q) > std::abs(best_q) + 1e-15) {
                    best_q = q;
                    best_u = u;
                    moved = true;
                }
            }
        }
        if (!moved) step /= 2.0;
    }

    OptimizeResult out;
    out.sequence = odd_sequence(tau, best_u);
    const auto fc = fourier_coeffs(out.sequence, l_target);
    out.q = fc.q[l_target];
    out.p = fc.p[l_target];
    out.budget_limited = std::abs(out.p) > p_tol || std::abs(out.q) < q_floor;
    return out;
}

// ---------------------------------------------------------------- engineered rotations

EngineeredRotation engineered_rotation_sim(const PulseSequence& seq_in, int harmonic, SpinLength s,
                                           const DriveParams& p, double theta_target) {
    if (!(p.omega_n > 0.0)) throw std::invalid_argument("engineered rotations need omega_n > 0");
    // Rescale so that omega_l = pi l / tau equals omega_n.
    const double tau = pi * harmonic / p.omega_n;
    PulseSequence seq = seq_in;
    const double scale = tau / seq_in.tau;
    seq.tau = tau;
    for (double& x : seq.switches) x *= scale;

    const auto fc = fourier_coeffs(seq, harmonic);
    const double pl = fc.p[harmonic], ql = fc.q[harmonic];

    EngineeredRotation out;
    out.predicted_strength = 0.5 * p.a_nc * std::hypot(pl, ql);
    out.predicted_axis = std::atan2(-ql, pl);
    const double per = seq.period();
    const double area = out.predicted_strength * per;
    out.periods = area > 0.0 ? static_cast<int>(std::lround(std::abs(theta_target) / area)) : 0;
    out.duration = out.periods * per;

    const int d = s.dim();
    const Mat iz = nuclear_op(s, Component::z), ix = nuclear_op(s, Component::x), iy = nuclear_op(s, Component::y);
    const Mat id = Mat::Identity(d, d);

    // One-period propagator per electron branch (S_z = -1/2, +1/2).
    std::array<Mat, 2> branch_u;
    for (int e = 0; e < 2; ++e) {
        const double sz = e == 0 ? -0.5 : 0.5;
        std::array<HermitianExp, 2> gen{
            HermitianExp(p.omega_n * iz + sz * (p.omega_e * id + p.a * iz + p.a_nc * ix)),
            HermitianExp(p.omega_n * iz - sz * (p.omega_e * id + p.a * iz + p.a_nc * ix))};
        Mat u = id;
        for (const auto& sg : seq.segments()) u = gen[sg.sign > 0 ? 0 : 1](sg.end - sg.start) * u;
        Mat total = id;
        for (int k = 0; k < out.periods; ++k) total = u * total;
        branch_u[e] = total;
    }
    Mat u = Mat::Zero(2 * d, 2 * d);
    u.topLeftCorner(d, d) = branch_u[0];
    u.bottomRightCorner(d, d) = branch_u[1];
    if (unitarity_error(u) > 1e-9) throw std::runtime_error("engineered rotation propagator lost unitarity");

    // Ideal: exp(-i g T Sz (cos a Ix + sin a Iy)) = Rz(a) V exp(-i g T Sz diag(m)) V^dag Rz(a)^dag with
    // Ix = V diag(m) V^dag, so the overlap only needs diag(V^dag Rz^dag U_b Rz V) per branch.
    Eigen::SelfAdjointEigenSolver<Mat> ix_eig(ix);
    const Mat& v = ix_eig.eigenvectors();
    const RVec& mx = ix_eig.eigenvalues();
    const RVec mz = m_values(s);
    std::array<Vec, 2> diag_w;
    auto set_axis = [&](double axis) {
        Vec rz(d);  // exp(-i axis Iz)
        for (int r = 0; r < d; ++r) rz(r) = std::exp(-imag_unit * axis * mz(r));
        for (int e = 0; e < 2; ++e) {
            const Mat w = v.adjoint() * rz.conjugate().asDiagonal() * branch_u[e] * rz.asDiagonal() * v;
            diag_w[e] = w.diagonal();
        }
    };
    auto overlap = [&](double g) {
        cplx tr = 0.0;
        for (int e = 0; e < 2; ++e) {
            const double sz = e == 0 ? -0.5 : 0.5;
            for (int k = 0; k < d; ++k) tr += std::exp(imag_unit * g * out.duration * sz * mx(k)) * diag_w[e](k);
        }
        const double dim = 2.0 * d;
        return std::norm(tr) / (dim * dim);
    };
    set_axis(out.predicted_axis);
    out.fidelity = overlap(out.predicted_strength);

    out.effective_strength = out.predicted_strength;
    out.axis_angle = out.predicted_axis;
    out.fitted_fidelity = out.fidelity;
    if (out.periods > 0) {
        // The overlap oscillates in g and the axis on a scale ~ 1/(theta I); search locally.
        const double theta_act = out.predicted_strength * out.duration;
        const double w = std::min(0.5, 2.0 / (theta_act * (s.value() + 1.0) + 1.0));
        for (int round = 0; round < 3; ++round) {
            set_axis(out.axis_angle);
            out.effective_strength = golden_max(overlap, out.predicted_strength * (1.0 - w),
                                                out.predicted_strength * (1.0 + w), 50);
            out.axis_angle = golden_max(
                [&](double ax) {
                    set_axis(ax);
                    return overlap(out.effective_strength);
                },
                out.predicted_axis - w, out.predicted_axis + w, 40);
        }
        set_axis(out.axis_angle);
        out.fitted_fidelity = overlap(out.effective_strength);
        if (out.fitted_fidelity < out.fidelity) {
            out.fitted_fidelity = out.fidelity;
            out.effective_strength = out.predicted_strength;
            out.axis_angle = out.predicted_axis;
        }
    }
    return out;
}

// ---------------------------------------------------------------- multi-tone rotations

double compensation_phase(double psi, double omega_k, double a, double k) {
    if (!(omega_k > 0.0)) throw std::invalid_argument("tone amplitude must be positive");
    return wrap_angle(psi / omega_k * a * k, 2.0 * pi);
}

double xy8_resonance_track(double a, double k, double tau, double t) {
    if (t < 0.0) throw std::invalid_argument("time must be non-negative");
    const int n = static_cast<int>(std::floor(t / tau));
    const double sgn = n % 2 == 0 ? 1.0 : -1.0;
    return sgn * a * k * t - sgn * 2.0 * tau * a * k * std::ceil(n / 2.0);
}

double xy8_resonance_track_literal(double a, double k, double tau, double t) {
    if (t < 0.0) throw std::invalid_argument("time must be non-negative");
    const int n = static_cast<int>(std::floor(t / tau));
    const double sgn = n % 2 == 0 ? 1.0 : -1.0;
    return sgn * a * k * t + sgn * 2.0 * tau * a * k * std::floor(n / 2.0);
}

double MultitoneResult::worst_target_fidelity() const {
    double w = 1.0;
    for (const auto& b : blocks)
        if (b.targeted) w = std::min(w, b.fidelity);
    return w;
}

double MultitoneResult::worst_leakage() const {
    double w = 0.0;
    for (const auto& b : blocks)
        if (!b.targeted) w = std::max(w, b.leakage);
    return w;
}

namespace {

struct MultitoneRun {
    Mat u;
    double duration;
};

MultitoneRun run_multitone(SpinLength s, const DriveParams& p, const std::vector<double>& targets, double duration,
                           const MultitoneOptions& opts, bool drive_on) {
    const int d = s.dim();
    Mat h_static = p.omega_n * embed_nuclear(nuclear_op(s, Component::z)) + p.a * coupled_op(s, Axis::z, Component::z);
    if (p.a_nc != 0.0)
        h_static += p.a_nc * coupled_op(s, Axis::z, p.nc_axis == TransverseAxis::x ? Component::x : Component::y);
    const Mat sx = electron_op(s, Axis::x), sy = electron_op(s, Axis::y);

    const double i_val = s.value();
    double h_norm = std::abs(p.omega_n) * i_val + 0.5 * std::abs(p.a) * i_val + 0.5 * std::abs(p.a_nc) * i_val;
    if (drive_on) h_norm += p.omega * static_cast<double>(targets.size());
    const double dt_max = 1.0 / (50.0 * std::max(h_norm, 1e-12));

    const int n_pulses = opts.xy8 ? 8 * std::max(1, opts.xy8_cycles) : 0;
    const double tau = opts.xy8 ? duration / n_pulses : duration;
    static constexpr Axis xy8_axes[8] = {Axis::x, Axis::y, Axis::x, Axis::y, Axis::y, Axis::x, Axis::y, Axis::x};
    std::array<Mat, 2> pulse_ops;
    if (opts.xy8) {
        pulse_ops[0] = embed_nuclear(rotation_matrix(s, Axis::x, pi));
        pulse_ops[1] = embed_nuclear(rotation_matrix(s, Axis::y, pi));
    }

    auto tone_phase = [&](double m, double t) {
        if (opts.xy8 && opts.track) return xy8_resonance_track(p.a, m, tau, t);
        return p.a * m * t;
    };

    Mat u = Mat::Identity(2 * d, 2 * d);
    const int n_intervals = opts.xy8 ? n_pulses : 1;
    double spu = opts.steps_per_unit > 0.0 ? opts.steps_per_unit : 1.0 / dt_max;
    for (int j = 0; j < n_intervals; ++j) {
        const double t0 = j * tau;
        const int steps = std::max(1, static_cast<int>(std::ceil(tau * spu)));
        const double dt = tau / steps;
        for (int k = 0; k < steps; ++k) {
            const double tm = t0 + (k + 0.5) * dt;
            Mat h = h_static;
            if (drive_on)
                for (double m : targets) {
                    const double ph = tone_phase(m, tm);
                    h += p.omega * (std::cos(ph) * sx + std::sin(ph) * sy);
                }
            u = expm_hermitian(h, dt) * u;
        }
        if (opts.xy8) u = pulse_ops[xy8_axes[j % 8] == Axis::x ? 0 : 1] * u;
    }
    return {u, duration};
}

}  // namespace

MultitoneResult multitone_cond_rotation(SpinLength s, const DriveParams& p, const std::vector<double>& targets,
                                        double psi, const MultitoneOptions& opts) {
    for (double m : targets)
        if (!s.contains(m)) throw std::invalid_argument(fmt::format("target M = {} outside the spin", m));
    if (!targets.empty() && !(p.omega > 0.0)) throw std::invalid_argument("multi-tone rotation needs Omega > 0");

    MultitoneResult out;
    const double duration = targets.empty() ? std::abs(psi) : std::abs(psi) / p.omega;
    out.duration = duration;
    for (std::size_t i = 0; i < targets.size(); ++i)
        for (std::size_t j = i + 1; j < targets.size(); ++j)
            if (std::abs(p.a * (targets[i] - targets[j])) < 2.0 * p.omega) out.tone_collision = true;

    const auto driven = run_multitone(s, p, targets, duration, opts, true);
    DriveParams bare = p;
    bare.a_nc = 0.0;
    const auto reference = run_multitone(s, bare, targets, duration, opts, false);
    if (unitarity_error(driven.u) > 1e-9) throw std::runtime_error("multi-tone propagator lost unitarity");

    const Mat ui = reference.u.adjoint() * driven.u;
    out.frame_fidelity = gate_fidelity(Mat::Identity(ui.rows(), ui.cols()), ui);
    const int d = s.dim();
    const double c = std::cos(0.5 * psi), sn = std::sin(0.5 * psi);
    Eigen::Matrix2cd rot;  // exp(-i psi S_x)
    rot << c, -imag_unit * sn, -imag_unit * sn, c;

    for (int r = 0; r < d; ++r) {
        BlockReport b;
        b.m = s.m_at(r);
        b.targeted = std::any_of(targets.begin(), targets.end(), [&](double m) { return std::abs(m - b.m) < 1e-9; });
        Eigen::Matrix2cd blk;
        blk << ui(r, r), ui(r, d + r), ui(d + r, r), ui(d + r, d + r);
        b.leakage = std::norm(blk(1, 0));
        b.fidelity = b.targeted ? std::norm((rot.adjoint() * blk).trace()) / 4.0 : std::norm(blk.trace()) / 4.0;
        double detune = std::numeric_limits<double>::infinity();
        for (double m : targets) detune = std::min(detune, std::abs(p.a * (m - b.m)));
        b.bound = targets.empty() ? 0.0 : p.omega * p.omega / (p.omega * p.omega + detune * detune);
        out.blocks.push_back(b);
    }
    return out;
}

double nc_sensitivity(SpinLength s, const DriveParams& p, const std::vector<double>& targets, double psi,
                      const MultitoneOptions& opts) {
    const double duration = targets.empty() ? std::abs(psi) : std::abs(psi) / p.omega;
    DriveParams bare = p;
    bare.a_nc = 0.0;
    const Mat u = run_multitone(s, p, targets, duration, opts, true).u;
    const Mat u0 = run_multitone(s, bare, targets, duration, opts, true).u;
    return 1.0 - gate_fidelity(u0, u);
}

// ---------------------------------------------------------------- sideband gates

namespace {

double ladder_coupling(SpinLength s, double m, SidebandDirection dir) {
    return dir == SidebandDirection::raise ? raise_coeff(s, m) : lower_coeff(s, m);
}

Mat sideband_hamiltonian(SpinLength s, const DriveParams& p, double detuning) {
    Mat h = -detuning * electron_op(s, Axis::z) + p.omega_n * embed_nuclear(nuclear_op(s, Component::z)) +
            p.a * coupled_op(s, Axis::z, Component::z) +
            p.a_nc * coupled_op(s, Axis::z, p.nc_axis == TransverseAxis::x ? Component::x : Component::y) +
            p.omega * electron_op(s, Axis::x);
    return h;
}

struct TransferCurve {
    Vec c_init;  // eigenbasis amplitudes
    Vec c_final;
    RVec energies;

    double at(double t) const {
        cplx acc = 0.0;
        for (Eigen::Index k = 0; k < energies.size(); ++k)
            acc += std::conj(c_final(k)) * std::exp(-imag_unit * energies(k) * t) * c_init(k);
        return std::norm(acc);
    }
};

TransferCurve transfer_curve(SpinLength s, const DriveParams& p, double m, SidebandDirection dir, double detuning) {
    const int d = s.dim();
    const double m_to = dir == SidebandDirection::raise ? m + 1.0 : m - 1.0;
    if (!s.contains(m) || !s.contains(m_to)) throw std::invalid_argument("sideband transition leaves the spin");
    Eigen::SelfAdjointEigenSolver<Mat> eig(sideband_hamiltonian(s, p, detuning));
    const int i0 = s.index_of(m);
    const int i1 = d + s.index_of(m_to);
    TransferCurve c;
    c.energies = eig.eigenvalues();
    c.c_init = eig.eigenvectors().row(i0).adjoint();
    c.c_final = eig.eigenvectors().row(i1).adjoint();
    return c;
}

// Peak of the first Rabi lobe: the stretch where the curve stays above half of its global maximum.
// Fast dressing wiggles on the rising edge are not mistaken for the peak.
std::pair<double, double> first_maximum(const TransferCurve& c, double t_hi, int samples) {
    std::vector<double> v(samples + 1);
    const double h = t_hi / samples;
    double global = 0.0;
    for (int i = 0; i <= samples; ++i) {
        v[i] = c.at(i * h);
        global = std::max(global, v[i]);
    }
    int i = 0;
    while (i <= samples && v[i] < 0.5 * global) ++i;
    int best = i;
    for (; i <= samples && v[i] >= 0.5 * global; ++i)
        if (v[i] > v[best]) best = i;
    const double lo = std::max(0.0, (best - 1) * h), hi = std::min(t_hi, (best + 1) * h);
    const double t = golden_max([&](double x) { return c.at(x); }, lo, hi, 50);
    return {t, c.at(t)};
}

}  // namespace

double sideband_gate_time(double a_nc_eff, SpinLength s, double m, SidebandDirection dir) {
    const double g = ladder_coupling(s, m, dir);
    if (!(a_nc_eff > 0.0) || !(g > 0.0)) throw std::invalid_argument("sideband transition has zero coupling");
    return 2.0 * pi / (a_nc_eff * g);
}

double sideband_resonance(const DriveParams& p, double m, SidebandDirection dir) {
    return dir == SidebandDirection::raise ? p.omega_n + p.a * (m + 0.5) : -p.omega_n + p.a * (m - 0.5);
}

double sideband_transfer(SpinLength s, const DriveParams& p, double m, SidebandDirection dir, double detuning,
                         double t) {
    return transfer_curve(s, p, m, dir, detuning).at(t);
}

SidebandResult sideband_flipflop(SpinLength s, const DriveParams& p, double m, SidebandDirection dir) {
    if (!(p.omega > 0.0) || !(p.omega_n > 0.0)) throw std::invalid_argument("sideband gate needs Omega, omega_n > 0");
    SidebandResult out;
    const double a_eff = p.omega * p.a_nc / p.omega_n;
    out.t_closed_form = sideband_gate_time(a_eff, s, m, dir);
    out.resonance = sideband_resonance(p, m, dir);
    out.regime_ok = p.omega <= 0.1 * std::abs(out.resonance - p.a * m) * (1.0 + 1e-12);

    const double coupling = 0.25 * a_eff * ladder_coupling(s, m, dir);
    const double half_width = 1.5 * std::max(p.omega * p.omega / p.omega_n, 10.0 * coupling);
    const double t_hi = 2.5 * out.t_closed_form;
    const int samples = 1500;

    auto score = [&](double det) { return first_maximum(transfer_curve(s, p, m, dir, det), t_hi, samples).second; };
    const int grid = 120;
    double best_det = out.resonance, best = -1.0;
    for (int i = 0; i <= grid; ++i) {
        const double det = out.resonance - half_width + 2.0 * half_width * i / grid;
        const double v = score(det);
        if (v > best) {
            best = v;
            best_det = det;
        }
    }
    const double step = 2.0 * half_width / grid;
    out.detuning = golden_max(score, best_det - step, best_det + step, 40);
    const auto [t, f] = first_maximum(transfer_curve(s, p, m, dir, out.detuning), t_hi, samples);
    out.t_gate = t;
    out.fidelity = f;
    return out;
}

GeneratorCheck sw_generator_check(SpinLength s, const DriveParams& p, double t) {
    if (!(p.omega_n != 0.0)) throw std::invalid_argument("generator needs omega_n != 0");
    const Mat h0 = p.omega_n * embed_nuclear(nuclear_op(s, Component::z));
    const Mat v = p.a_nc * coupled_op(s, Axis::z, Component::y);
    const Mat szix = coupled_op(s, Axis::z, Component::x);
    const Mat g_fixed = imag_unit * (p.a_nc / p.omega_n) * szix;
    const Mat g_printed = -g_fixed;
    auto comm = [](const Mat& a, const Mat& b) -> Mat { return a * b - b * a; };

    GeneratorCheck out;
    out.generator_residual = (comm(h0, g_fixed) + v).norm();
    out.printed_sign_residual = (comm(h0, g_printed) + v).norm();

    double c = 0.0, sn = 0.0;
    Mat drive = Mat::Zero(h0.rows(), h0.cols());
    for (const auto& tone : active_tones(p)) {
        const double ph = tone.detuning * t + tone.phase;
        drive += tone.amplitude * (std::cos(ph) * electron_op(s, Axis::x) + std::sin(ph) * electron_op(s, Axis::y));
        c += tone.amplitude * std::cos(ph);
        sn += tone.amplitude * std::sin(ph);
    }
    const Mat expected =
        (p.a_nc / p.omega_n) * (c * coupled_op(s, Axis::y, Component::x) - sn * coupled_op(s, Axis::x, Component::x));
    out.drive_residual = (comm(g_printed, drive) - expected).norm();

    const Mat coll = p.a * coupled_op(s, Axis::z, Component::z);
    const Mat iy = embed_nuclear(nuclear_op(s, Component::y));
    const Mat lhs = comm(g_printed, coll);
    out.collinear_residual = (lhs + (p.a * p.a_nc / (4.0 * p.omega_n)) * iy).norm();
    out.printed_collinear_residual =
        (lhs + imag_unit * (p.a * p.a_nc / p.omega_n) * coupled_op(s, Axis::z, Component::y)).norm();
    return out;
}

}  // namespace spincat
