#include "spincat/gates.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <stdexcept>

namespace spincat {

JointState product_state(cplx down, cplx up, const DickeVector& ens) {
    const int d = ens.spin.dim();
    Vec amp(2 * d);
    amp.head(d) = down * ens.amp;
    amp.tail(d) = up * ens.amp;
    return {ens.spin, amp};
}

Mat ensemble_density(const JointState& s) {
    const Vec dn = s.block(0);
    const Vec up = s.block(1);
    return dn * dn.adjoint() + up * up.adjoint();
}

Mat ensemble_density(const Mat& rho, SpinLength s) {
    const int d = s.dim();
    return rho.topLeftCorner(d, d) + rho.bottomRightCorner(d, d);
}

Mat electron_density(const JointState& s) {
    const Vec dn = s.block(0);
    const Vec up = s.block(1);
    // rho_e(i, j) = <block_j | block_i>
    Mat e(2, 2);
    e << dn.squaredNorm(), up.dot(dn), dn.dot(up), up.squaredNorm();
    return e;
}

Mat electron_density(const Mat& rho, SpinLength s) {
    const int d = s.dim();
    Mat e(2, 2);
    e(0, 0) = rho.topLeftCorner(d, d).trace();
    e(0, 1) = rho.topRightCorner(d, d).trace();
    e(1, 0) = rho.bottomLeftCorner(d, d).trace();
    e(1, 1) = rho.bottomRightCorner(d, d).trace();
    return e;
}

Circuit& Circuit::append(const Circuit& other) {
    ops.insert(ops.end(), other.ops.begin(), other.ops.end());
    tracked_phase *= other.tracked_phase;
    return *this;
}

bool Circuit::is_unitary() const {
    for (const auto& g : ops)
        if (!spincat::is_unitary(g)) return false;
    return true;
}

double flipflop_coupling(SpinLength s, double m) { return raise_coeff(s, m); }
double flipflip_coupling(SpinLength s, double m) { return raise_coeff(s, m - 1.0); }

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

const char* axis_name(Axis a) { return a == Axis::x ? "x" : a == Axis::y ? "y" : "z"; }

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

Eigen::Matrix2cd pauli(Axis a) {
    Eigen::Matrix2cd p;
    switch (a) {
        case Axis::x: p << 0, 1, 1, 0; break;
        case Axis::y: p << 0, imag_unit, -imag_unit, 0; break;
        case Axis::z: p << -1, 0, 0, 1; break;
    }
    return p;
}

Eigen::Matrix2cd electron_rotation(Axis a, double angle) {
    return std::cos(angle / 2.0) * Eigen::Matrix2cd::Identity() - imag_unit * std::sin(angle / 2.0) * pauli(a);
}

// Either a per-electron-branch ensemble matrix or a set of 2x2 blocks on pairs of joint indices.
struct GateAction {
    bool branch = false;
    Mat down;  // empty means identity
    Mat up;
    struct Block {
        int a;
        int b;
        Eigen::Matrix2cd u;
    };
    std::vector<Block> blocks;
};

Mat free_branch(SpinLength s, double sz, double t, const HamiltonianTerms& h) {
    const int d = s.dim();
    if (h.a_nc == 0.0) {
        Mat m = Mat::Zero(d, d);
        for (int r = 0; r < d; ++r) {
            const double e = sz * h.omega_e + (h.omega_n + h.a * sz) * s.m_at(r);
            m(r, r) = std::exp(-imag_unit * e * t);
        }
        return m;
    }
    Eigen::MatrixXd hm = Eigen::MatrixXd::Zero(d, d);
    for (int r = 0; r < d; ++r) hm(r, r) = sz * h.omega_e + (h.omega_n + h.a * sz) * s.m_at(r);
    for (int r = 1; r < d; ++r) {
        const double g = 0.5 * h.a_nc * sz * raise_coeff(s, s.m_at(r));
        hm(r - 1, r) += g;
        hm(r, r - 1) += g;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(hm);
    Vec ph(d);
    for (int r = 0; r < d; ++r) ph(r) = std::exp(-imag_unit * es.eigenvalues()(r) * t);
    const Mat v = es.eigenvectors().cast<cplx>();
    return v * ph.asDiagonal() * v.transpose();
}

GateAction build_action(const GateOp& g, SpinLength s) {
    const int d = s.dim();
    GateAction act;
    std::visit(overloaded{
                   [&](const gate::Theta& x) {
                       act.branch = true;
                       act.down = rotation_matrix(s, Axis::x, -x.angle / 2.0);
                       act.up = rotation_matrix(s, Axis::x, x.angle / 2.0);
                   },
                   [&](const gate::CondR& x) {
                       const Eigen::Matrix2cd u = electron_rotation(x.axis, x.angle);
                       std::vector<bool> seen(d, false);
                       for (double m : x.m_set) {
                           const int r = s.index_of(m);
                           if (seen[r]) continue;
                           seen[r] = true;
                           act.blocks.push_back({r, d + r, u});
                       }
                   },
                   [&](const gate::FlipFlop& x) {
                       if (!s.contains(x.m)) throw std::invalid_argument("flip-flop level outside spin range");
                       if (!s.contains(x.m + 1.0)) return;  // no |dn, M+1> partner
                       const double g = flipflop_coupling(s, x.m);
                       Eigen::Matrix2cd u;
                       u << std::cos(g * x.t), -imag_unit * std::sin(g * x.t), -imag_unit * std::sin(g * x.t),
                           std::cos(g * x.t);
                       act.blocks.push_back({s.index_of(x.m + 1.0), d + s.index_of(x.m), u});
                   },
                   [&](const gate::FlipFlip& x) {
                       if (!s.contains(x.m)) throw std::invalid_argument("flip-flip level outside spin range");
                       if (!s.contains(x.m - 1.0)) return;
                       const double g = flipflip_coupling(s, x.m);
                       Eigen::Matrix2cd u;
                       u << std::cos(g * x.t), -imag_unit * std::sin(g * x.t), -imag_unit * std::sin(g * x.t),
                           std::cos(g * x.t);
                       act.blocks.push_back({s.index_of(x.m - 1.0), d + s.index_of(x.m), u});
                   },
                   [&](const gate::Ux& x) {
                       const Eigen::Matrix2cd u = electron_rotation(Axis::x, x.angle);
                       for (int r = 0; r < d; ++r) act.blocks.push_back({r, d + r, u});
                   },
                   [&](const gate::Uy& x) {
                       const Eigen::Matrix2cd u = electron_rotation(Axis::y, x.angle);
                       for (int r = 0; r < d; ++r) act.blocks.push_back({r, d + r, u});
                   },
                   [&](const gate::EnsR& x) {
                       act.branch = true;
                       act.down = rotation_matrix(s, x.axis, x.angle);
                       act.up = act.down;
                   },
                   [&](const gate::Pi& x) {
                       act.branch = true;
                       act.down = rotation_matrix(s, Axis::x, x.phi);
                   },
                   [&](const gate::FreeEvolve& x) {
                       act.branch = true;
                       act.down = free_branch(s, -0.5, x.t, x.h);
                       act.up = free_branch(s, 0.5, x.t, x.h);
                   },
                   [&](const gate::ResetElectron&) {
                       throw std::invalid_argument("electron reset is a channel, not a unitary");
                   },
               },
               g);
    return act;
}

std::string cache_key(const GateOp& g, SpinLength s) {
    std::string key = gate_name(g) + "|" + std::to_string(s.twice());
    std::visit(overloaded{
                   [&](const gate::Theta& x) { key += "|" + num(x.angle); },
                   [&](const gate::CondR& x) {
                       key += std::string("|") + axis_name(x.axis) + "|" + num(x.angle);
                       for (double m : x.m_set) key += "," + num(m);
                   },
                   [&](const gate::FlipFlop& x) { key += "|" + num(x.t) + "|" + num(x.m); },
                   [&](const gate::FlipFlip& x) { key += "|" + num(x.t) + "|" + num(x.m); },
                   [&](const gate::Ux& x) { key += "|" + num(x.angle); },
                   [&](const gate::Uy& x) { key += "|" + num(x.angle); },
                   [&](const gate::EnsR& x) { key += std::string("|") + axis_name(x.axis) + "|" + num(x.angle); },
                   [&](const gate::Pi& x) { key += "|" + num(x.phi); },
                   [&](const gate::FreeEvolve& x) {
                       key += "|" + num(x.t) + "|" + num(x.h.omega_e) + "|" + num(x.h.omega_n) + "|" +
                              num(x.h.a) + "|" + num(x.h.a_nc);
                   },
                   [&](const gate::ResetElectron&) {},
               },
               g);
    return key;
}

class ActionCache {
public:
    std::shared_ptr<const GateAction> get(const GateOp& g, SpinLength s) {
        const std::string key = cache_key(g, s);
        {
            std::shared_lock lock(mutex_);
            auto it = cache_.find(key);
            if (it != cache_.end()) return it->second;
        }
        auto built = std::make_shared<const GateAction>(build_action(g, s));
        std::unique_lock lock(mutex_);
        if (cache_.size() >= max_entries) cache_.clear();
        return cache_.emplace(key, std::move(built)).first->second;
    }

private:
    static constexpr std::size_t max_entries = 2048;
    std::shared_mutex mutex_;
    std::map<std::string, std::shared_ptr<const GateAction>> cache_;
};

ActionCache& action_cache() {
    static ActionCache c;
    return c;
}

// Applies the gate to every column of m (rows are joint indices).
void apply_left(const GateAction& act, Mat& m, int d) {
    if (act.branch) {
        if (act.down.size() > 0) m.topRows(d) = act.down * m.topRows(d);
        if (act.up.size() > 0) m.bottomRows(d) = act.up * m.bottomRows(d);
        return;
    }
    for (const auto& b : act.blocks) {
        const Eigen::RowVectorXcd ra = m.row(b.a);
        const Eigen::RowVectorXcd rb = m.row(b.b);
        m.row(b.a) = b.u(0, 0) * ra + b.u(0, 1) * rb;
        m.row(b.b) = b.u(1, 0) * ra + b.u(1, 1) * rb;
    }
}

}  // namespace

std::string gate_name(const GateOp& g) {
    return std::visit(overloaded{
                          [](const gate::Theta&) { return std::string("Theta"); },
                          [](const gate::CondR&) { return std::string("CondR"); },
                          [](const gate::FlipFlop&) { return std::string("FlipFlop"); },
                          [](const gate::FlipFlip&) { return std::string("FlipFlip"); },
                          [](const gate::Ux&) { return std::string("Ux"); },
                          [](const gate::Uy&) { return std::string("Uy"); },
                          [](const gate::EnsR&) { return std::string("EnsR"); },
                          [](const gate::Pi&) { return std::string("Pi"); },
                          [](const gate::FreeEvolve&) { return std::string("FreeEvolve"); },
                          [](const gate::ResetElectron&) { return std::string("ResetElectron"); },
                      },
                      g);
}

bool is_unitary(const GateOp& g) { return !std::holds_alternative<gate::ResetElectron>(g); }

Mat gate_unitary(const GateOp& g, SpinLength s) {
    const int d = s.dim();
    Mat u = Mat::Identity(2 * d, 2 * d);
    apply_left(*action_cache().get(g, s), u, d);
    return u;
}

Mat circuit_unitary(const Circuit& c, SpinLength s) {
    const int d = s.dim();
    Mat u = Mat::Identity(2 * d, 2 * d);
    for (const auto& g : c.ops) apply_left(*action_cache().get(g, s), u, d);
    return u;
}

GateOp dagger(const GateOp& g) {
    return std::visit(overloaded{
                          [](const gate::Theta& x) -> GateOp { return gate::Theta{-x.angle}; },
                          [](const gate::CondR& x) -> GateOp { return gate::CondR{x.axis, -x.angle, x.m_set}; },
                          [](const gate::FlipFlop& x) -> GateOp { return gate::FlipFlop{-x.t, x.m}; },
                          [](const gate::FlipFlip& x) -> GateOp { return gate::FlipFlip{-x.t, x.m}; },
                          [](const gate::Ux& x) -> GateOp { return gate::Ux{-x.angle}; },
                          [](const gate::Uy& x) -> GateOp { return gate::Uy{-x.angle}; },
                          [](const gate::EnsR& x) -> GateOp { return gate::EnsR{x.axis, -x.angle}; },
                          [](const gate::Pi& x) -> GateOp { return gate::Pi{-x.phi}; },
                          [](const gate::FreeEvolve& x) -> GateOp { return gate::FreeEvolve{-x.t, x.h}; },
                          [](const gate::ResetElectron&) -> GateOp {
                              throw std::invalid_argument("electron reset has no inverse");
                          },
                      },
                      g);
}

Circuit dagger(const Circuit& c) {
    Circuit out;
    out.name = c.name + "^dagger";
    out.note = c.note;
    out.tracked_phase = std::conj(c.tracked_phase);
    for (auto it = c.ops.rbegin(); it != c.ops.rend(); ++it) out.ops.push_back(dagger(*it));
    return out;
}

Circuit pi_gate(double phi) {
    Circuit c;
    c.name = "Pi";
    // down: exp(-i phi/2 Ix) exp(-i phi/2 Ix); up: the two halves cancel
    c.add(gate::EnsR{Axis::x, phi / 2.0}).add(gate::Theta{-phi});
    return c;
}

JointState apply_gate(const GateOp& g, const JointState& s) {
    if (!is_unitary(g)) throw std::invalid_argument("electron reset needs the density-matrix path");
    const int d = s.spin.dim();
    if (s.amp.size() != 2 * d) throw std::invalid_argument("joint state dimension mismatch");
    Mat m = s.amp;
    apply_left(*action_cache().get(g, s.spin), m, d);
    return {s.spin, m.col(0)};
}

JointState apply_circuit(const Circuit& c, const JointState& s) {
    const int d = s.spin.dim();
    if (s.amp.size() != 2 * d) throw std::invalid_argument("joint state dimension mismatch");
    Mat m = s.amp;
    for (const auto& g : c.ops) {
        if (!is_unitary(g)) throw std::invalid_argument("circuit '" + c.name + "' needs the density-matrix path");
        apply_left(*action_cache().get(g, s.spin), m, d);
    }
    return {s.spin, m.col(0)};
}

void apply_circuit_columns(const Circuit& c, Mat& columns, SpinLength s) {
    const int d = s.dim();
    if (columns.rows() != 2 * d) throw std::invalid_argument("column block dimension mismatch");
    for (const auto& g : c.ops) {
        if (!is_unitary(g)) throw std::invalid_argument("circuit '" + c.name + "' is not unitary");
        apply_left(*action_cache().get(g, s), columns, d);
    }
}

Mat reset_electron(const Mat& rho, SpinLength s) {
    const int d = s.dim();
    Mat out = Mat::Zero(2 * d, 2 * d);
    out.topLeftCorner(d, d) = ensemble_density(rho, s);
    return out;
}

Mat apply_gate(const GateOp& g, const Mat& rho, SpinLength s) {
    const int d = s.dim();
    if (rho.rows() != 2 * d || rho.cols() != 2 * d) throw std::invalid_argument("density matrix dimension mismatch");
    if (!is_unitary(g)) return reset_electron(rho, s);
    const auto act = action_cache().get(g, s);
    Mat x = rho;
    apply_left(*act, x, d);
    Mat y = x.adjoint();
    apply_left(*act, y, d);
    return y.adjoint();
}

Mat apply_circuit(const Circuit& c, const Mat& rho, SpinLength s) {
    Mat r = rho;
    for (const auto& g : c.ops) r = apply_gate(g, r, s);
    return r;
}

}  // namespace spincat
