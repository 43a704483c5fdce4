#include "spincat/noise.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <stdexcept>

namespace spincat {

NoiseParams bias_rates(double eta, bool normalized) {
    if (!(eta > 0.0)) throw std::invalid_argument("bias eta must be positive");
    if (std::isinf(eta)) return {0.0, 0.0, 1.0};
    if (normalized) return {0.5 / (1.0 + eta), 0.5 / (1.0 + eta), eta / (1.0 + eta)};
    return {0.5, 0.5, eta};
}

Mat Channel::apply(const Mat& rho) const {
    Mat out = Mat::Zero(rho.rows(), rho.cols());
    for (const Mat& k : kraus) out.noalias() += k * rho * k.adjoint();
    return out;
}

double Channel::completeness_error() const {
    if (kraus.empty()) return 1.0;
    const long d = kraus.front().cols();
    Mat sum = Mat::Zero(d, d);
    for (const Mat& k : kraus) sum.noalias() += k.adjoint() * k;
    return (sum - Mat::Identity(d, d)).cwiseAbs().maxCoeff();
}

Mat apply_to_ensemble(const Channel& c, const Mat& joint_rho, SpinLength s) {
    const int d = s.dim();
    if (joint_rho.rows() != 2 * d) throw std::invalid_argument("joint density has the wrong dimension");
    Mat out = Mat::Zero(2 * d, 2 * d);
    for (const Mat& k : c.kraus)
        for (int e = 0; e < 2; ++e)
            for (int f = 0; f < 2; ++f)
                out.block(e * d, f * d, d, d).noalias() += k * joint_rho.block(e * d, f * d, d, d) * k.adjoint();
    return out;
}

namespace {

Mat inverse_sqrt_psd(const Mat& s) {
    Eigen::SelfAdjointEigenSolver<Mat> es(s);
    const Eigen::VectorXd inv = es.eigenvalues().cwiseMax(0.0).cwiseSqrt().cwiseInverse();
    return es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace

RecoveryMap ideal_recovery(const CatCode& code, int k, int l, double rank_tol) {
    if (k < 0 || l < 0) throw std::invalid_argument("recovery orders must be non-negative");
    if (2 * k >= code.sectors()) throw std::invalid_argument("ladder order exceeds code capacity");
    const SpinLength s = code.spin();
    const int d = s.dim();
    RecoveryMap rec;
    rec.spin = s;
    rec.k = k;
    rec.l = l;
    Mat cw(d, 2);
    cw.col(0) = code.zero().amp;
    cw.col(1) = code.one().amp;
    rec.codewords = cw * inverse_sqrt_psd(cw.adjoint() * cw);

    std::vector<int> shifts = {0};
    for (int j = 1; j <= k; ++j) {
        shifts.push_back(j);
        shifts.push_back(-j);
    }
    for (int shift : shifts) {
        Mat basis(d, 0);
        for (int m = 0; m <= l; ++m) {
            const ErrorWord w = ladder_word(shift, m);
            Mat v(d, 2);
            v.col(0) = apply_word(w, s, code.zero().amp);
            v.col(1) = apply_word(w, s, code.one().amp);
            const double scale = v.squaredNorm();
            if (basis.cols() > 0) v -= basis * (basis.adjoint() * v);
            const Mat gram = v.adjoint() * v;
            Eigen::SelfAdjointEigenSolver<Mat> es(gram);
            if (scale == 0.0 || es.eigenvalues().minCoeff() < rank_tol * scale) {
                rec.dropped.push_back(w.label());
                continue;
            }
            const Mat frame = v * inverse_sqrt_psd(gram);
            Mat grown(d, basis.cols() + 2);
            grown << basis, frame;
            basis = std::move(grown);
            rec.frames.push_back(frame);
            rec.words.push_back({w, 2});
        }
    }
    return rec;
}

Channel RecoveryMap::channel() const {
    Channel c;
    for (const Mat& f : frames) c.kraus.push_back(codewords * f.adjoint());
    return c;
}

double RecoveryMap::failure_weight(const Mat& rho) const {
    double kept = 0.0;
    for (const Mat& f : frames) kept += (f.adjoint() * rho * f).trace().real();
    return rho.trace().real() - kept;
}

double RecoveryMap::fidelity(const Mat& rho, const Eigen::Vector2cd& psi) const {
    double f = 0.0;
    for (const Mat& frame : frames) {
        const Vec v = frame * psi;
        f += (v.adjoint() * rho * v)(0, 0).real();
    }
    return f;
}

double RecoveryMap::joint_fidelity(const Vec& joint, const Eigen::Vector4cd& target) const {
    const int d = spin.dim();
    if (joint.size() != 2 * d) throw std::invalid_argument("joint state has the wrong dimension");
    double f = 0.0;
    for (const Mat& frame : frames) {
        cplx amp = 0.0;
        for (int e = 0; e < 2; ++e) {
            const Eigen::Vector2cd proj = frame.adjoint() * joint.segment(e * d, d);
            for (int b = 0; b < 2; ++b) amp += std::conj(target(2 * b + e)) * proj(b);
        }
        f += std::norm(amp);
    }
    return f;
}

double avg_logical_fidelity(const RecoveryMap& recovery, const Mat& rho_0, const Mat& rho_plus, BlochAverage how) {
    const double h = 1.0 / std::sqrt(2.0);
    const double f0 = recovery.fidelity(rho_0, Eigen::Vector2cd(1.0, 0.0));
    const double fp = recovery.fidelity(rho_plus, Eigen::Vector2cd(h, h));
    return how == BlochAverage::two_point ? 0.5 * (f0 + fp) : (f0 + 2.0 * fp) / 3.0;
}

double avg_logical_fidelity(const CatCode&, const Channel& channel, const RecoveryMap& recovery, BlochAverage how) {
    const double h = 1.0 / std::sqrt(2.0);
    const Vec zero = recovery.codewords.col(0);
    const Vec plus = recovery.codewords * Eigen::Vector2cd(h, h);
    return avg_logical_fidelity(recovery, channel.apply(zero * zero.adjoint()), channel.apply(plus * plus.adjoint()), how);
}

DickeVector inject_error(const DickeVector& state, const ErrorWord& word) {
    Vec v = apply_word(word, state.spin, state.amp);
    const double n = v.norm();
    if (n < 1e-300 * std::max(1.0, state.norm())) throw std::domain_error("error word " + word.label() + " annihilates the state");
    return {state.spin, v / n};
}

JointState inject_error(const JointState& state, const ErrorWord& word) {
    const int d = state.spin.dim();
    Vec v(2 * d);
    for (int e = 0; e < 2; ++e) v.segment(e * d, d) = apply_word(word, state.spin, state.block(e));
    const double n = v.norm();
    if (n < 1e-300) throw std::domain_error("error word " + word.label() + " annihilates the state");
    return {state.spin, v / n};
}

}  // namespace spincat
