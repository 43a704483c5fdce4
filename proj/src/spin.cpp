#include "spincat/spin.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <stdexcept>
#include <string>

namespace spincat {

SpinLength SpinLength::from_twice(int two_i) {
    if (two_i < 0) throw std::invalid_argument("spin length must be non-negative");
    return SpinLength(two_i);
}

SpinLength SpinLength::from_value(double i) {
    const double t = 2.0 * i;
    const long r = std::lround(t);
    if (std::abs(t - static_cast<double>(r)) > 1e-9 || r < 0)
        throw std::invalid_argument("spin length must be a non-negative half-integer, got " +
                                    std::to_string(i));
    return SpinLength(static_cast<int>(r));
}

int SpinLength::index_of(double m) const {
    const double t = value() - m;
    const long r = std::lround(t);
    if (std::abs(t - static_cast<double>(r)) > 1e-9 || r < 0 || r > two_i_)
        throw std::out_of_range("M = " + std::to_string(m) + " outside spin " +
                                std::to_string(value()));
    return static_cast<int>(r);
}

bool SpinLength::contains(double m) const {
    const double t = value() - m;
    const long r = std::lround(t);
    return std::abs(t - static_cast<double>(r)) <= 1e-9 && r >= 0 && r <= two_i_;
}

RVec m_values(SpinLength s) {
    RVec m(s.dim());
    for (int r = 0; r < s.dim(); ++r) m(r) = s.m_at(r);
    return m;
}

double raise_coeff(SpinLength s, double m) {
    const double i = s.value();
    const double v = i * (i + 1.0) - m * (m + 1.0);
    return v > 0.0 ? std::sqrt(v) : 0.0;
}

double lower_coeff(SpinLength s, double m) {
    const double i = s.value();
    const double v = i * (i + 1.0) - m * (m - 1.0);
    return v > 0.0 ? std::sqrt(v) : 0.0;
}

Operator op_collective(SpinLength s, Component which) {
    const int d = s.dim();
    Mat m = Mat::Zero(d, d);
    switch (which) {
        case Component::z:
            for (int r = 0; r < d; ++r) m(r, r) = s.m_at(r);
            return {m, Structure::diagonal};
        case Component::plus:
            // I+|M> lands one index lower.
            for (int r = 1; r < d; ++r) m(r - 1, r) = raise_coeff(s, s.m_at(r));
            return {m, Structure::banded};
        case Component::minus:
            for (int r = 0; r + 1 < d; ++r) m(r + 1, r) = lower_coeff(s, s.m_at(r));
            return {m, Structure::banded};
        case Component::x: {
            const Mat p = op_collective(s, Component::plus).mat;
            return {0.5 * (p + p.adjoint()), Structure::banded};
        }
        case Component::y: {
            const Mat p = op_collective(s, Component::plus).mat;
            return {(p - p.adjoint()) / (2.0 * imag_unit), Structure::banded};
        }
    }
    throw std::logic_error("unknown component");
}

namespace {

struct XEigen {
    Eigen::MatrixXd vectors;
    RVec values;
};

// Ix eigenbasis per spin length. Entries are never erased, so references stay valid.
class XEigenCache {
public:
    std::shared_ptr<const XEigen> get(SpinLength s) {
        {
            std::shared_lock lock(mutex_);
            auto it = cache_.find(s.twice());
            if (it != cache_.end()) return it->second;
        }
        auto built = build(s);
        std::unique_lock lock(mutex_);
        auto [it, inserted] = cache_.emplace(s.twice(), std::move(built));
        return it->second;
    }

private:
    static std::shared_ptr<const XEigen> build(SpinLength s) {
        const int d = s.dim();
        Eigen::MatrixXd ix = Eigen::MatrixXd::Zero(d, d);
        for (int r = 1; r < d; ++r) {
            const double g = 0.5 * raise_coeff(s, s.m_at(r));
            ix(r - 1, r) = g;
            ix(r, r - 1) = g;
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(ix);
        auto out = std::make_shared<XEigen>();
        out->vectors = solver.eigenvectors();
        out->values = solver.eigenvalues();
        // The spectrum is exactly {-I..I}; snapping removes eigenvalue noise from the phases.
        for (int r = 0; r < d; ++r) out->values(r) = std::round(out->values(r) * 2.0) / 2.0;
        return out;
    }

    std::shared_mutex mutex_;
    std::map<int, std::shared_ptr<const XEigen>> cache_;
};

XEigenCache& x_cache() {
    static XEigenCache c;
    return c;
}

}  // namespace

Mat rotation_matrix(SpinLength s, Axis axis, double angle) {
    const int d = s.dim();
    if (axis == Axis::z) {
        Mat m = Mat::Zero(d, d);
        for (int r = 0; r < d; ++r) m(r, r) = std::exp(-imag_unit * angle * s.m_at(r));
        return m;
    }
    const auto eig = x_cache().get(s);
    Vec phases(d);
    for (int r = 0; r < d; ++r) phases(r) = std::exp(-imag_unit * angle * eig->values(r));
    const Mat v = eig->vectors.cast<cplx>();
    Mat rx = v * phases.asDiagonal() * v.transpose();
    if (axis == Axis::x) return rx;
    // exp(-i pi/2 Iz) Ix exp(i pi/2 Iz) = Iy
    Vec dz(d);
    for (int r = 0; r < d; ++r) dz(r) = std::exp(-imag_unit * (pi / 2.0) * s.m_at(r));
    return dz.asDiagonal() * rx * dz.conjugate().asDiagonal();
}

DickeVector rotate(const DickeVector& state, Axis axis, double angle) {
    if (axis == Axis::z) {
        Vec out = state.amp;
        for (int r = 0; r < out.size(); ++r)
            out(r) *= std::exp(-imag_unit * angle * state.spin.m_at(r));
        return {state.spin, out};
    }
    return {state.spin, rotation_matrix(state.spin, axis, angle) * state.amp};
}

DickeVector coherent_state(SpinLength s, double theta, double phi) {
    const int d = s.dim();
    const double i = s.value();
    const double c = std::cos(theta / 2.0);
    const double sn = std::sin(theta / 2.0);
    const double lc = std::log(std::abs(c));
    const double ls = std::log(std::abs(sn));
    Vec amp(d);
    for (int r = 0; r < d; ++r) {
        const double m = s.m_at(r);
        const double up = i + m;
        const double dn = i - m;
        if ((up > 0 && c == 0.0) || (dn > 0 && sn == 0.0)) {
            amp(r) = 0.0;
            continue;
        }
        double logmag = 0.5 * (std::lgamma(2.0 * i + 1.0) - std::lgamma(dn + 1.0) -
                               std::lgamma(up + 1.0));
        if (up > 0) logmag += up * lc;
        if (dn > 0) logmag += dn * ls;
        double sign = 1.0;
        if (c < 0 && std::lround(up) % 2 != 0) sign = -sign;
        if (sn < 0 && std::lround(dn) % 2 != 0) sign = -sign;
        amp(r) = sign * std::exp(logmag) * std::exp(-imag_unit * m * phi);
    }
    return {s, amp / amp.norm()};
}

DickeVector dicke_state(SpinLength s, double m) {
    Vec amp = Vec::Zero(s.dim());
    amp(s.index_of(m)) = 1.0;
    return {s, amp};
}

cplx expectation(const DickeVector& state, const Mat& op) {
    return state.amp.dot(op * state.amp);
}

cplx inner(const DickeVector& a, const DickeVector& b) { return a.amp.dot(b.amp); }

double unitarity_error(const Mat& u) {
    const Mat e = u.adjoint() * u - Mat::Identity(u.rows(), u.cols());
    return e.cwiseAbs().maxCoeff();
}

}  // namespace spincat
