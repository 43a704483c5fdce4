#include "spincat/wigner.hpp"

#include <cmath>
#include <stdexcept>

namespace spincat {

SphericalGrid make_grid(int n_theta, int n_phi) {
    if (n_theta < 2 || n_phi < 1) throw std::invalid_argument("grid needs n_theta >= 2, n_phi >= 1");
    SphericalGrid g;
    g.theta.resize(n_theta);
    g.phi.resize(n_phi);
    for (int i = 0; i < n_theta; ++i) g.theta[i] = pi * i / (n_theta - 1);
    for (int j = 0; j < n_phi; ++j) g.phi[j] = 2.0 * pi * j / n_phi;
    return g;
}

namespace {

void normalize(std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    s = std::sqrt(s);
    if (s > 0.0)
        for (double& x : v) x /= s;
}

}  // namespace

std::vector<TensorDiagonal> tensor_operators(SpinLength s, int k) {
    const int d = s.dim();
    if (k < 0 || k > s.twice()) throw std::invalid_argument("tensor rank out of range");
    std::vector<TensorDiagonal> out;
    out.reserve(2 * k + 1);

    // T_kk is proportional to (-1)^k I+^k; build in log space to avoid overflow.
    TensorDiagonal top{k, k, std::vector<double>(d, 0.0)};
    std::vector<double> logs(d, -INFINITY);
    double logmax = -INFINITY;
    for (int r = k; r < d; ++r) {
        const double m = s.m_at(r);
        double acc = 0.0;
        for (int j = 0; j < k; ++j) acc += std::log(raise_coeff(s, m + j));
        logs[r] = acc;
        logmax = std::max(logmax, acc);
    }
    for (int r = k; r < d; ++r) top.entries[r] = std::exp(logs[r] - logmax);
    normalize(top.entries);
    if (k % 2 != 0)
        for (double& x : top.entries) x = -x;
    out.push_back(std::move(top));

    // T_{k,q-1} = [I-, T_kq] / sqrt((k+q)(k-q+1))
    for (int q = k; q > -k; --q) {
        const auto& t = out.back().entries;
        TensorDiagonal next{k, q - 1, std::vector<double>(d, 0.0)};
        for (int r = 0; r < d; ++r) {
            const double m = s.m_at(r);
            const double target = m + q - 1;
            if (!s.contains(target)) continue;
            double v = 0.0;
            // I- T: <M+q-1|I-|M+q> <M+q|T|M>
            if (s.contains(m + q)) v += lower_coeff(s, m + q) * t[r];
            // T I-: <M+q-1|T|M-1> <M-1|I-|M>
            if (r + 1 < d) v -= t[r + 1] * lower_coeff(s, m);
            next.entries[r] = v;
        }
        normalize(next.entries);
        out.push_back(std::move(next));
    }
    return out;
}

Mat tensor_matrix(SpinLength s, const TensorDiagonal& t) {
    const int d = s.dim();
    Mat m = Mat::Zero(d, d);
    for (int r = 0; r < d; ++r) {
        const int row = r - t.q;
        if (row >= 0 && row < d) m(row, r) = t.entries[r];
    }
    return m;
}

SphericalField wigner_sphere(const Mat& rho, SpinLength s, const SphericalGrid& grid) {
    const int d = s.dim();
    if (rho.rows() != d || rho.cols() != d) throw std::invalid_argument("density matrix dimension mismatch");
    const double herm = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
    if (herm > 1e-9 * std::max(1.0, rho.cwiseAbs().maxCoeff()))
        throw std::invalid_argument("density matrix is not Hermitian");

    const int kmax = s.twice();
    const int nq = 2 * kmax + 1;  // q in [-kmax, kmax]
    // rho_kq = Tr(rho T_kq^dagger) = sum_M rho(M+q, M) t(M)
    std::vector<std::vector<cplx>> rho_kq(kmax + 1, std::vector<cplx>(nq, 0.0));
    for (int k = 0; k <= kmax; ++k) {
        for (const auto& t : tensor_operators(s, k)) {
            cplx acc = 0.0;
            for (int r = 0; r < d; ++r) {
                const int row = r - t.q;
                if (row >= 0 && row < d) acc += rho(row, r) * t.entries[r];
            }
            rho_kq[k][t.q + kmax] = acc;
        }
    }

    const auto nt = static_cast<int>(grid.theta.size());
    const auto np = static_cast<int>(grid.phi.size());
    SphericalField f;
    f.grid = grid;
    f.values.resize(nt, np);
    Mat phase(np, nq);
    for (int j = 0; j < np; ++j)
        for (int q = -kmax; q <= kmax; ++q) phase(j, q + kmax) = std::exp(imag_unit * (q * grid.phi[j]));

    Vec a(nq);
    for (int i = 0; i < nt; ++i) {
        a.setZero();
        for (int k = 0; k <= kmax; ++k) {
            for (int q = 0; q <= k; ++q) {
                const double y = std::sph_legendre(k, q, grid.theta[i]);
                a(q + kmax) += rho_kq[k][q + kmax] * y;
                if (q > 0) a(-q + kmax) += rho_kq[k][-q + kmax] * ((q % 2 == 0) ? y : -y);
            }
        }
        const Vec row = phase * a;
        for (int j = 0; j < np; ++j) {
            f.values(i, j) = row(j).real();
            f.max_imag = std::max(f.max_imag, std::abs(row(j).imag()));
        }
    }
    return f;
}

SphericalField wigner_sphere(const DickeVector& psi, const SphericalGrid& grid) {
    const Mat rho = psi.amp * psi.amp.adjoint();
    return wigner_sphere(rho, psi.spin, grid);
}

double integrate_sphere(const SphericalField& f) {
    const auto& th = f.grid.theta;
    const auto nt = static_cast<int>(th.size());
    const auto np = static_cast<int>(f.grid.phi.size());
    const double dphi = 2.0 * pi / np;
    std::vector<double> ring(nt);
    for (int i = 0; i < nt; ++i) ring[i] = f.values.row(i).sum() * dphi * std::sin(th[i]);
    const double h = th[1] - th[0];
    double total = 0.0;
    if (nt % 2 == 1) {
        for (int i = 0; i < nt; ++i) {
            const double w = (i == 0 || i == nt - 1) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
            total += w * ring[i];
        }
        return total * h / 3.0;
    }
    for (int i = 0; i < nt; ++i) total += ((i == 0 || i == nt - 1) ? 0.5 : 1.0) * ring[i];
    return total * h;
}

}  // namespace spincat
