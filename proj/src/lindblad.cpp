#include "spincat/lindblad.hpp"

#include <cmath>

namespace spincat {

namespace {

struct LadderTables {
    Eigen::VectorXd up;     // <M_r|I+|M_r - 1>
    Eigen::VectorXd dn;     // <M_r|I-|M_r + 1>
    Eigen::VectorXd ap;     // (I- I+)_rr
    Eigen::VectorXd am;     // (I+ I-)_rr
    Eigen::VectorXd m;
};

LadderTables ladder_tables(SpinLength s) {
    const int d = s.dim();
    LadderTables t{Eigen::VectorXd(d), Eigen::VectorXd(d), Eigen::VectorXd(d), Eigen::VectorXd(d), m_values(s)};
    for (int r = 0; r < d; ++r) {
        const double m = s.m_at(r);
        t.up(r) = r + 1 < d ? raise_coeff(s, m - 1.0) : 0.0;
        t.dn(r) = r > 0 ? lower_coeff(s, m + 1.0) : 0.0;
        t.ap(r) = std::pow(raise_coeff(s, m), 2);
        t.am(r) = std::pow(lower_coeff(s, m), 2);
    }
    return t;
}

// Ladder dissipators only (recycling and anticommutator terms).
void ladder_rhs(const LadderTables& t, const NoiseParams& n, bool recycle, const Mat& rho, Mat& out) {
    const int d = static_cast<int>(rho.rows());
    const double gp = n.gamma_plus;
    const double gm = n.gamma_minus;
#pragma omp parallel for schedule(static)
    for (int c = 0; c < d; ++c) {
        for (int r = 0; r < d; ++r) {
            cplx v = -0.5 * (gp * (t.ap(r) + t.ap(c)) + gm * (t.am(r) + t.am(c))) * rho(r, c);
            if (!recycle) {
                out(r, c) = v;
                continue;
            }
            if (r + 1 < d && c + 1 < d) v += gp * t.up(r) * t.up(c) * rho(r + 1, c + 1);
            if (r > 0 && c > 0) v += gm * t.dn(r) * t.dn(c) * rho(r - 1, c - 1);
            out(r, c) = v;
        }
    }
}

// Exponent of the exactly integrated part: dephasing and a diagonal Hamiltonian.
Mat diagonal_generator(const LindbladModel& model, const LadderTables& t) {
    const int d = model.spin.dim();
    const bool diag_h = model.hamiltonian.size() > 0 && model.diagonal_hamiltonian();
    Mat g(d, d);
    for (int c = 0; c < d; ++c)
        for (int r = 0; r < d; ++r) {
            const double dm = t.m(r) - t.m(c);
            cplx v = -0.5 * model.noise.gamma_z * dm * dm;
            if (diag_h) v += -imag_unit * (model.hamiltonian(r, r) - model.hamiltonian(c, c));
            g(r, c) = v;
        }
    return g;
}

void hermitize(Mat& rho) { rho = 0.5 * (rho + rho.adjoint()).eval(); }

}  // namespace

bool LindbladModel::diagonal_hamiltonian() const {
    if (hamiltonian.size() == 0) return true;
    Mat off = hamiltonian;
    off.diagonal().setZero();
    return off.cwiseAbs().maxCoeff() == 0.0;
}

Mat lindblad_rhs(const LindbladModel& model, const Mat& rho) {
    const LadderTables t = ladder_tables(model.spin);
    Mat out(rho.rows(), rho.cols());
    ladder_rhs(t, model.noise, model.ladder_recycling, rho, out);
    out += diagonal_generator(model, t).cwiseProduct(rho);
    if (!model.diagonal_hamiltonian()) out += -imag_unit * (model.hamiltonian * rho - rho * model.hamiltonian);
    return out;
}

Mat lindblad_rhs_reference(const LindbladModel& model, const Mat& rho) {
    const SpinLength s = model.spin;
    const Mat ip = op_collective(s, Component::plus).mat;
    const Mat im = op_collective(s, Component::minus).mat;
    const Mat iz = op_collective(s, Component::z).mat;
    auto dissipator = [&](const Mat& l) {
        const Mat ldl = l.adjoint() * l;
        return Mat(l * rho * l.adjoint() - 0.5 * (ldl * rho + rho * ldl));
    };
    auto no_jump = [&](const Mat& l) {
        const Mat ldl = l.adjoint() * l;
        return Mat(-0.5 * (ldl * rho + rho * ldl));
    };
    Mat out = model.noise.gamma_z * dissipator(iz);
    if (model.ladder_recycling)
        out += model.noise.gamma_plus * dissipator(ip) + model.noise.gamma_minus * dissipator(im);
    else
        out += model.noise.gamma_plus * no_jump(ip) + model.noise.gamma_minus * no_jump(im);
    if (model.hamiltonian.size() > 0) out += -imag_unit * (model.hamiltonian * rho - rho * model.hamiltonian);
    return out;
}

double ladder_rate_bound(const LindbladModel& model) {
    const LadderTables t = ladder_tables(model.spin);
    const double bound = model.noise.gamma_plus * (t.ap.maxCoeff() + t.up.cwiseAbs2().maxCoeff()) +
                         model.noise.gamma_minus * (t.am.maxCoeff() + t.dn.cwiseAbs2().maxCoeff());
    double h = 0.0;
    if (!model.diagonal_hamiltonian()) h = 2.0 * model.hamiltonian.cwiseAbs().rowwise().sum().maxCoeff();
    return bound + h;
}

namespace {

EvolveResult lawson_run(const LindbladModel& model, const Mat& rho0, double t, long steps, bool symmetrize) {
    const LadderTables tab = ladder_tables(model.spin);
    const bool dense_h = !model.diagonal_hamiltonian();
    const double h = t / static_cast<double>(steps);
    const Mat gen = diagonal_generator(model, tab);
    const Mat e_full = (gen * h).array().exp().matrix();
    const Mat e_half = (gen * (0.5 * h)).array().exp().matrix();

    const int d = static_cast<int>(rho0.rows());
    Mat k1(d, d), k2(d, d), k3(d, d), k4(d, d);
    auto explicit_part = [&](const Mat& u, Mat& out) {
        ladder_rhs(tab, model.noise, model.ladder_recycling, u, out);
        if (dense_h) out.noalias() += -imag_unit * (model.hamiltonian * u - u * model.hamiltonian);
    };

    Mat u = rho0;
    const cplx tr0 = rho0.trace();
    for (long step = 0; step < steps; ++step) {
        explicit_part(u, k1);
        explicit_part(e_half.cwiseProduct(u + 0.5 * h * k1), k2);
        const Mat eu_half = e_half.cwiseProduct(u);
        explicit_part(eu_half + 0.5 * h * k2, k3);
        explicit_part(e_full.cwiseProduct(u) + h * e_half.cwiseProduct(k3), k4);
        u = e_full.cwiseProduct(u) +
            (h / 6.0) * (e_full.cwiseProduct(k1) + 2.0 * e_half.cwiseProduct(k2 + k3) + k4);
        if (symmetrize) hermitize(u);
    }
    EvolveResult res;
    res.trace_drift = std::abs(u.trace() - tr0);
    res.rho = std::move(u);
    res.dt = h;
    res.steps = steps;
    return res;
}

}  // namespace

EvolveResult lindblad_evolve(const LindbladModel& model, const Mat& rho0, double t, const SolverOptions& opts) {
    const int d = model.spin.dim();
    if (rho0.rows() != d || rho0.cols() != d) throw std::invalid_argument("rho0 has the wrong dimension");
    if (t < 0.0) throw std::invalid_argument("negative evolution time");
    if (model.noise.gamma_plus < 0 || model.noise.gamma_minus < 0 || model.noise.gamma_z < 0)
        throw std::invalid_argument("negative rate");
    if (t == 0.0) return {rho0, 0.0, 0.0, 0};
    const double rate = ladder_rate_bound(model);
    long steps = std::max<long>(1, static_cast<long>(std::ceil(rate * t / opts.step_norm)));
    for (int attempt = 0; attempt <= opts.max_halvings; ++attempt) {
        EvolveResult r = lawson_run(model, rho0, t, steps, opts.symmetrize);
        if (!r.rho.allFinite()) {
            steps *= 2;
            continue;
        }
        // The no-jump part is trace-decreasing by construction.
        if (!model.ladder_recycling || r.trace_drift <= opts.trace_tol) return r;
        steps *= 2;
    }
    throw NumericalFailure("trace drift above tolerance after step halving");
}

EvolveResult lindblad_evolve_reference(const LindbladModel& model, const Mat& rho0, double t, double dt) {
    const long steps = std::max<long>(1, static_cast<long>(std::ceil(t / dt)));
    const double h = t / static_cast<double>(steps);
    Mat u = rho0;
    for (long i = 0; i < steps; ++i) {
        const Mat k1 = lindblad_rhs_reference(model, u);
        const Mat k2 = lindblad_rhs_reference(model, u + 0.5 * h * k1);
        const Mat k3 = lindblad_rhs_reference(model, u + 0.5 * h * k2);
        const Mat k4 = lindblad_rhs_reference(model, u + h * k3);
        u += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return {u, std::abs(u.trace() - rho0.trace()), h, steps};
}

}  // namespace spincat
