#include "spincat/cat_code.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace spincat {

namespace {

int positive_mod(long a, int n) {
    const long r = a % n;
    return static_cast<int>(r < 0 ? r + n : r);
}

void validate_code(int n, SpinLength s) {
    if (n < 2 || n % 4 != 2)
        throw std::invalid_argument("cat code needs N >= 2 with N = 2 (mod 4), got N=" + std::to_string(n));
    if (!s.is_integer()) throw std::invalid_argument("cat code needs integer I");
}

}  // namespace

CatCode::CatCode(int n_components, SpinLength spin, int dephasing_order)
    : n_(n_components), spin_(spin), l_(dephasing_order) {
    validate_code(n_, spin_);
    if (l_ < 0) throw std::invalid_argument("dephasing order must be non-negative");
    const int n = sectors();
    const int d = spin_.dim();
    // The sum over N/2 equatorial components keeps only M = 0 (mod N/2); build that directly.
    const DickeVector base = coherent_state(spin_, pi / 2.0, 0.0);
    Vec z = Vec::Zero(d);
    Vec o = Vec::Zero(d);
    for (int r = 0; r < d; ++r) {
        const double m = spin_.m_at(r);
        const long mi = std::lround(m);
        if (positive_mod(mi, n) != 0) continue;
        z(r) = base.amp(r);
        o(r) = base.amp(r) * std::exp(-imag_unit * (m * 2.0 * pi / n_));
    }
    zero_ = {spin_, z / z.norm()};
    one_ = {spin_, o / o.norm()};
}

void CatCode::set_dephasing_order(int l) {
    if (l < 0) throw std::invalid_argument("dephasing order must be non-negative");
    l_ = l;
}

int CatCode::sector_of(double m) const { return positive_mod(std::lround(m), sectors()); }

DickeVector logical_state(const CatCode& code, int which) {
    if (which != 0 && which != 1) throw std::invalid_argument("logical state index must be 0 or 1");
    return code.codeword(which);
}

DickeVector logical_superposition(const CatCode& code, cplx alpha, cplx beta) {
    Vec v = alpha * code.zero().amp + beta * code.one().amp;
    return {code.spin(), v / v.norm()};
}

MSet sector_mset(SpinLength s, int n_components, int sector) {
    const int n = n_components / 2;
    if (sector < 0 || sector >= n) throw std::invalid_argument("sector index out of range");
    MSet out;
    for (int r = 0; r < s.dim(); ++r) {
        const double m = s.m_at(r);
        if (positive_mod(std::lround(m), n) == sector) out.push_back(m);
    }
    return out;
}

Operator sector_projector(SpinLength s, int n_components, int sector) {
    const int d = s.dim();
    Mat p = Mat::Zero(d, d);
    for (double m : sector_mset(s, n_components, sector)) p(s.index_of(m), s.index_of(m)) = 1.0;
    return {p, Structure::diagonal};
}

Eigen::VectorXd sector_populations(const CatCode& code, const Vec& amp) {
    const SpinLength s = code.spin();
    const int d = s.dim();
    if (amp.size() % d != 0) throw std::invalid_argument("amplitude length is not a multiple of 2I+1");
    Eigen::VectorXd pop = Eigen::VectorXd::Zero(code.sectors());
    for (Eigen::Index i = 0; i < amp.size(); ++i)
        pop(code.sector_of(s.m_at(static_cast<int>(i % d)))) += std::norm(amp(i));
    return pop;
}

int ErrorWord::count(Factor f) const {
    return static_cast<int>(std::count(factors.begin(), factors.end(), f));
}

std::string ErrorWord::label() const {
    if (factors.empty()) return "1";
    std::string out;
    std::size_t i = 0;
    while (i < factors.size()) {
        std::size_t j = i;
        while (j < factors.size() && factors[j] == factors[i]) ++j;
        const char* name = factors[i] == Factor::plus ? "I+" : factors[i] == Factor::minus ? "I-" : "Iz";
        out += name;
        if (j - i > 1) out += "^" + std::to_string(j - i);
        i = j;
    }
    return out;
}

bool ErrorWord::in_set(int k, int l) const {
    return count(Factor::plus) <= k && count(Factor::minus) <= k && count(Factor::z) <= l;
}

ErrorWord ladder_word(int shift, int dephasing_power) {
    ErrorWord w;
    const Factor ladder = shift >= 0 ? Factor::plus : Factor::minus;
    for (int i = 0; i < std::abs(shift); ++i) w.factors.push_back(ladder);
    for (int i = 0; i < dephasing_power; ++i) w.factors.push_back(Factor::z);
    return w;
}

std::vector<ErrorWord> error_set(int k, int l) {
    if (k < 0 || l < 0) throw std::invalid_argument("error set orders must be non-negative");
    std::vector<ErrorWord> out;
    for (int m = 0; m <= l; ++m) out.push_back(ladder_word(0, m));
    for (int j = 1; j <= k; ++j)
        for (int m = 0; m <= l; ++m) {
            out.push_back(ladder_word(j, m));
            out.push_back(ladder_word(-j, m));
        }
    return out;
}

ErrorWord parse_error_word(const std::string& text) {
    ErrorWord w;
    if (text == "1" || text == "I" || text.empty()) return w;
    std::size_t i = 0;
    while (i < text.size()) {
        if (text.compare(i, 2, "I+") == 0 || text.compare(i, 2, "Ip") == 0) {
            w.factors.push_back(Factor::plus);
        } else if (text.compare(i, 2, "I-") == 0 || text.compare(i, 2, "Im") == 0) {
            w.factors.push_back(Factor::minus);
        } else if (text.compare(i, 2, "Iz") == 0) {
            w.factors.push_back(Factor::z);
        } else {
            throw std::invalid_argument("cannot parse error word '" + text + "'");
        }
        i += 2;
        if (i < text.size() && text[i] == '^') {
            std::size_t used = 0;
            const int p = std::stoi(text.substr(i + 1), &used);
            if (p < 1) throw std::invalid_argument("bad exponent in error word '" + text + "'");
            const Factor f = w.factors.back();
            for (int r = 1; r < p; ++r) w.factors.push_back(f);
            i += 1 + used;
        }
    }
    return w;
}

Vec apply_word(const ErrorWord& w, SpinLength s, const Vec& amp) {
    const int d = s.dim();
    Vec v = amp;
    for (auto it = w.factors.rbegin(); it != w.factors.rend(); ++it) {
        Vec next = Vec::Zero(d);
        switch (*it) {
            case Factor::z:
                for (int r = 0; r < d; ++r) next(r) = s.m_at(r) * v(r);
                break;
            case Factor::plus:
                for (int r = 1; r < d; ++r) next(r - 1) = raise_coeff(s, s.m_at(r)) * v(r);
                break;
            case Factor::minus:
                for (int r = 0; r + 1 < d; ++r) next(r + 1) = lower_coeff(s, s.m_at(r)) * v(r);
                break;
        }
        v = std::move(next);
    }
    return v;
}

Mat word_matrix(const ErrorWord& w, SpinLength s) {
    const int d = s.dim();
    Mat m(d, d);
    const Mat id = Mat::Identity(d, d);
    for (int c = 0; c < d; ++c) m.col(c) = apply_word(w, s, id.col(c));
    return m;
}

DickeVector rotated_logical(const CatCode& code, int which) {
    return rotate(code.codeword(which), Axis::y, rotated_frame_angle);
}

namespace {

// Largest rotated-frame probability per M over all correctable images of one codeword.
Eigen::VectorXd family_envelope(const CatCode& code, int which, int k, int l) {
    const SpinLength s = code.spin();
    const Mat rot = rotation_matrix(s, Axis::y, rotated_frame_angle);
    Eigen::VectorXd env = Eigen::VectorXd::Zero(s.dim());
    for (const auto& w : error_set(k, l)) {
        Vec v = apply_word(w, s, code.codeword(which).amp);
        const double nrm = v.norm();
        if (nrm < 1e-300) continue;
        v = rot * (v / nrm);
        env = env.cwiseMax(v.cwiseAbs2());
    }
    return env;
}

}  // namespace

MSet support_gamma(const CatCode& code, int k, int l, double eps_supp) {
    if (!(eps_supp > 0.0)) throw std::invalid_argument("support threshold must be positive");
    const Eigen::VectorXd p0 = family_envelope(code, 0, k, l);
    const Eigen::VectorXd p1 = family_envelope(code, 1, k, l);
    MSet gamma;
    for (int r = 0; r < code.spin().dim(); ++r)
        if (p0(r) >= eps_supp && p0(r) >= p1(r)) gamma.push_back(code.spin().m_at(r));
    if (gamma.empty()) throw std::invalid_argument("support set is empty; threshold too large");
    return gamma;
}

MSet support_gamma_closed_form(const CatCode& code, int k, int l, double width_factor) {
    if (code.n_components() != 6) throw std::invalid_argument("closed-form support is defined for N = 6 only");
    const double i = code.spin().value();
    const double w = width_factor * std::sqrt(i) + k + l;
    MSet gamma;
    for (int r = 0; r < code.spin().dim(); ++r) {
        const double m = code.spin().m_at(r);
        if (m >= i - w || std::abs(m + i / 2.0) <= w) gamma.push_back(m);
    }
    return gamma;
}

Operator chebyshev_op(SpinLength s, int m) {
    if (m < 0) throw std::invalid_argument("Chebyshev order must be non-negative");
    const int d = s.dim();
    const double i = s.value();
    Mat t = Mat::Zero(d, d);
    for (int r = 0; r < d; ++r) {
        const double x = i > 0.0 ? s.m_at(r) / i : 0.0;
        double prev = 1.0;
        double cur = x;
        double val = 1.0;
        if (m == 1) val = x;
        for (int j = 2; j <= m; ++j) {
            const double next = 2.0 * x * cur - prev;
            prev = cur;
            cur = next;
            val = cur;
        }
        t(r, r) = val;
    }
    return {t, Structure::diagonal};
}

cplx kl_offdiag(const CatCode& code, const ErrorWord& ei, const ErrorWord& ej) {
    const SpinLength s = code.spin();
    const Vec a = apply_word(ei, s, code.zero().amp);
    const Vec b = apply_word(ej, s, code.one().amp);
    return a.dot(b);
}

double kl_diag_diff(const CatCode& code, const ErrorWord& e) {
    const SpinLength s = code.spin();
    return apply_word(e, s, code.zero().amp).squaredNorm() - apply_word(e, s, code.one().amp).squaredNorm();
}

namespace {

// <0_L| f(Iz/I) |1_L> for a diagonal f given by its values.
cplx diagonal_overlap(const CatCode& code, const Eigen::VectorXd& f) {
    const Vec& z = code.zero().amp;
    const Vec& o = code.one().amp;
    cplx acc = 0.0;
    for (int r = 0; r < f.size(); ++r) acc += std::conj(z(r)) * f(r) * o(r);
    return acc;
}

}  // namespace

int max_dephasing_order(const CatCode& code, double tol) {
    if (!(tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
    const SpinLength s = code.spin();
    const int cap = s.twice();
    for (int j = 0; j <= cap; ++j) {
        const Eigen::VectorXd t = chebyshev_op(s, j).mat.diagonal().real();
        if (std::abs(diagonal_overlap(code, t.cwiseAbs2())) > tol) return std::max(0, j - 1);
    }
    return cap;
}

int max_dephasing_order_power(const CatCode& code, double tol) {
    if (!(tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
    const SpinLength s = code.spin();
    const double i = s.value();
    const int cap = s.twice();
    Eigen::VectorXd x(s.dim());
    for (int r = 0; r < s.dim(); ++r) x(r) = i > 0.0 ? s.m_at(r) / i : 0.0;
    Eigen::VectorXd pw = Eigen::VectorXd::Ones(s.dim());
    for (int m = 0; m <= cap; ++m) {
        // powers 2m-1 and 2m complete the check for this m
        for (int j = (m == 0 ? 0 : 2 * m - 1); j <= 2 * m; ++j) {
            if (j > 0) pw = pw.cwiseProduct(x);
            if (std::abs(diagonal_overlap(code, pw)) > tol) return std::max(0, m - 1);
        }
    }
    return cap;
}

KLFitResult fit_line(const std::vector<std::pair<int, int>>& samples) {
    KLFitResult out;
    out.samples = samples;
    const auto n = static_cast<double>(samples.size());
    if (samples.size() < 2) {
        out.degenerate = true;
        return out;
    }
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (auto [x, y] : samples) {
        sx += x;
        sy += y;
        sxx += static_cast<double>(x) * x;
        sxy += static_cast<double>(x) * y;
    }
    const double den = n * sxx - sx * sx;
    if (std::abs(den) < 1e-12) {
        out.degenerate = true;
        return out;
    }
    out.alpha = (n * sxy - sx * sy) / den;
    out.beta = (sy - out.alpha * sx) / n;
    double rss = 0.0;
    for (auto [x, y] : samples) {
        const double e = y - (out.alpha * x + out.beta);
        rss += e * e;
    }
    out.residual = std::sqrt(rss / n);
    return out;
}

KLFitResult fit_alpha_beta(int n_components, const std::vector<int>& spins, double tol) {
    if (spins.size() < 3) throw std::invalid_argument("fit needs at least three spin lengths");
    std::vector<std::pair<int, int>> samples;
    for (int i : spins) {
        if (!samples.empty() && i <= samples.back().first)
            throw std::invalid_argument("spin lengths must be strictly increasing");
        const CatCode code(n_components, SpinLength::from_value(i));
        samples.emplace_back(i, max_dephasing_order(code, tol));
    }
    KLFitResult r = fit_line(samples);
    bool constant = true;
    for (auto& s : samples) constant = constant && s.second == samples.front().second;
    if (constant) {
        r.alpha = 0.0;
        r.beta = samples.front().second;
    }
    return r;
}

}  // namespace spincat
