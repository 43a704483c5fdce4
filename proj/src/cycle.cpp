#include "spincat/cycle.hpp"

#include "spincat/benchmarks.hpp"
#include "spincat/pulse.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <variant>

namespace spincat {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

long angle_key(double theta) { return std::lround(std::abs(theta) * 1e6); }

bool is_sideband(const GateOp& g) {
    return std::holds_alternative<gate::FlipFlop>(g) || std::holds_alternative<gate::FlipFlip>(g);
}

double sideband_unit_time(const GateOp& g) {
    if (const auto* f = std::get_if<gate::FlipFlop>(&g)) return f->t;
    return std::get<gate::FlipFlip>(g).t;
}

template <class F>
void for_each_theta(const Circuit& c, F&& f) {
    for (const auto& g : c.ops) {
        if (const auto* t = std::get_if<gate::Theta>(&g)) f(t->angle);
        if (const auto* p = std::get_if<gate::Pi>(&g)) f(p->phi);
    }
}

// Largest population of each Dicke level over both codewords and their normalized I+^j, I-^j images,
// j <= k.
std::vector<double> level_weights(const CatCode& code, int k) {
    const SpinLength s = code.spin();
    const int d = s.dim();
    std::vector<double> w(d, 0.0);
    for (int which = 0; which < 2; ++which) {
        for (int dir : {1, -1}) {
            Vec v = code.codeword(which).amp;
            for (int j = 0; j <= k; ++j) {
                if (j > 0) {
                    Vec next = Vec::Zero(d);
                    for (int r = 0; r < d; ++r) {
                        const double m = s.value() - r;
                        if (!s.contains(m + dir)) continue;
                        const double c = dir > 0 ? raise_coeff(s, m) : lower_coeff(s, m);
                        next(r - dir) = c * v(r);
                    }
                    v = next;
                }
                const double nrm = v.squaredNorm();
                if (nrm == 0.0) break;
                for (int r = 0; r < d; ++r) w[r] = std::max(w[r], std::norm(v(r)) / nrm);
            }
        }
    }
    return w;
}

// Removes sideband ops acting on negligibly populated levels; returns the dropped weight.
double drop_idle_tones(Circuit& c, SpinLength s, const std::vector<double>& w, double cutoff) {
    auto weight = [&](double m) {
        double x = 0.0;
        for (double dm : {-1.0, 0.0, 1.0})
            if (s.contains(m + dm)) x = std::max(x, w[static_cast<std::size_t>(std::lround(s.value() - m - dm))]);
        return x;
    };
    double dropped = 0.0;
    std::vector<GateOp> kept;
    kept.reserve(c.ops.size());
    for (auto& g : c.ops) {
        if (is_sideband(g)) {
            const double m = std::holds_alternative<gate::FlipFlop>(g) ? std::get<gate::FlipFlop>(g).m
                                                                       : std::get<gate::FlipFlip>(g).m;
            const double x = weight(m);
            if (x < cutoff) {
                dropped += x;
                continue;
            }
        }
        kept.push_back(std::move(g));
    }
    c.ops = std::move(kept);
    return dropped;
}

}  // namespace

CycleModel::CycleModel(const CycleConfig& cfg)
    : cfg_(cfg), params_(CatCode(cfg.n_components, SpinLength::from_value(cfg.spin))) {
    if (cfg.l_cap < 1) throw std::invalid_argument("l_cap must be >= 1");
    if (!(cfg.f_target > 0.0 && cfg.f_target < 1.0)) throw std::invalid_argument("f_target must lie in (0, 1)");
    params_.a = cfg.a;
    params_.omega_n = cfg.omega_n;

    const auto opt = optimize_sequence(cfg.harmonic, 1.0);
    const auto theta_seq = quarter_shifted(opt.sequence, cfg.harmonic);
    const auto fc = fourier_coeffs(theta_seq, cfg.harmonic);
    g_er_ = 0.5 * cfg.a_nc * std::hypot(fc.p[cfg.harmonic], fc.q[cfg.harmonic]);

    pm_ = correct_pm(params_, params_.code.ladder_order(), 0.0);
    for (int l = 1; l <= cfg.l_cap; ++l) z_.push_back(correct_dephasing_single(params_, l));
    if (cfg.tone_cutoff > 0.0) {
        const auto w = level_weights(params_.code, params_.code.ladder_order());
        pm_dropped_ = drop_idle_tones(pm_, params_.code.spin(), w, cfg.tone_cutoff);
        for (auto& c : z_) z_dropped_.push_back(drop_idle_tones(c, params_.code.spin(), w, cfg.tone_cutoff));
    } else {
        z_dropped_.assign(z_.size(), 0.0);
    }

    DriveParams dp;
    dp.a = cfg.a;
    dp.a_nc = cfg.a_nc;
    dp.omega_n = cfg.omega_n;
    auto record = [&](double theta) {
        const long key = angle_key(theta);
        if (key == 0 || er_error_.count(key)) return;
        if (cfg.engineered == EngineeredModel::effective) {
            er_error_[key] = 0.0;
            return;
        }
        const auto r = engineered_rotation_sim(theta_seq, cfg.harmonic, params_.code.spin(), dp, std::abs(theta));
        er_error_[key] = std::max(0.0, 1.0 - r.fitted_fidelity);
    };
    for_each_theta(pm_, record);
    for (const auto& c : z_) for_each_theta(c, record);

    // Idle infidelity after recovery, tabulated on a log grid of tau.
    BenchmarkConfig bc;
    bc.n_components = cfg.n_components;
    bc.spin = cfg.spin;
    bc.eta = cfg.eta;
    bc.l_min = 1;
    bc.l_max = cfg.l_cap;
    // Beyond tau * gamma = 1e-2 the idle loss alone exceeds any useful budget; the table stops there
    // and is extrapolated.
    const double lt_hi = cfg.gamma_tot > 0.0 ? std::max(0.0, std::log10(1e-2 / cfg.gamma_tot)) : 7.0;
    const int pts = static_cast<int>(std::ceil((lt_hi + 1.0) / 0.25)) + 1;
    idle_table_.assign(cfg.l_cap, std::vector<double>(pts, 0.0));
    for (int i = 0; i < pts; ++i) {
        const double lt = -1.0 + 0.25 * i;
        idle_log_tau_.push_back(lt);
        const double t_gamma = std::pow(10.0, lt) * cfg.gamma_tot;
        const auto f = recovered_fidelity_sweep(bc, t_gamma);
        for (int l = 0; l < cfg.l_cap; ++l) idle_table_[l][i] = std::max(1e-300, 1.0 - f[l]);
    }
}

double CycleModel::engineered_error(double theta) const {
    const long key = angle_key(theta);
    if (key == 0) return 0.0;
    const auto it = er_error_.find(key);
    if (it == er_error_.end()) throw std::out_of_range("no engineered-rotation calibration for this angle");
    return it->second;
}

double CycleModel::idle_error(int l, double tau) const {
    if (cfg_.gamma_tot == 0.0 || tau <= 0.0) return 0.0;
    const auto& row = idle_table_.at(l - 1);
    const double lt = std::log10(tau);
    if (lt <= idle_log_tau_.front()) return row.front() * tau / std::pow(10.0, idle_log_tau_.front());
    if (lt >= idle_log_tau_.back()) {
        const std::size_t k = row.size() - 1;
        const double slope = (std::log(row[k]) - std::log(row[k - 1])) / (idle_log_tau_[k] - idle_log_tau_[k - 1]);
        return std::min(1.0, row[k] * std::exp(std::max(0.0, slope) * (lt - idle_log_tau_[k])));
    }
    const auto it = std::upper_bound(idle_log_tau_.begin(), idle_log_tau_.end(), lt);
    const std::size_t j = static_cast<std::size_t>(it - idle_log_tau_.begin());
    const double w = (lt - idle_log_tau_[j - 1]) / (idle_log_tau_[j] - idle_log_tau_[j - 1]);
    return std::exp((1.0 - w) * std::log(row[j - 1]) + w * std::log(row[j]));
}

StageReport CycleModel::walk(const Circuit& c, const CycleAllocation& alloc) const {
    StageReport r;
    r.name = c.name;
    double log_fid = 0.0;
    auto add = [&](double t, double eps) {
        r.duration += t;
        log_fid += std::log1p(-std::min(eps, 1.0 - 1e-300));
        ++r.layers;
    };
    const double oc = alloc.omega_cond, os = alloc.omega_sideband;
    const double a_eff = os * cfg_.a_nc / cfg_.omega_n;
    // Mean off-resonant flip of a square pulse: Omega^2 / (2 (Omega^2 + delta^2)).
    auto off_res = [](double om, double det) { return 0.5 * om * om / (om * om + det * det); };

    for (std::size_t i = 0; i < c.ops.size();) {
        const GateOp& g = c.ops[i];
        if (is_sideband(g)) {
            // Consecutive sideband gates share one multi-tone pulse. Tone amplitudes are scaled by
            // g_min / g_M so every transfer completes together; os is the strongest tone.
            double t_max = 0.0;
            for (; i < c.ops.size() && is_sideband(c.ops[i]); ++i)
                t_max = std::max(t_max, sideband_unit_time(c.ops[i]));
            const double coupling = 0.25 * a_eff * pi / (2.0 * t_max);
            add(t_max * 4.0 / a_eff, off_res(os, cfg_.omega_n) + 2.0 * off_res(coupling, cfg_.a));
            continue;
        }
        std::visit(overloaded{
                       [&](const gate::Theta& x) { add(std::abs(x.angle) / g_er_, engineered_error(x.angle)); },
                       [&](const gate::Pi& x) {
                           add(std::abs(x.phi) / g_er_ + 0.5 * std::abs(x.phi) / cfg_.omega_rf,
                               engineered_error(x.phi));
                       },
                       [&](const gate::CondR& x) {
                           const bool all = static_cast<int>(x.m_set.size()) >= params_.code.spin().dim();
                           add(std::abs(x.angle) / oc, all ? 0.0 : 2.0 * off_res(oc, cfg_.a));
                       },
                       [&](const gate::EnsR& x) { add(std::abs(x.angle) / cfg_.omega_rf, 0.0); },
                       [&](const gate::FreeEvolve& x) { add(x.t, 0.0); },
                       // Hard electron pulses and optical reset are treated as instantaneous.
                       [&](const gate::Ux&) {},
                       [&](const gate::Uy&) {},
                       [&](const gate::ResetElectron&) {},
                       [&](const gate::FlipFlop&) {},
                       [&](const gate::FlipFlip&) {},
                   },
                   g);
        ++i;
    }
    r.error = -std::expm1(log_fid);
    return r;
}

CycleTiming CycleModel::evaluate(const CycleAllocation& alloc) const {
    if (alloc.l < 1 || alloc.l > cfg_.l_cap) throw std::invalid_argument("dephasing order outside [1, l_cap]");
    if (!(alloc.omega_cond > 0.0) || !(alloc.omega_sideband > 0.0))
        throw std::invalid_argument("drive amplitudes must be positive");
    CycleTiming t;
    t.pm = walk(pm_, alloc);
    t.pm.name = "I+- correction";
    t.pm.error = std::min(1.0, t.pm.error + pm_dropped_);
    t.z = walk(z_[alloc.l - 1], alloc);
    t.z.error = std::min(1.0, t.z.error + z_dropped_[alloc.l - 1]);
    t.z.name = "Iz correction";
    t.tau_exec = t.pm.duration + t.z.duration;
    t.idle_error = idle_error(alloc.l, t.tau_exec);
    t.fidelity = (1.0 - t.pm.error) * (1.0 - t.z.error) * (1.0 - t.idle_error);
    return t;
}

CycleResult realistic_cycle_time(const CycleConfig& cfg) {
    const CycleModel model(cfg);
    const double oc_lo = 1e-5 * cfg.a, oc_hi = cfg.a;
    const double os_lo = 1e-5 * cfg.omega_n, os_hi = cfg.kappa_sideband * cfg.omega_n;
    const int n = std::max(4, cfg.grid);
    auto lerp_log = [](double lo, double hi, double u) { return lo * std::pow(hi / lo, u); };

    CycleResult best;
    best.timing.tau_exec = std::numeric_limits<double>::infinity();

    for (int l = 1; l <= cfg.l_cap; ++l) {
        // Largest feasible sideband amplitude for a given conditional amplitude. Gate errors grow with
        // the drive while idle noise grows with the duration, so the feasible set is a window; scan down
        // from the strongest drive and bisect the upper edge.
        auto max_sideband = [&](double oc) -> double {
            auto ok = [&](double u) {
                return model.evaluate({oc, lerp_log(os_lo, os_hi, u), l}).fidelity >= cfg.f_target;
            };
            if (ok(1.0)) return 1.0;
            const int steps = 2 * n;
            for (int j = steps - 1; j >= 0; --j) {
                double lo_u = static_cast<double>(j) / steps;
                if (!ok(lo_u)) continue;
                double hi_u = static_cast<double>(j + 1) / steps;
                for (int it = 0; it < 40; ++it) {
                    const double mid = 0.5 * (lo_u + hi_u);
                    (ok(mid) ? lo_u : hi_u) = mid;
                }
                return lo_u;
            }
            return -1.0;
        };
        auto tau_at = [&](double uc) {
            const double oc = lerp_log(oc_lo, oc_hi, uc);
            const double us = max_sideband(oc);
            if (us < 0.0) return std::numeric_limits<double>::infinity();
            return model.evaluate({oc, lerp_log(os_lo, os_hi, us), l}).tau_exec;
        };

        // Coarse grid over the conditional amplitude, golden-section refinement around the best.
        int best_i = -1;
        double best_tau = std::numeric_limits<double>::infinity();
        for (int i = 0; i <= n; ++i) {
            const double v = tau_at(static_cast<double>(i) / n);
            if (v < best_tau) {
                best_tau = v;
                best_i = i;
            }
        }
        if (best_i < 0) continue;
        double lo = std::max(0.0, (best_i - 1.0) / n), hi = std::min(1.0, (best_i + 1.0) / n);
        const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
        double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
        double f1 = tau_at(x1), f2 = tau_at(x2);
        for (int it = 0; it < 40; ++it) {
            if (f1 < f2) {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - gr * (hi - lo);
                f1 = tau_at(x1);
            } else {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + gr * (hi - lo);
                f2 = tau_at(x2);
            }
        }
        double uc = f1 < f2 ? x1 : x2;
        if (std::min(f1, f2) > best_tau) uc = static_cast<double>(best_i) / n;
        const double oc = lerp_log(oc_lo, oc_hi, uc);
        const double us = max_sideband(oc);
        if (us < 0.0) continue;
        const CycleAllocation alloc{oc, lerp_log(os_lo, os_hi, us), l};
        const CycleTiming t = model.evaluate(alloc);
        if (t.tau_exec < best.timing.tau_exec) {
            best.feasible = true;
            best.allocation = alloc;
            best.timing = t;
        }
    }

    if (!best.feasible) {
        // Irreducible errors at the gentlest drive: engineered rotations and idle noise.
        const CycleAllocation gentle{oc_lo, os_lo, cfg.l_cap};
        const CycleTiming t = model.evaluate(gentle);
        best.allocation = gentle;
        best.timing = t;
        // A stage whose gate error alone exceeds the budget at the gentlest drive cannot be fixed by
        // slowing down; otherwise idle noise over the slow cycle is what breaks the target.
        const double budget = 1.0 - cfg.f_target;
        if (std::max(t.pm.error, t.z.error) > budget)
            best.bottleneck = t.z.error >= t.pm.error ? t.z.name : t.pm.name;
        else
            best.bottleneck = "idle decoherence";
    }
    return best;
}

}  // namespace spincat
