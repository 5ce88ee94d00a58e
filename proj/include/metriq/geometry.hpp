// Differential geometry induced by the coherent states: the canonical
// one-form θ = iℏ⟨p,q|d|p,q⟩, the symplectic form ω = dθ, and the
// phase-space metric dσ² = 2ℏ²[‖d|p,q⟩‖² − |⟨p,q|d|p,q⟩|²].
//
// All differentials are realized as central finite differences of the Fock
// coefficient vectors — no automatic differentiation, so the module stays
// independent of the constructions it is used to check. For the Ω-fiducial
// the metric comes out flat and translation-invariant, diag(ℏ/Ω, ℏΩ); note
// this is twice the naive second-moment display (⟨(ΔQ)²⟩dp² + ...), which is
// consistent with dσ² = ℏ(dp²+dq²) at Ω = 1 only when the overall factor is
// 2ℏ², the convention adopted here.
#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>

#include <Eigen/Dense>

#include "metriq/chart.hpp"
#include "metriq/coherent.hpp"
#include "metriq/config.hpp"
#include "metriq/errors.hpp"

namespace metriq {

using GaugeFn = std::function<double(double, double)>;

struct GeometryReport {
    PhaseSpacePoint point;
    std::array<double, 2> theta{0.0, 0.0}; // (θ_p, θ_q)
    double omega_pq = 1.0;                 // coefficient of dp∧dq
    Eigen::Matrix2d metric = Eigen::Matrix2d::Zero();
    std::string chart_id = "cartesian";
};

inline double default_fd_step(double coord) {
    return std::sqrt(std::numeric_limits<double>::epsilon()) * (1.0 + std::abs(coord));
}

namespace detail {

// Central-difference derivative of the state along one Cartesian label.
inline CVector state_derivative(const WeylOps& ops, double p, double q,
                                bool along_p, double step, const GaugeFn& gauge) {
    auto g = [&](double pp, double qq) { return gauge ? gauge(pp, qq) : 0.0; };
    const double pp1 = along_p ? p + step : p, qq1 = along_p ? q : q + step;
    const double pp2 = along_p ? p - step : p, qq2 = along_p ? q : q - step;
    const CVector plus = ops.displace(pp1, qq1, g(pp1, qq1));
    const CVector minus = ops.displace(pp2, qq2, g(pp2, qq2));
    return (plus - minus) / (2.0 * step);
}

} // namespace detail

// θ components (θ_p, θ_q) with θ_μ = Re[iℏ⟨ψ|∂_μψ⟩]; equals (0, p) for the
// centered fiducial with G = 0, and shifts by dG when a gauge is attached.
inline std::array<double, 2> one_form(const PhaseSpacePoint& pt, const FiducialSpec& fid,
                                      const GlobalConfig& cfg, double step = 0.0,
                                      const GaugeFn& gauge = nullptr,
                                      const WeylOps* cache = nullptr) {
    if (pt.chart_id != "cartesian")
        throw ChartMismatch("one_form expects Cartesian labels");
    std::optional<WeylOps> local;
    if (!cache) local.emplace(cfg, fid);
    const WeylOps& ops = cache ? *cache : *local;
    const double p = pt.c1, q = pt.c2;
    const double g0 = gauge ? gauge(p, q) : 0.0;
    const CVector psi = ops.displace(p, q, g0);
    std::array<double, 2> theta{};
    for (int mu = 0; mu < 2; ++mu) {
        const double h = step > 0.0 ? step : default_fd_step(mu == 0 ? p : q);
        const CVector d = detail::state_derivative(ops, p, q, mu == 0, h, gauge);
        theta[mu] = std::real(Complex(0, cfg.hbar) * psi.dot(d));
    }
    return theta;
}

// Coefficient of dp∧dq in dθ, via finite differences of the one-form. Equals
// 1 for any gauge (d²G = 0) and any ℏ.
inline double symplectic_form(const PhaseSpacePoint& pt, const FiducialSpec& fid,
                              const GlobalConfig& cfg, double outer_step = 1e-2,
                              const GaugeFn& gauge = nullptr) {
    const WeylOps ops(cfg, fid);
    auto theta_at = [&](double p, double q) {
        return one_form({p, q, "cartesian"}, fid, cfg, 0.0, gauge, &ops);
    };
    const double p = pt.c1, q = pt.c2, h = outer_step;
    const auto tp_plus = theta_at(p + h, q), tp_minus = theta_at(p - h, q);
    const auto tq_plus = theta_at(p, q + h), tq_minus = theta_at(p, q - h);
    const double d_p_theta_q = (tp_plus[1] - tp_minus[1]) / (2 * h);
    const double d_q_theta_p = (tq_plus[0] - tq_minus[0]) / (2 * h);
    return d_p_theta_q - d_q_theta_p;
}

// dσ² coefficients as a symmetric 2×2 matrix in the (dp, dq) basis; the
// off-diagonal entry is half the dp dq coefficient.
inline Eigen::Matrix2d metric(const PhaseSpacePoint& pt, const FiducialSpec& fid,
                              const GlobalConfig& cfg, double step = 0.0,
                              const WeylOps* cache = nullptr) {
    if (pt.chart_id != "cartesian")
        throw ChartMismatch("metric expects Cartesian labels");
    std::optional<WeylOps> local;
    if (!cache) local.emplace(cfg, fid);
    const WeylOps& ops = cache ? *cache : *local;
    const double p = pt.c1, q = pt.c2;
    const CVector psi = ops.displace(p, q);
    const double hp = step > 0.0 ? step : default_fd_step(p);
    const double hq = step > 0.0 ? step : default_fd_step(q);
    const CVector dp = detail::state_derivative(ops, p, q, true, hp, nullptr);
    const CVector dq = detail::state_derivative(ops, p, q, false, hq, nullptr);
    const Complex pp = psi.dot(dp), pq = psi.dot(dq);
    const double c = 2.0 * cfg.hbar * cfg.hbar;
    Eigen::Matrix2d g;
    g(0, 0) = c * (std::real(dp.dot(dp)) - std::norm(pp));
    g(1, 1) = c * (std::real(dq.dot(dq)) - std::norm(pq));
    g(0, 1) = g(1, 0) = c * (std::real(dp.dot(dq)) - std::real(std::conj(pp) * pq));
    return g;
}

// Pullback of the Cartesian metric through a chart's Jacobian; e.g. the
// action-angle chart yields diag(ℏ/2p̃, 2ℏp̃).
inline Eigen::Matrix2d metric_in_chart(const Chart& chart, const PhaseSpacePoint& pt,
                                       const FiducialSpec& fid, const GlobalConfig& cfg) {
    if (pt.chart_id != chart.id)
        throw ChartMismatch("metric_in_chart: point is labeled in chart '" + pt.chart_id +
                            "', expected '" + chart.id + "'");
    if (chart.angle_periodic && !(pt.c1 > 0.0))
        throw DomainError("metric_in_chart: action coordinate must be positive");
    chart.validate_point(pt.c1, pt.c2);
    const auto x = chart.to_cartesian(pt.c1, pt.c2);
    const Eigen::Matrix2d g_cart = metric({x[0], x[1], "cartesian"}, fid, cfg);
    const auto jac = chart_jacobian(chart, pt.c1, pt.c2);
    Eigen::Matrix2d j;
    j << jac[0][0], jac[0][1], jac[1][0], jac[1][1];
    return j.transpose() * g_cart * j;
}

// Full report (θ, ω, dσ²) at a Cartesian point.
inline GeometryReport geometry_report(const PhaseSpacePoint& pt, const FiducialSpec& fid,
                                      const GlobalConfig& cfg) {
    GeometryReport rep;
    rep.point = pt;
    rep.chart_id = pt.chart_id;
    rep.theta = one_form(pt, fid, cfg);
    rep.omega_pq = symplectic_form(pt, fid, cfg);
    rep.metric = metric(pt, fid, cfg);
    return rep;
}

// Gaussian curvature of a metric field by the Brioschi formula on central-
// difference samples. The sampler returns the 2×2 metric at (u,v); h is the
// stencil spacing. Tolerances downstream reflect the double differentiation.
inline double brioschi_curvature(const std::function<Eigen::Matrix2d(double, double)>& g,
                                 double u, double v, double h) {
    auto E = [&](double du, double dv) { return g(u + du, v + dv)(0, 0); };
    auto F = [&](double du, double dv) { return g(u + du, v + dv)(0, 1); };
    auto G = [&](double du, double dv) { return g(u + du, v + dv)(1, 1); };

    const double E0 = E(0, 0), F0 = F(0, 0), G0 = G(0, 0);
    const double Eu = (E(h, 0) - E(-h, 0)) / (2 * h);
    const double Ev = (E(0, h) - E(0, -h)) / (2 * h);
    const double Gu = (G(h, 0) - G(-h, 0)) / (2 * h);
    const double Gv = (G(0, h) - G(0, -h)) / (2 * h);
    const double Fu = (F(h, 0) - F(-h, 0)) / (2 * h);
    const double Fv = (F(0, h) - F(0, -h)) / (2 * h);
    const double Evv = (E(0, h) - 2 * E0 + E(0, -h)) / (h * h);
    const double Guu = (G(h, 0) - 2 * G0 + G(-h, 0)) / (h * h);
    const double Fuv = (F(h, h) - F(h, -h) - F(-h, h) + F(-h, -h)) / (4 * h * h);

    Eigen::Matrix3d m1, m2;
    m1 << -0.5 * Evv + Fuv - 0.5 * Guu, 0.5 * Eu, Fu - 0.5 * Ev,
          Fv - 0.5 * Gu,                E0,       F0,
          0.5 * Gv,                     F0,       G0;
    m2 << 0.0,      0.5 * Ev, 0.5 * Gu,
          0.5 * Ev, E0,       F0,
          0.5 * Gu, F0,       G0;
    const double disc = E0 * G0 - F0 * F0;
    return (m1.determinant() - m2.determinant()) / (disc * disc);
}

// Curvature of the coherent-state metric field at a Cartesian point
// (flatness probe: 0 for every Ω).
inline double phase_space_curvature(const PhaseSpacePoint& pt, const FiducialSpec& fid,
                                    const GlobalConfig& cfg, double h = 0.05) {
    const WeylOps ops(cfg, fid);
    auto g = [&](double p, double q) {
        return metric({p, q, "cartesian"}, fid, cfg, 0.0, &ops);
    };
    return brioschi_curvature(g, pt.c1, pt.c2, h);
}

} // namespace metriq
