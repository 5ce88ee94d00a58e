// Canonical charts on the two-dimensional phase plane.
//
// The Cartesian chart (p,q) is the reference: every cross-chart operation
// routes through it, because the shadow metric singles those coordinates out
// as the physical ones. A chart supplies the forward/inverse maps, a domain
// predicate on the Cartesian plane, an optional gauge function G (the scalar
// that shifts the canonical one-form θ → θ + dG when labels change), and —
// when the maps are polynomial — their exact polynomial forms so observable
// transport can stay in closed form.
#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "metriq/errors.hpp"
#include "metriq/poly.hpp"

namespace metriq {

struct PhaseSpacePoint {
    double c1 = 0.0;
    double c2 = 0.0;
    std::string chart_id = "cartesian";
};

struct Chart {
    std::string id;
    // (c1,c2) -> (p,q) and its inverse.
    std::function<std::array<double, 2>(double, double)> to_cartesian;
    std::function<std::array<double, 2>(double, double)> from_cartesian;
    // Validity predicate on the *Cartesian* plane.
    std::function<bool(double, double)> domain;
    // Gauge function G(c1,c2); identically zero unless the chart needs a
    // generating-function phase to keep ∫(p dq) chart-independent.
    std::function<double(double, double)> gauge;
    // True when c2 is an angle with period 2π (orbit integrals must then be
    // taken over the period rather than around a ray-parameterized contour).
    bool angle_periodic = false;
    // Exact polynomial forms of the map components where they exist
    // (component-wise: e.g. the action p̃=(p²+q²)/2 is polynomial even though
    // the angle is not).
    std::optional<Poly2> to_cartesian_poly_p, to_cartesian_poly_q;
    std::optional<Poly2> from_cartesian_poly_c1, from_cartesian_poly_c2;

    // Predicate check for a labeled point expressed in this chart.
    void validate_point(double c1, double c2) const {
        const auto x = to_cartesian(c1, c2);
        if (!std::isfinite(x[0]) || !std::isfinite(x[1]) || !domain(x[0], x[1]))
            throw DomainError("point (" + std::to_string(c1) + ", " + std::to_string(c2) +
                              ") outside domain of chart '" + id + "'");
    }
};

inline Chart make_cartesian_chart() {
    Chart c;
    c.id = "cartesian";
    c.to_cartesian = [](double p, double q) { return std::array<double, 2>{p, q}; };
    c.from_cartesian = c.to_cartesian;
    c.domain = [](double, double) { return true; };
    c.gauge = [](double, double) { return 0.0; };
    c.to_cartesian_poly_p = Poly2{{1.0, 1, 0}};
    c.to_cartesian_poly_q = Poly2{{1.0, 0, 1}};
    c.from_cartesian_poly_c1 = Poly2{{1.0, 1, 0}};
    c.from_cartesian_poly_c2 = Poly2{{1.0, 0, 1}};
    return c;
}

// Action-angle chart: p̃ = (p²+q²)/2, q̃ = atan2(q,p) with branch (−π,π].
// The origin p=q=0 is excluded (the angle is undefined there); p̃ > 0 on the
// domain. Only the action component is polynomial.
inline Chart make_polar_chart() {
    Chart c;
    c.id = "polar_action_angle";
    c.to_cartesian = [](double pt, double qt) {
        const double r = std::sqrt(2.0 * pt);
        return std::array<double, 2>{r * std::cos(qt), r * std::sin(qt)};
    };
    c.from_cartesian = [](double p, double q) {
        return std::array<double, 2>{0.5 * (p * p + q * q), std::atan2(q, p)};
    };
    c.domain = [](double p, double q) { return p != 0.0 || q != 0.0; };
    c.gauge = [](double, double) { return 0.0; };
    c.angle_periodic = true;
    c.from_cartesian_poly_c1 = Poly2{{0.5, 2, 0}, {0.5, 0, 2}};
    return c;
}

// Rotated chart: p̄ = (p+q)/√2, q̄ = (q−p)/√2 (a 45° rotation, hence an
// isometry of the flat shadow metric). Since p dq = p̄ dq̄ + dF̃ with
// F̃ = pq/2 + (p²−q²)/4, the chart carries the gauge Ḡ = F̃ expressed in
// barred coordinates, which keeps the path phase ∫(p̄ dq̄ + dḠ) equal to
// ∫p dq for every continuous path.
inline Chart make_rotated45_chart() {
    constexpr double inv_sqrt2 = std::numbers::sqrt2 / 2.0;
    Chart c;
    c.id = "rotated_45";
    c.to_cartesian = [=](double pb, double qb) {
        return std::array<double, 2>{(pb - qb) * inv_sqrt2, (pb + qb) * inv_sqrt2};
    };
    c.from_cartesian = [=](double p, double q) {
        return std::array<double, 2>{(p + q) * inv_sqrt2, (q - p) * inv_sqrt2};
    };
    c.domain = [](double, double) { return true; };
    // Ḡ(p̄,q̄) = F̃(p(p̄,q̄), q(p̄,q̄)) = (p̄²−q̄²)/4 − p̄q̄/2.
    c.gauge = [](double pb, double qb) {
        return 0.25 * (pb * pb - qb * qb) - 0.5 * pb * qb;
    };
    c.to_cartesian_poly_p = Poly2{{inv_sqrt2, 1, 0}, {-inv_sqrt2, 0, 1}};
    c.to_cartesian_poly_q = Poly2{{inv_sqrt2, 1, 0}, {inv_sqrt2, 0, 1}};
    c.from_cartesian_poly_c1 = Poly2{{inv_sqrt2, 1, 0}, {inv_sqrt2, 0, 1}};
    c.from_cartesian_poly_c2 = Poly2{{-inv_sqrt2, 1, 0}, {inv_sqrt2, 0, 1}};
    return c;
}

inline const std::vector<Chart>& builtin_charts() {
    static const std::vector<Chart> charts = {
        make_cartesian_chart(), make_polar_chart(), make_rotated45_chart()};
    return charts;
}

inline const Chart& find_chart(const std::string& id) {
    for (const auto& c : builtin_charts())
        if (c.id == id)
            return c;
    throw ChartMismatch("unknown chart id '" + id + "'");
}

// Express a labeled point in Cartesian coordinates (validating the chart
// domain and, for the action-angle chart, the p̃ > 0 label invariant).
inline PhaseSpacePoint to_cartesian_point(const PhaseSpacePoint& pt) {
    const Chart& chart = find_chart(pt.chart_id);
    if (!std::isfinite(pt.c1) || !std::isfinite(pt.c2))
        throw InvalidParameter("phase-space point coordinates must be finite");
    if (chart.angle_periodic && !(pt.c1 > 0.0))
        throw DomainError("action-angle chart requires c1 = p-tilde > 0");
    chart.validate_point(pt.c1, pt.c2);
    const auto x = chart.to_cartesian(pt.c1, pt.c2);
    return PhaseSpacePoint{x[0], x[1], "cartesian"};
}

// Jacobian of to_cartesian by central differences (used by invariant checks
// and metric pullbacks for charts without polynomial maps).
inline std::array<std::array<double, 2>, 2>
chart_jacobian(const Chart& chart, double c1, double c2, double step = 1e-6) {
    std::array<std::array<double, 2>, 2> jac{};
    const auto xp1 = chart.to_cartesian(c1 + step, c2);
    const auto xm1 = chart.to_cartesian(c1 - step, c2);
    const auto xp2 = chart.to_cartesian(c1, c2 + step);
    const auto xm2 = chart.to_cartesian(c1, c2 - step);
    jac[0][0] = (xp1[0] - xm1[0]) / (2 * step); // ∂p/∂c1
    jac[1][0] = (xp1[1] - xm1[1]) / (2 * step); // ∂q/∂c1
    jac[0][1] = (xp2[0] - xm2[0]) / (2 * step); // ∂p/∂c2
    jac[1][1] = (xp2[1] - xm2[1]) / (2 * step); // ∂q/∂c2
    return jac;
}

inline double chart_jacobian_det(const Chart& chart, double c1, double c2,
                                 double step = 1e-6) {
    const auto j = chart_jacobian(chart, c1, c2, step);
    return j[0][0] * j[1][1] - j[0][1] * j[1][0];
}

} // namespace metriq
