// Bohr–Sommerfeld semiclassics: closed-orbit areas ∮p dq at fixed energy and
// the quantization rule area(E_n) = (n+½)·2πℏ. Areas are chart-invariant, so
// the solver works directly in whichever chart the observable is expressed.
//
// Contour extraction uses ray shooting about the well minimum rather than a
// marching-squares grid: for a star-shaped level set each ray from the
// minimum crosses the contour exactly once, the crossing is located by
// bisection to machine precision, and the enclosed area ½∮R²dφ is computed
// with the periodic trapezoid rule, which converges spectrally for smooth
// contours. A rescan beyond the first crossing detects non-star-shaped or
// multi-well level sets, which are rejected (NonSimpleContour) rather than
// mishandled. Angle-periodic charts shortcut to a radial solve per angle.
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "metriq/chart.hpp"
#include "metriq/config.hpp"
#include "metriq/errors.hpp"
#include "metriq/observable.hpp"

namespace metriq {

struct OrbitArea {
    double energy = 0.0;
    double area = 0.0;   // ∮p dq > 0
    int n_turning = 0;   // sign changes of the configuration coordinate along the orbit
    std::string chart_id = "cartesian";
};

namespace detail {

struct WellMinimum {
    double c1 = 0.0, c2 = 0.0;
    double value = 0.0;
};

// Damped Newton / gradient descent with finite-difference derivatives,
// started from the chart origin. Rejects stationary points that are not
// local minima (saddle or maximum ⇒ the level-set topology is not a single
// well around the start).
inline WellMinimum find_well_minimum(const ClassicalObservable& h, double c1 = 0.0,
                                     double c2 = 0.0) {
    const double eps = std::sqrt(std::numeric_limits<double>::epsilon());
    auto f = [&](double a, double b) { return h.value_at(a, b); };
    for (int iter = 0; iter < 200; ++iter) {
        const double h1 = eps * (1.0 + std::abs(c1)), h2 = eps * (1.0 + std::abs(c2));
        const double g1 = (f(c1 + h1, c2) - f(c1 - h1, c2)) / (2 * h1);
        const double g2 = (f(c1, c2 + h2) - f(c1, c2 - h2)) / (2 * h2);
        const double f0 = f(c1, c2);
        const double a11 = (f(c1 + h1, c2) - 2 * f0 + f(c1 - h1, c2)) / (h1 * h1);
        const double a22 = (f(c1, c2 + h2) - 2 * f0 + f(c1, c2 - h2)) / (h2 * h2);
        const double a12 = (f(c1 + h1, c2 + h2) - f(c1 + h1, c2 - h2) -
                            f(c1 - h1, c2 + h2) + f(c1 - h1, c2 - h2)) /
                           (4 * h1 * h2);
        const double det = a11 * a22 - a12 * a12;
        double s1, s2;
        if (det > 0.0 && a11 > 0.0) {
            s1 = -(a22 * g1 - a12 * g2) / det;
            s2 = -(a11 * g2 - a12 * g1) / det;
        } else { // Hessian not positive definite here: fall back to descent
            const double gnorm = std::hypot(g1, g2);
            if (gnorm == 0.0) break;
            const double scale = 0.1 * (1.0 + std::hypot(c1, c2)) / gnorm;
            s1 = -scale * g1;
            s2 = -scale * g2;
        }
        // Backtracking line search so the descent cannot overshoot.
        double t = 1.0;
        while (t > 1e-12 && f(c1 + t * s1, c2 + t * s2) > f0) t *= 0.5;
        c1 += t * s1;
        c2 += t * s2;
        if (std::hypot(t * s1, t * s2) < 1e-14 * (1.0 + std::hypot(c1, c2))) break;
    }
    // Final curvature check: a saddle or maximum means the well structure the
    // contour extraction relies on is absent.
    const double h1 = 1e-4 * (1.0 + std::abs(c1)), h2 = 1e-4 * (1.0 + std::abs(c2));
    const double f0 = f(c1, c2);
    const double a11 = (f(c1 + h1, c2) - 2 * f0 + f(c1 - h1, c2)) / (h1 * h1);
    const double a22 = (f(c1, c2 + h2) - 2 * f0 + f(c1, c2 - h2)) / (h2 * h2);
    const double a12 = (f(c1 + h1, c2 + h2) - f(c1 + h1, c2 - h2) - f(c1 - h1, c2 + h2) +
                        f(c1 - h1, c2 - h2)) /
                       (4 * h1 * h2);
    if (!(a11 * a22 - a12 * a12 > 0.0) || !(a11 > 0.0))
        throw NonSimpleContour("stationary point at (" + std::to_string(c1) + ", " +
                               std::to_string(c2) + ") is not a local minimum");
    return {c1, c2, f0};
}

// First crossing of {h = E} along the ray c* + R·(cosφ, sinφ), R > 0.
// Bisection after bracket doubling; a rescan past the crossing rejects rays
// the level set crosses more than once.
inline double ray_crossing(const ClassicalObservable& h, const WellMinimum& min_pt,
                           double E, double cphi, double sphi) {
    auto f = [&](double r) {
        return h.value_at(min_pt.c1 + r * cphi, min_pt.c2 + r * sphi) - E;
    };
    double lo = 0.0, hi = 1e-3 * (1.0 + std::hypot(min_pt.c1, min_pt.c2));
    int doublings = 0;
    while (f(hi) < 0.0) {
        lo = hi;
        hi *= 2.0;
        if (++doublings > 300)
            throw NonSimpleContour("level set does not close along a ray (energy " +
                                   std::to_string(E) + ")");
    }
    for (int it = 0; it < 100 && hi - lo > 1e-16 * (1.0 + hi); ++it) {
        const double mid = 0.5 * (lo + hi);
        (f(mid) < 0.0 ? lo : hi) = mid;
    }
    const double r_star = 0.5 * (lo + hi);
    // Rescan: any return below E beyond the crossing means the ray pierces
    // the level set again (multiple wells or a non-star-shaped contour).
    const double r_max = 3.0 * r_star + 1e-6;
    const double tol = 1e-9 * (1.0 + std::abs(E));
    for (int j = 1; j <= 96; ++j) {
        const double r = r_star + (r_max - r_star) * j / 96.0;
        if (f(r) < -tol)
            throw NonSimpleContour("level set crosses a ray more than once (energy " +
                                   std::to_string(E) + ")");
    }
    return r_star;
}

inline int count_turning_points(const std::vector<double>& qs) {
    const std::size_t n = qs.size();
    int changes = 0;
    double prev = 0.0;
    bool have_prev = false;
    for (std::size_t j = 0; j < n; ++j) {
        const double d = qs[(j + 1) % n] - qs[j];
        if (d == 0.0) continue;
        if (have_prev && d * prev < 0.0) ++changes;
        prev = d;
        have_prev = true;
    }
    // Close the cycle: compare last nonzero step against the first.
    for (std::size_t j = 0; j < n; ++j) {
        const double d = qs[(j + 1) % n] - qs[j];
        if (d != 0.0) {
            if (have_prev && d * prev < 0.0) ++changes;
            break;
        }
    }
    return changes;
}

inline OrbitArea orbit_area_fixed(const ClassicalObservable& h, const Chart& chart,
                                  double E, int n_angle) {
    OrbitArea out;
    out.energy = E;
    out.chart_id = chart.id;
    std::vector<double> qs(n_angle);

    if (chart.angle_periodic) {
        // Coordinates are (action, angle): solve h̃(p̃, q̃_j) = E radially in
        // the action for each angle, then ∮p̃ dq̃ is the periodic mean × 2π.
        const double p_floor = 1e-12;
        double e_min = h.value_at(p_floor, 0.0);
        for (int j = 1; j < 8; ++j)
            e_min = std::min(e_min, h.value_at(p_floor, -M_PI + 2 * M_PI * j / 8.0));
        if (!(E > e_min))
            throw EnergyBelowMinimum("energy " + std::to_string(E) +
                                     " does not exceed the well minimum " +
                                     std::to_string(e_min));
        double sum = 0.0;
        for (int j = 0; j < n_angle; ++j) {
            const double ang = -M_PI + 2 * M_PI * (j + 0.5) / n_angle;
            auto f = [&](double a) { return h.value_at(a, ang) - E; };
            double lo = p_floor, hi = std::max(std::abs(E), 1.0);
            int doublings = 0;
            while (f(hi) < 0.0) {
                lo = hi;
                hi *= 2.0;
                if (++doublings > 300)
                    throw NonSimpleContour("level set does not close in the action");
            }
            for (int it = 0; it < 100 && hi - lo > 1e-16 * (1.0 + hi); ++it) {
                const double mid = 0.5 * (lo + hi);
                (f(mid) < 0.0 ? lo : hi) = mid;
            }
            const double action = 0.5 * (lo + hi);
            sum += action;
            qs[j] = chart.to_cartesian(action, ang)[1];
        }
        out.area = sum * 2 * M_PI / n_angle;
        out.n_turning = count_turning_points(qs);
        return out;
    }

    const WellMinimum min_pt = find_well_minimum(h);
    if (!(E > min_pt.value))
        throw EnergyBelowMinimum("energy " + std::to_string(E) +
                                 " does not exceed the well minimum " +
                                 std::to_string(min_pt.value));
    // Area of the star-shaped region: ½∮R²dφ about the minimum (the center
    // offset drops out for a closed curve).
    double sum_r2 = 0.0;
    for (int j = 0; j < n_angle; ++j) {
        const double phi = 2 * M_PI * (j + 0.5) / n_angle;
        const double r = ray_crossing(h, min_pt, E, std::cos(phi), std::sin(phi));
        sum_r2 += r * r;
        qs[j] = min_pt.c2 + r * std::sin(phi);
    }
    out.area = sum_r2 * M_PI / n_angle;
    out.n_turning = count_turning_points(qs);
    return out;
}

} // namespace detail

// ∮p dq on the level set {H = E} in the observable's own chart, refined until
// doubling the angular resolution moves the area by < 1e-9 relative.
inline OrbitArea orbit_area(const ClassicalObservable& h, double E) {
    const Chart& chart = find_chart(h.chart_id);
    int n = 256;
    OrbitArea prev = detail::orbit_area_fixed(h, chart, E, n);
    for (int round = 0; round < 4; ++round) {
        n *= 2;
        OrbitArea cur = detail::orbit_area_fixed(h, chart, E, n);
        if (std::abs(cur.area - prev.area) <= 1e-9 * std::abs(cur.area)) return cur;
        prev = cur;
    }
    return prev;
}

// Energies E_0..E_n_max with area(E_n) = (n+½)·2πℏ, solved by bracket
// doubling plus bisection to |area residual| < 1e-8·2πℏ.
inline std::vector<double> bohr_sommerfeld_levels(const ClassicalObservable& h, int n_max,
                                                  const GlobalConfig& cfg) {
    if (n_max < 0) throw InvalidParameter("n_max must be nonnegative");
    cfg.validate();
    const Chart& chart = find_chart(h.chart_id);

    // Well floor, used as the lower bracket for every level.
    double e_floor;
    if (chart.angle_periodic) {
        e_floor = h.value_at(1e-12, 0.0);
        for (int j = 1; j < 8; ++j)
            e_floor = std::min(e_floor, h.value_at(1e-12, -M_PI + 2 * M_PI * j / 8.0));
    } else {
        e_floor = detail::find_well_minimum(h).value;
    }

    auto area_at = [&](double E) { return orbit_area(h, E).area; };
    const double two_pi_hbar = 2 * M_PI * cfg.hbar;
    const double tol = 1e-8 * two_pi_hbar;

    std::vector<double> levels;
    levels.reserve(static_cast<std::size_t>(n_max) + 1);
    double e_lo_start = e_floor;
    for (int n = 0; n <= n_max; ++n) {
        const double target = (n + 0.5) * two_pi_hbar;
        double lo = e_lo_start, hi = std::max(e_floor + 1.0, 2.0 * std::abs(e_floor) + 1.0);
        int doublings = 0;
        while (area_at(hi) < target) {
            lo = hi;
            hi = e_floor + 2.0 * (hi - e_floor);
            if (++doublings > 60)
                throw RootNotBracketed("energy range exhausted before level " +
                                       std::to_string(n));
        }
        double residual = std::numeric_limits<double>::infinity();
        double mid = 0.5 * (lo + hi);
        for (int it = 0; it < 200; ++it) {
            mid = 0.5 * (lo + hi);
            residual = area_at(mid) - target;
            if (std::abs(residual) < tol) break;
            (residual < 0.0 ? lo : hi) = mid;
        }
        if (!(std::abs(residual) < tol))
            throw RootNotBracketed("area residual did not converge for level " +
                                   std::to_string(n));
        levels.push_back(mid);
        e_lo_start = mid; // areas are monotone in E, so levels ascend
    }
    return levels;
}

// Relative mismatch of ∮p dq between two charts at the same energy; the
// observable is transported into each chart before extraction.
inline double area_invariance_check(const ClassicalObservable& h, const Chart& chart_a,
                                    const Chart& chart_b, double E) {
    const Chart& home = find_chart(h.chart_id);
    const ClassicalObservable ha = (h.chart_id == chart_a.id) ? h : transport(h, home, chart_a);
    const ClassicalObservable hb = (h.chart_id == chart_b.id) ? h : transport(h, home, chart_b);
    const double a = orbit_area(ha, E).area;
    const double b = orbit_area(hb, E).area;
    return std::abs(a - b) / std::abs(a);
}

} // namespace metriq
