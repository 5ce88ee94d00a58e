// Classical observables: real polynomials Σ c_{ij} c1^i c2^j on a chart,
// optionally backed by a black-box evaluator for non-polynomial cases (for
// example an observable transported through a non-polynomial chart map).
//
// Observables carry their chart explicitly; evaluating one at a point
// labeled in a different chart is an error, never a silent reinterpretation
// — the whole point of the chart machinery is that the same formula means
// different physics in different coordinates.
#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <utility>

#include "metriq/chart.hpp"
#include "metriq/errors.hpp"
#include "metriq/poly.hpp"

namespace metriq {

struct ClassicalObservable {
    Poly2 terms;                                      // Σ c_{ij} c1^i c2^j
    std::function<double(double, double)> evaluator;  // authoritative if set
    std::string chart_id = "cartesian";

    bool has_evaluator() const { return static_cast<bool>(evaluator); }
    bool is_polynomial() const { return !has_evaluator(); }

    double value_at(double c1, double c2) const {
        const double v = has_evaluator() ? evaluator(c1, c2) : poly_eval(terms, c1, c2);
        if (!std::isfinite(v))
            throw NumericalOverflow("observable evaluation produced a non-finite value");
        return v;
    }
};

inline ClassicalObservable make_polynomial_observable(Poly2 terms,
                                                      std::string chart_id = "cartesian") {
    ClassicalObservable obs;
    obs.terms = poly_simplify(std::move(terms));
    obs.chart_id = std::move(chart_id);
    return obs;
}

inline double evaluate(const ClassicalObservable& obs, const PhaseSpacePoint& pt) {
    if (obs.chart_id != pt.chart_id)
        throw ChartMismatch("observable is expressed in chart '" + obs.chart_id +
                            "' but the point is labeled in chart '" + pt.chart_id + "'");
    return obs.value_at(pt.c1, pt.c2);
}

// Re-express an observable in another chart so that its value at each
// underlying phase-space point is unchanged: new(v) = old(from⁻¹(to(v))).
//
// The polynomial form is preserved whenever the composed substitution is
// polynomial. That includes the component-wise case: an observable that
// depends only on the action p̃ can leave the polar chart in closed form
// because p̃ = (p²+q²)/2 is polynomial even though the angle is not.
// Otherwise the result is evaluator-backed, with the source chart's domain
// enforced at evaluation time.
inline ClassicalObservable transport(const ClassicalObservable& obs,
                                     const Chart& from, const Chart& to) {
    if (obs.chart_id != from.id)
        throw ChartMismatch("observable chart '" + obs.chart_id +
                            "' does not match source chart '" + from.id + "'");
    if (from.id == to.id)
        return obs;

    ClassicalObservable out;
    out.chart_id = to.id;

    if (obs.is_polynomial()) {
        // Need c1(p,q), c2(p,q) of the source chart (only the components the
        // observable actually uses) and p(v), q(v) of the target chart.
        bool uses_c1 = false, uses_c2 = false;
        for (const auto& t : obs.terms) {
            uses_c1 = uses_c1 || t.i > 0;
            uses_c2 = uses_c2 || t.j > 0;
        }
        const bool src_poly = (!uses_c1 || from.from_cartesian_poly_c1.has_value()) &&
                              (!uses_c2 || from.from_cartesian_poly_c2.has_value());
        const bool dst_poly = to.to_cartesian_poly_p.has_value() &&
                              to.to_cartesian_poly_q.has_value();
        if (src_poly && dst_poly) {
            const Poly2 unit_c1{{1.0, 1, 0}}, unit_c2{{1.0, 0, 1}};
            // Source labels as polynomials in Cartesian (p,q)...
            const Poly2 c1_of_x = uses_c1 ? *from.from_cartesian_poly_c1 : unit_c1;
            const Poly2 c2_of_x = uses_c2 ? *from.from_cartesian_poly_c2 : unit_c2;
            Poly2 in_cartesian = poly_compose(obs.terms, c1_of_x, c2_of_x);
            // ...then Cartesian (p,q) as polynomials in the target labels.
            out.terms = poly_compose(in_cartesian, *to.to_cartesian_poly_p,
                                     *to.to_cartesian_poly_q);
            return out;
        }
    }

    // General case: compose numerically, checking the source-chart domain.
    ClassicalObservable src = obs; // capture by value: observables are immutable
    Chart from_copy = from, to_copy = to;
    out.evaluator = [src, from_copy, to_copy](double v1, double v2) {
        const auto x = to_copy.to_cartesian(v1, v2);
        if (!from_copy.domain(x[0], x[1]))
            throw DomainError("transported observable evaluated outside the domain of chart '" +
                              from_copy.id + "'");
        const auto c = from_copy.from_cartesian(x[0], x[1]);
        return src.value_at(c[0], c[1]);
    };
    return out;
}

} // namespace metriq
