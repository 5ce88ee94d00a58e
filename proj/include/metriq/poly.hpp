// Minimal bivariate polynomial algebra: Σ c_{ij} x^i y^j as a term list.
// Used for classical observables and for the polynomial branches of chart
// maps (composition under linear/polynomial substitutions). Deliberately not
// a symbolic-algebra system — just what observable transport requires.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <utility>
#include <vector>

namespace metriq {

struct PolyTerm {
    double coeff = 0.0;
    int i = 0; // power of the first coordinate
    int j = 0; // power of the second coordinate
};

using Poly2 = std::vector<PolyTerm>;

namespace detail {
// Exact nonnegative integer power by squaring (std::pow routes through the
// floating exponent path, which is both slower and less accurate here).
inline double ipow(double x, int n) {
    double r = 1.0;
    while (n > 0) {
        if (n & 1) r *= x;
        x *= x;
        n >>= 1;
    }
    return r;
}
} // namespace detail

inline double poly_eval(const Poly2& p, double x, double y) {
    double acc = 0.0;
    for (const auto& t : p)
        acc += t.coeff * detail::ipow(x, t.i) * detail::ipow(y, t.j);
    return acc;
}

// Merge duplicate (i,j) powers and drop exact zeros; canonical term order.
inline Poly2 poly_simplify(const Poly2& p) {
    std::map<std::pair<int, int>, double> acc;
    for (const auto& t : p)
        acc[{t.i, t.j}] += t.coeff;
    Poly2 out;
    for (const auto& [ij, c] : acc)
        if (c != 0.0)
            out.push_back({c, ij.first, ij.second});
    return out;
}

inline Poly2 poly_add(const Poly2& a, const Poly2& b) {
    Poly2 out = a;
    out.insert(out.end(), b.begin(), b.end());
    return poly_simplify(out);
}

inline Poly2 poly_scale(const Poly2& a, double s) {
    Poly2 out = a;
    for (auto& t : out)
        t.coeff *= s;
    return poly_simplify(out);
}

inline Poly2 poly_mul(const Poly2& a, const Poly2& b) {
    Poly2 out;
    out.reserve(a.size() * b.size());
    for (const auto& ta : a)
        for (const auto& tb : b)
            out.push_back({ta.coeff * tb.coeff, ta.i + tb.i, ta.j + tb.j});
    return poly_simplify(out);
}

inline Poly2 poly_pow(const Poly2& a, int n) {
    Poly2 out{{1.0, 0, 0}};
    for (int k = 0; k < n; ++k)
        out = poly_mul(out, a);
    return out;
}

// Substitute x -> px(u,v), y -> py(u,v) into p, producing a polynomial in
// (u,v). This is exact polynomial composition, the workhorse of observable
// transport across polynomially related charts.
inline Poly2 poly_compose(const Poly2& p, const Poly2& px, const Poly2& py) {
    Poly2 out;
    for (const auto& t : p) {
        Poly2 term = poly_mul(poly_pow(px, t.i), poly_pow(py, t.j));
        out = poly_add(out, poly_scale(term, t.coeff));
    }
    return out;
}

inline int poly_total_degree(const Poly2& p) {
    int d = 0;
    for (const auto& t : p)
        if (t.coeff != 0.0)
            d = std::max(d, t.i + t.j);
    return d;
}

// Leading form: the sum of terms of maximal total degree.
inline Poly2 poly_leading_form(const Poly2& p) {
    const int d = poly_total_degree(p);
    Poly2 out;
    for (const auto& t : p)
        if (t.coeff != 0.0 && t.i + t.j == d)
            out.push_back(t);
    return out;
}

} // namespace metriq
