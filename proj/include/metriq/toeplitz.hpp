// Lower-symbol (Toeplitz) quantization: h(p,q) ↦ ℋ = ∫ h |p,q⟩⟨p,q| dμ,
// plus the admissibility screen for candidate classical Hamiltonians.
//
// The capacity guard below is calibrated, not decorative: node states at
// disk radius r√ℏ occupy Fock levels up to λ + O(√λ) with λ = r²/2, and a
// truncated Weyl construction corrupts *all* coefficients of a state it
// cannot hold — the damage is not confined to the tail. Quantizing with a
// quadrature the truncation cannot contain therefore poisons even the
// interior block, and is refused rather than silently degraded.
#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "metriq/coherent.hpp"
#include "metriq/config.hpp"
#include "metriq/errors.hpp"
#include "metriq/fock.hpp"
#include "metriq/observable.hpp"

namespace metriq {

struct AdmissibilityReport {
    bool cond1 = false; // ∫ h² e^{−A(p²+q²)} < ∞ for all A > 0
    bool cond2 = false; // ∫ h⁴ e^{−B(p²+q²)²} < ∞ for some B < ½
    enum class Cond3 { semibounded_even_leading, indefinite, unknown } cond3 = Cond3::unknown;
    std::string notes;
};

inline const char* to_string(AdmissibilityReport::Cond3 c) {
    switch (c) {
    case AdmissibilityReport::Cond3::semibounded_even_leading: return "semibounded_even_leading";
    case AdmissibilityReport::Cond3::indefinite: return "indefinite";
    default: return "unknown";
    }
}

// Conditions (1) and (2) hold for every polynomial (Gaussian decay beats
// polynomial growth). Condition (3) — a unique self-adjoint ℋ — has no
// finite-dimensional counterpart; we report a heuristic: the leading total-
// degree form of h is even-degree and nonnegative on the unit circle.
inline AdmissibilityReport admissibility(const ClassicalObservable& h) {
    AdmissibilityReport rep;
    if (!h.is_polynomial()) {
        rep.notes = "evaluator-backed observable: growth conditions not verifiable";
        return rep;
    }
    rep.cond1 = rep.cond2 = true;
    const Poly2 lead = poly_leading_form(h.terms);
    const int deg = poly_total_degree(h.terms);
    bool nonneg = (deg % 2 == 0);
    if (nonneg) {
        for (int k = 0; k < 720; ++k) {
            const double phi = 2.0 * std::numbers::pi * k / 720.0;
            if (poly_eval(lead, std::cos(phi), std::sin(phi)) < -1e-12) {
                nonneg = false;
                break;
            }
        }
    }
    rep.cond3 = nonneg ? AdmissibilityReport::Cond3::semibounded_even_leading
                       : AdmissibilityReport::Cond3::indefinite;
    rep.notes = "cond3 is a leading-form heuristic, not a self-adjointness proof";
    return rep;
}

// Largest quadrature radius (in σ = √ℏ units) whose node states the given
// truncation can represent: solves λ + 3√λ = N with λ = r²/2.
inline double toeplitz_radius_capacity_sigmas(int fock_dim) {
    // invert λ + 3√λ = N for λ via the quadratic in √λ
    const double s = (-3.0 + std::sqrt(9.0 + 4.0 * fock_dim)) / 2.0;
    return std::sqrt(2.0) * s;
}

// Dual bound: the largest Fock block a disk of the given radius quantizes
// faithfully. State n spreads over occupations n ± 3√n, so the block solves
// m + 3√m = λ with λ = r²/2; entries beyond it sink toward zero as the disk
// stops covering them, and their eigenvalues are artifacts of the cutoff,
// not of the symbol.
inline int toeplitz_trusted_dim(double radius_sigmas, int fock_dim) {
    const double lambda = 0.5 * radius_sigmas * radius_sigmas;
    const double s = (-3.0 + std::sqrt(9.0 + 4.0 * lambda)) / 2.0;
    const int m = static_cast<int>(s * s);
    return std::max(1, std::min(m, fock_dim));
}

inline void check_toeplitz_capacity(const PhaseSpaceQuadrature& quad,
                                    const GlobalConfig& cfg) {
    const double lambda = 0.5 * quad.radius_sigmas() * quad.radius_sigmas();
    const double need = lambda + 3.0 * std::sqrt(lambda);
    if (cfg.fock_dim < need)
        throw TailTruncation(
            "toeplitz_quantize: quadrature radius " + std::to_string(quad.radius_sigmas()) +
            " sigma needs fock_dim >= " + std::to_string(static_cast<int>(std::ceil(need))) +
            " (have " + std::to_string(cfg.fock_dim) + ")");
}

// ℋ = Σ_k w_k h(p_k,q_k) |p_k,q_k⟩⟨p_k,q_k|, accumulated in node order and
// symmetrized (the sum is Hermitian up to rounding by construction).
inline FockOperator toeplitz_quantize(const ClassicalObservable& h,
                                      const PhaseSpaceQuadrature& quad,
                                      const FiducialSpec& fid,
                                      const GlobalConfig& cfg) {
    if (h.chart_id != "cartesian")
        throw ChartMismatch("toeplitz_quantize: observable must be in the Cartesian chart "
                            "(transport it first)");
    check_toeplitz_capacity(quad, cfg);

    const WeylOps ops(cfg, fid);
    const int n = cfg.fock_dim;
    CMatrix acc = CMatrix::Zero(n, n);
    for (const auto& node : quad.nodes) {
        const double hv = h.value_at(node.p, node.q);
        const CVector s = ops.displace(node.p, node.q);
        acc.noalias() += (node.w * hv) * (s * s.adjoint());
    }
    FockOperator out;
    out.dim = n;
    out.entries = 0.5 * (acc + acc.adjoint());
    out.label = "Toeplitz(h)";
    return out;
}

// Sampled gap ⟨p,q|Toeplitz(h)|p,q⟩ − h(p,q); the upper symbol exceeds the
// lower one by O(ℏ) (exactly ℏ for h = ½(p²+q²), Ω = 1).
struct SymbolGapSample {
    double p, q, lower, upper, gap;
};

inline std::vector<SymbolGapSample>
upper_of_toeplitz_gap(const ClassicalObservable& h, const PhaseSpaceQuadrature& quad,
                      const FiducialSpec& fid, const GlobalConfig& cfg,
                      const std::vector<PhaseSpacePoint>& grid) {
    const FockOperator op = toeplitz_quantize(h, quad, fid, cfg);
    const WeylOps ops(cfg, fid);
    std::vector<SymbolGapSample> out;
    out.reserve(grid.size());
    for (const auto& pt : grid) {
        if (pt.chart_id != "cartesian")
            throw ChartMismatch("upper_of_toeplitz_gap: grid points must be Cartesian");
        const double lower = h.value_at(pt.c1, pt.c2);
        const double upper = upper_symbol(op, pt, fid, cfg, &ops);
        out.push_back({pt.c1, pt.c2, lower, upper, upper - lower});
    }
    return out;
}

} // namespace metriq
