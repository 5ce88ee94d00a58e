// The propagator K(b,a;T) = ⟨b| e^{−iℋT/ℏ} |a⟩ computed by deterministic
// routes: the operator exponential of the Toeplitz Hamiltonian (the oracle
// every other method is judged against), and the lattice phase-space path
// integral with Weyl midpoint rule, reduced in closed form for Hamiltonians
// whose lattice integrals are Gaussian–Fresnel. The Wiener-measure Monte
// Carlo route lives in wiener.hpp and shares the estimate type defined here.
#pragma once

#include <cmath>
#include <complex>
#include <string>

#include <Eigen/Dense>
#include <json.hpp>

#include "metriq/chart.hpp"
#include "metriq/coherent.hpp"
#include "metriq/config.hpp"
#include "metriq/errors.hpp"
#include "metriq/fock.hpp"
#include "metriq/observable.hpp"
#include "metriq/toeplitz.hpp"

namespace metriq {

enum class PropagatorMethod { exact, lattice, wiener_mc };

inline std::string to_string(PropagatorMethod m) {
    switch (m) {
        case PropagatorMethod::exact: return "exact";
        case PropagatorMethod::lattice: return "lattice";
        case PropagatorMethod::wiener_mc: return "wiener_mc";
    }
    return "unknown";
}

struct PropagatorEstimate {
    Complex value{0.0, 0.0};
    double stderr_ = 0.0; // 0 for deterministic methods
    PropagatorMethod method = PropagatorMethod::exact;
    nlohmann::json params = nlohmann::json::object(); // config echo
};

struct LatticeConfig {
    double T = 1.0;
    int N = 200; // interior points; ε = T/(N+1), recomputed on use
    std::string scheme = "weyl_midpoint";

    void validate() const {
        if (!(T > 0.0)) throw InvalidParameter("LatticeConfig: T must be positive");
        if (N < 1) throw InvalidParameter("LatticeConfig: N must be a positive integer");
        if (scheme != "weyl_midpoint")
            throw InvalidParameter("LatticeConfig: unknown scheme '" + scheme + "'");
    }
    double epsilon() const { return T / (N + 1); }
};

// Regularized Fresnel integral ∫exp(iy²/2 − y²/2ν)dy = √(2π/(1/ν − i)),
// principal branch; tends to √(2πi) = √π(1+i) as ν → ∞.
inline Complex fresnel_toy(double nu) {
    if (!(nu > 0.0)) throw InvalidParameter("fresnel_toy: nu must be positive");
    return std::sqrt(Complex(2.0 * M_PI, 0.0) / Complex(1.0 / nu, -1.0));
}

// ⟨b| exp(−i Toeplitz(h) T/ℏ) |a⟩. Deterministic; this is the reference the
// lattice and Wiener estimates are compared to.
inline PropagatorEstimate exact_propagator(const ClassicalObservable& h,
                                           const PhaseSpacePoint& a,
                                           const PhaseSpacePoint& b, double T,
                                           const PhaseSpaceQuadrature& quad,
                                           const FiducialSpec& fid,
                                           const GlobalConfig& cfg) {
    if (!(T >= 0.0) || !std::isfinite(T))
        throw InvalidParameter("exact_propagator: T must be finite and nonnegative");
    const FockOperator H = toeplitz_quantize(h, quad, fid, cfg);
    const FockOperator U = expm_unitary(H, T, cfg);
    const WeylOps ops(cfg, fid);
    const CoherentState sa = coherent_state(a, fid, 0.0, cfg, &ops);
    const CoherentState sb = coherent_state(b, fid, 0.0, cfg, &ops);
    PropagatorEstimate est;
    est.value = sb.vec.coeffs.dot(U.entries * sa.vec.coeffs);
    est.stderr_ = 0.0;
    est.method = PropagatorMethod::exact;
    est.params = {{"T", T},
                  {"fock_dim", cfg.fock_dim},
                  {"hbar", cfg.hbar},
                  {"omega", fid.omega},
                  {"radius", quad.radius}};
    return est;
}

namespace detail {

struct LatticeCoeffs {
    double cp = 0.0; // p²
    double cq = 0.0; // q²
    double cl = 0.0; // q
    double c0 = 0.0; // 1
};

// The closed-form reduction handles H = c_p p² + c_q q² + c_l q + c₀ with
// c_p > 0; anything else is rejected rather than silently approximated.
inline LatticeCoeffs lattice_coeffs(const ClassicalObservable& h) {
    if (h.chart_id != "cartesian")
        throw ChartMismatch("lattice_weyl_propagator: observable must be Cartesian");
    if (!h.is_polynomial())
        throw UnsupportedObservable(
            "lattice_weyl_propagator: closed-form reduction needs a polynomial symbol");
    LatticeCoeffs c;
    for (const auto& t : h.terms) {
        if (t.coeff == 0.0) continue;
        if (t.i == 2 && t.j == 0) c.cp += t.coeff;
        else if (t.i == 0 && t.j == 2) c.cq += t.coeff;
        else if (t.i == 0 && t.j == 1) c.cl += t.coeff;
        else if (t.i == 0 && t.j == 0) c.c0 += t.coeff;
        else
            throw UnsupportedObservable(
                "lattice_weyl_propagator: term p^" + std::to_string(t.i) + " q^" +
                std::to_string(t.j) +
                " is outside the Gaussian-solvable family c_p p^2 + c_q q^2 + c_l q + c_0");
    }
    if (!(c.cp > 0.0))
        throw UnsupportedObservable(
            "lattice_weyl_propagator: p^2 coefficient must be positive");
    return c;
}

} // namespace detail

// Position-representation amplitude ⟨q″|e^{−iℋT/ℏ}|q′⟩ from the lattice
// phase-space path integral with measure Π dp/(2πℏ) Π dq and Weyl midpoint
// rule. The (N+1) p-integrals are Fresnel-Gaussian and done in closed form;
// the remaining N q-integrals form a complex Gaussian with a real symmetric
// tridiagonal quadratic form, evaluated through its eigensystem (magnitude
// from |det|, phase from the signature, stationary value from M⁻¹b).
inline PropagatorEstimate lattice_weyl_propagator(const ClassicalObservable& h,
                                                  double q_from, double q_to,
                                                  const LatticeConfig& lat,
                                                  const GlobalConfig& cfg) {
    lat.validate();
    cfg.validate();
    const auto c = detail::lattice_coeffs(h);
    const int N = lat.N;
    const double eps = lat.epsilon();
    const double hbar = cfg.hbar;

    //   exponent: (i/ℏ) Σ_l [ (Δq_l)²/(4εc_p) − εc_q q̄_l² − εc_l q̄_l ] − (i/ℏ)c₀T
    // with q̄_l the midpoint; interior variables collected as ½qᵀMq + bᵀq + s.
    const double m_diag = 1.0 / (eps * c.cp) - eps * c.cq;
    const double m_off = -(0.5 / (eps * c.cp) + 0.5 * eps * c.cq);

    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(N, N);
    for (int j = 0; j < N; ++j) {
        M(j, j) = m_diag;
        if (j + 1 < N) M(j, j + 1) = M(j + 1, j) = m_off;
    }
    Eigen::VectorXd b = Eigen::VectorXd::Constant(N, -eps * c.cl);
    b(0) += m_off * q_from;
    b(N - 1) += m_off * q_to;

    const double s = (q_from * q_from + q_to * q_to) * (0.25 / (eps * c.cp) - 0.25 * eps * c.cq) -
                     0.5 * eps * c.cl * (q_from + q_to) - c.c0 * lat.T;

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
    const Eigen::VectorXd& lam = es.eigenvalues();
    const double lam_scale = lam.cwiseAbs().maxCoeff();
    double log_mag = -(N + 1) * std::log(2.0 * M_PI * hbar) +
                     (N + 1) * 0.5 * std::log(M_PI * hbar / (eps * c.cp)) +
                     N * 0.5 * std::log(2.0 * M_PI * hbar);
    double phase = -(N + 1) * M_PI / 4.0 + (s / hbar);
    for (int k = 0; k < N; ++k) {
        if (std::abs(lam(k)) < 1e-12 * lam_scale)
            throw NumericalOverflow(
                "lattice_weyl_propagator: singular quadratic form (focal point / caustic "
                "at this T)");
        log_mag -= 0.5 * std::log(std::abs(lam(k)));
        phase += (lam(k) > 0.0 ? 1.0 : -1.0) * M_PI / 4.0;
    }
    const Eigen::VectorXd vb = es.eigenvectors().transpose() * b;
    double quad = 0.0;
    for (int k = 0; k < N; ++k) quad -= 0.5 * vb(k) * vb(k) / lam(k);
    phase += quad / hbar;

    PropagatorEstimate est;
    est.value = std::exp(log_mag) * std::exp(Complex(0.0, phase));
    est.stderr_ = 0.0;
    est.method = PropagatorMethod::lattice;
    est.params = {{"T", lat.T},
                  {"N", N},
                  {"scheme", lat.scheme},
                  {"hbar", hbar},
                  {"from", q_from},
                  {"to", q_to}};
    return est;
}

} // namespace metriq
