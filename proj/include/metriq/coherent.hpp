// Canonical coherent states |p,q⟩ = e^{−iG/ℏ} e^{−iqP/ℏ} e^{ipQ/ℏ} |η⟩,
// their overlap kernel, phase-space quadrature, the resolution of unity,
// and upper symbols.
//
// States are generated by the group operators themselves — the two matrix
// exponentials above, realized through cached spectral factorizations of P
// and Q — rather than by the analytic coefficient formula; the analytic form
// ⟨n|p,q⟩ = phase·e^{−|z|²/2} zⁿ/√n!, z = (Ωq+ip)/√(2Ωℏ), is reserved for
// the test oracles.
#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "metriq/chart.hpp"
#include "metriq/config.hpp"
#include "metriq/errors.hpp"
#include "metriq/fock.hpp"

namespace metriq {

// Tail mass P[X >= m] of a Poisson(λ) variable — exactly the Fock-basis
// probability mass of |p,q⟩ beyond level m, with λ = |z|². Computed in
// log-shifted space so large λ stays finite.
inline double poisson_tail(double lambda, int m) {
    if (m <= 0)
        return 1.0;
    if (lambda <= 0.0)
        return 0.0;
    auto log_pmf = [lambda](int n) {
        return -lambda + n * std::log(lambda) - std::lgamma(n + 1.0);
    };
    if (m > lambda) {
        // Sum the tail directly; terms decay faster than geometrically.
        double acc = 0.0;
        const double ref = log_pmf(m);
        for (int n = m; n < m + 64 || acc == 0.0; ++n) {
            const double t = std::exp(log_pmf(n) - ref);
            acc += t;
            if (t < 1e-18 * acc)
                break;
        }
        return std::exp(ref) * acc;
    }
    // Complement of the head sum.
    double head = 0.0;
    const double ref = log_pmf(static_cast<int>(lambda));
    for (int n = 0; n < m; ++n)
        head += std::exp(log_pmf(n) - ref);
    return 1.0 - std::exp(ref) * head;
}

// Cached spectral factorizations of P and Q for repeated displacements.
// With Q = V_q Λ_q V_q† and P = V_p Λ_p V_p†,
//   |p,q⟩ = e^{−iG/ℏ} V_p e^{−iqΛ_p/ℏ} (V_p†V_q) e^{ipΛ_q/ℏ} (V_q†|η⟩),
// which is the verbatim operator product evaluated with two matrix–vector
// products per state.
class WeylOps {
public:
    WeylOps(const GlobalConfig& cfg, const FiducialSpec& fid)
        : cfg_(cfg), fid_(fid) {
        cfg.validate();
        fid.validate();
        kin_ = build_kinematics(cfg, fid.omega);
        Eigen::SelfAdjointEigenSolver<CMatrix> esq(kin_.Q.entries);
        Eigen::SelfAdjointEigenSolver<CMatrix> esp(kin_.P.entries);
        lam_q_ = esq.eigenvalues();
        lam_p_ = esp.eigenvalues();
        vp_ = esp.eigenvectors();
        cross_ = vp_.adjoint() * esq.eigenvectors();
        wq_ = esq.eigenvectors().adjoint() * kin_.eta.coeffs;
    }

    const GlobalConfig& cfg() const { return cfg_; }
    const FiducialSpec& fid() const { return fid_; }
    const Kinematics& kinematics() const { return kin_; }

    CVector displace(double p, double q, double gauge_value = 0.0) const {
        const int n = cfg_.fock_dim;
        const double inv_hbar = 1.0 / cfg_.hbar;
        CVector u(n);
        for (int k = 0; k < n; ++k)
            u(k) = wq_(k) * std::exp(Complex(0, p * lam_q_(k) * inv_hbar));
        CVector v = cross_ * u;
        for (int k = 0; k < n; ++k)
            v(k) *= std::exp(Complex(0, -q * lam_p_(k) * inv_hbar));
        CVector s = vp_ * v;
        if (gauge_value != 0.0)
            s *= std::exp(Complex(0, -gauge_value * inv_hbar));
        return s;
    }

private:
    GlobalConfig cfg_;
    FiducialSpec fid_;
    Kinematics kin_;
    Eigen::VectorXd lam_q_, lam_p_;
    CMatrix vp_;     // eigenvectors of P
    CMatrix cross_;  // V_p† V_q
    CVector wq_;     // V_q† |η⟩
};

struct CoherentState {
    PhaseSpacePoint point; // Cartesian labels
    FiducialSpec fiducial;
    double gauge_phase = 0.0; // value of G(p,q)
    FockVector vec;
};

// |z|² for the state at (p,q): the Poisson intensity of its Fock occupation.
inline double coherent_intensity(const GlobalConfig& cfg, const FiducialSpec& fid,
                                 double p, double q) {
    return (p * p / fid.omega + fid.omega * q * q) / (2.0 * cfg.hbar);
}

inline CoherentState coherent_state(const PhaseSpacePoint& pt, const FiducialSpec& fid,
                                    double gauge_value, const GlobalConfig& cfg,
                                    const WeylOps* cache = nullptr) {
    cfg.validate();
    fid.validate();
    if (pt.chart_id != "cartesian")
        throw ChartMismatch("coherent_state expects Cartesian labels; convert first");
    const double lambda = coherent_intensity(cfg, fid, pt.c1, pt.c2);
    const double tail = poisson_tail(lambda, cfg.interior_dim());
    if (tail >= 1e-10)
        throw TailTruncation("coherent_state: tail mass " + std::to_string(tail) +
                             " beyond the interior block; the point is too far from the "
                             "origin for fock_dim " + std::to_string(cfg.fock_dim));
    CoherentState st;
    st.point = pt;
    st.fiducial = fid;
    st.gauge_phase = gauge_value;
    st.vec.dim = cfg.fock_dim;
    if (cache)
        st.vec.coeffs = cache->displace(pt.c1, pt.c2, gauge_value);
    else
        st.vec.coeffs = WeylOps(cfg, fid).displace(pt.c1, pt.c2, gauge_value);
    return st;
}

// Fock inner product ⟨a|b⟩ (a is the bra). Gauge phases ride along in the
// vectors, giving the e^{+iG_a/ℏ} e^{−iG_b/ℏ} convention.
inline Complex overlap(const CoherentState& a, const CoherentState& b) {
    if (!a.fiducial.compatible(b.fiducial))
        throw FiducialMismatch("overlap: coherent states built from different fiducials");
    if (a.vec.dim != b.vec.dim)
        throw InvalidParameter("overlap: dimension mismatch");
    return a.vec.coeffs.dot(b.vec.coeffs); // Eigen's dot conjugates the left factor
}

// Closed-form overlap kernel
//   ⟨p′,q′|p,q⟩ = exp{(i/2ℏ)(p′+p)(q′−q) − (1/4ℏ)[Ω⁻¹(p′−p)² + Ω(q′−q)²]}
// times the gauge factor e^{+iG′/ℏ} e^{−iG/ℏ}; (p′,q′) is the bra.
inline Complex overlap_kernel(const GlobalConfig& cfg, const FiducialSpec& fid,
                              double pb, double qb, double pa, double qa,
                              double gauge_bra = 0.0, double gauge_ket = 0.0) {
    const double h = cfg.hbar, om = fid.omega;
    const double re = -((pb - pa) * (pb - pa) / om + om * (qb - qa) * (qb - qa)) / (4.0 * h);
    const double im = 0.5 * (pb + pa) * (qb - qa) / h + (gauge_bra - gauge_ket) / h;
    return std::exp(Complex(re, im));
}

struct PhaseSpaceQuadrature {
    struct Node {
        double p, q, w; // w already includes the 1/2πℏ measure factor
    };
    std::vector<Node> nodes;
    std::string scheme = "disk-gl";
    double radius = 0.0; // absolute disk radius (Cartesian, before Ω scaling)
    int nodes_radial = 0;
    int nodes_angular = 0;
    double hbar = 1.0;
    double omega = 1.0;

    double radius_sigmas() const { return radius / std::sqrt(hbar); }
};

// Gauss–Legendre nodes/weights on [−1,1] by Newton iteration on P_n.
inline void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
    x.assign(n, 0.0);
    w.assign(n, 0.0);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        // Chebyshev-like initial guess, then Newton on P_n(t).
        double t = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = 0.0;
            for (int k = 0; k < n; ++k) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * k + 1.0) * t * p1 - k * p2) / (k + 1.0);
            }
            pp = n * (t * p0 - p1) / (t * t - 1.0);
            const double dt = p0 / pp;
            t -= dt;
            if (std::abs(dt) < 1e-15)
                break;
        }
        x[i] = -t;
        x[n - 1 - i] = t;
        w[i] = w[n - 1 - i] = 2.0 / ((1.0 - t * t) * pp * pp);
    }
}

// Product quadrature for dμ = dp dq / 2πℏ over a disk of radius
// radius_sigmas·√ℏ: Gauss–Legendre radially (with the r dr Jacobian folded
// into the weights), uniform angles, and an area-preserving anisotropic
// scaling (p by √Ω, q by 1/√Ω) matching the fiducial's covariance.
inline PhaseSpaceQuadrature default_quadrature(const GlobalConfig& cfg,
                                               const FiducialSpec& fid,
                                               double radius_sigmas,
                                               int nodes_radial = 120,
                                               int nodes_angular = 120) {
    cfg.validate();
    fid.validate();
    if (!(radius_sigmas >= 6.0))
        throw InvalidParameter("default_quadrature: radius_sigmas must be >= 6");
    if (nodes_radial < 2 || nodes_angular < 4)
        throw InvalidParameter("default_quadrature: too few nodes");

    const double radius = radius_sigmas * std::sqrt(cfg.hbar);
    std::vector<double> gx, gw;
    gauss_legendre(nodes_radial, gx, gw);

    PhaseSpaceQuadrature quad;
    quad.scheme = "disk-gl";
    quad.radius = radius;
    quad.nodes_radial = nodes_radial;
    quad.nodes_angular = nodes_angular;
    quad.hbar = cfg.hbar;
    quad.omega = fid.omega;
    quad.nodes.reserve(static_cast<std::size_t>(nodes_radial) * nodes_angular);

    const double sq_om = std::sqrt(fid.omega);
    const double dphi = 2.0 * std::numbers::pi / nodes_angular;
    for (int ir = 0; ir < nodes_radial; ++ir) {
        const double r = 0.5 * radius * (gx[ir] + 1.0);
        const double wr = gw[ir] * 0.5 * radius * r; // r dr Jacobian
        for (int ia = 0; ia < nodes_angular; ++ia) {
            const double phi = dphi * ia;
            quad.nodes.push_back({sq_om * r * std::cos(phi),
                                  r * std::sin(phi) / sq_om,
                                  wr * dphi / (2.0 * std::numbers::pi * cfg.hbar)});
        }
    }
    return quad;
}

// Self-calibration: ∫ dμ e^{−(Ω⁻¹p² + Ωq²)/2ℏ} = 1 exactly; returns the
// quadrature's deviation from 1.
inline double quadrature_self_test(const PhaseSpaceQuadrature& quad,
                                   const GlobalConfig& cfg, const FiducialSpec& fid) {
    double acc = 0.0;
    for (const auto& n : quad.nodes)
        acc += n.w * std::exp(-(n.p * n.p / fid.omega + fid.omega * n.q * n.q) /
                              (2.0 * cfg.hbar));
    return acc - 1.0;
}

// Max interior-block entry of |Σ_k w_k |p_k,q_k⟩⟨p_k,q_k| − I|. Node states
// are built by the same spectral Weyl factorization as coherent_state; the
// per-state tail precondition is deliberately not applied here — a full-disk
// grid always contains far nodes, and their collective effect is exactly
// what this defect measures.
inline double resolution_of_unity_defect(const PhaseSpaceQuadrature& quad,
                                         const FiducialSpec& fid,
                                         const GlobalConfig& cfg) {
    if (quad.radius_sigmas() < 8.0)
        throw InvalidParameter("resolution_of_unity_defect: quadrature must cover >= 8 sigma");
    const WeylOps ops(cfg, fid);
    const int m = cfg.interior_dim();
    CMatrix acc = CMatrix::Zero(m, m);
    for (const auto& n : quad.nodes) {
        const CVector s = ops.displace(n.p, n.q);
        acc.noalias() += n.w * (s.head(m) * s.head(m).adjoint());
    }
    acc -= CMatrix::Identity(m, m);
    return acc.cwiseAbs().maxCoeff();
}

// Upper symbol H(p,q) = ⟨p,q|H|p,q⟩ (real for Hermitian H up to rounding).
inline double upper_symbol(const FockOperator& h, const PhaseSpacePoint& pt,
                           const FiducialSpec& fid, const GlobalConfig& cfg,
                           const WeylOps* cache = nullptr) {
    require_hermitian(h.entries, cfg, "upper_symbol");
    const CoherentState st = coherent_state(pt, fid, 0.0, cfg, cache);
    const Complex v = st.vec.coeffs.dot(h.entries * st.vec.coeffs);
    return std::real(v);
}

// Defect of the reproducing-kernel chain rule
//   𝒦(b;a) = ∫ 𝒦(b;x) 𝒦(x;a) dμ(x),
// evaluated with the closed-form kernel on the quadrature.
inline double kernel_chain_defect(const PhaseSpacePoint& b, const PhaseSpacePoint& a,
                                  const PhaseSpaceQuadrature& quad,
                                  const FiducialSpec& fid, const GlobalConfig& cfg) {
    Complex acc = 0.0;
    for (const auto& n : quad.nodes)
        acc += n.w * overlap_kernel(cfg, fid, b.c1, b.c2, n.p, n.q) *
               overlap_kernel(cfg, fid, n.p, n.q, a.c1, a.c2);
    const Complex direct = overlap_kernel(cfg, fid, b.c1, b.c2, a.c1, a.c2);
    return std::abs(direct - acc);
}

} // namespace metriq
