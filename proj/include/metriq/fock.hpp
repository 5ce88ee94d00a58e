// Truncated Fock-space linear algebra: ladder operators, the quadratures
// P and Q, Hermitian diagonalization, and unitary matrix exponentials.
//
// Everything downstream (coherent states, Toeplitz operators, propagators)
// reduces to dense Hermitian algebra in this basis, so this module also
// fixes the numerical conventions: matrix exponentials go through the
// spectral decomposition (the same factorization that serves spectra and
// error analysis), and Hermiticity is asserted, not assumed.
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "metriq/config.hpp"
#include "metriq/errors.hpp"

namespace metriq {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

struct FockOperator {
    int dim = 0;
    CMatrix entries;
    std::string label;
};

struct FockVector {
    int dim = 0;
    CVector coeffs;
};

inline double hermiticity_defect(const CMatrix& m) {
    return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

inline void require_hermitian(const CMatrix& m, const GlobalConfig& cfg,
                              const std::string& who) {
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    if (hermiticity_defect(m) > cfg.tol_linalg * scale)
        throw NotHermitian(who + ": operator is not Hermitian (defect " +
                           std::to_string(hermiticity_defect(m)) + ")");
}

// Kinematical package for one (N, ℏ, Ω): the quadratures and the fiducial
// vector they annihilate, Q = √(ℏ/2Ω)(a+a†), P = −i√(Ωℏ/2)(a−a†), with
// (ΩQ + iP)|η⟩ = 0 and |η⟩ the first basis vector.
struct Kinematics {
    FockOperator P, Q;
    FockVector eta;
    double omega = 1.0;
    GlobalConfig cfg;
};

inline CMatrix lowering_operator(int dim) {
    CMatrix a = CMatrix::Zero(dim, dim);
    for (int n = 1; n < dim; ++n)
        a(n - 1, n) = std::sqrt(static_cast<double>(n));
    return a;
}

inline Kinematics build_kinematics(const GlobalConfig& cfg, double omega) {
    cfg.validate();
    if (!(omega > 0.0) || !std::isfinite(omega))
        throw InvalidParameter("build_kinematics: omega must be positive");
    const int n = cfg.fock_dim;
    const CMatrix a = lowering_operator(n);
    const CMatrix ad = a.adjoint();

    Kinematics kin;
    kin.cfg = cfg;
    kin.omega = omega;
    kin.Q = {n, std::sqrt(cfg.hbar / (2.0 * omega)) * (a + ad), "Q"};
    kin.P = {n, Complex(0, -1) * std::sqrt(omega * cfg.hbar / 2.0) * (a - ad), "P"};
    kin.eta.dim = n;
    kin.eta.coeffs = CVector::Zero(n);
    kin.eta.coeffs(0) = 1.0;
    return kin;
}

// Interior-block commutator defect max|[Q,P] − iℏ| over the leading
// ⌈tail_fraction·N⌉ block; the full-matrix defect is confined to the last
// row/column band and is pure truncation noise.
inline double commutator_block_defect(const Kinematics& kin) {
    const int m = kin.cfg.interior_dim();
    CMatrix comm = kin.Q.entries * kin.P.entries - kin.P.entries * kin.Q.entries;
    comm -= Complex(0, kin.cfg.hbar) * CMatrix::Identity(kin.Q.dim, kin.Q.dim);
    return comm.topLeftCorner(m, m).cwiseAbs().maxCoeff();
}

inline double fiducial_condition_defect(const Kinematics& kin) {
    const CVector r = (kin.omega * kin.Q.entries +
                       Complex(0, 1) * kin.P.entries) * kin.eta.coeffs;
    return r.norm();
}

// U = exp(−iHt/ℏ) via the Hermitian spectral decomposition.
inline FockOperator expm_unitary(const FockOperator& h, double t,
                                 const GlobalConfig& cfg) {
    require_hermitian(h.entries, cfg, "expm_unitary");
    Eigen::SelfAdjointEigenSolver<CMatrix> es(h.entries);
    const Eigen::VectorXd& lam = es.eigenvalues();
    CVector phases(h.dim);
    for (int k = 0; k < h.dim; ++k)
        phases(k) = std::exp(Complex(0, -lam(k) * t / cfg.hbar));
    FockOperator u;
    u.dim = h.dim;
    u.entries = es.eigenvectors() * phases.asDiagonal() *
                es.eigenvectors().adjoint();
    u.label = "exp(-i*" + (h.label.empty() ? std::string("H") : h.label) + "*t/hbar)";
    return u;
}

// k lowest eigenvalues, ascending. Truncation convergence (stability under
// N → 2N) is a property of the *construction* of H, so it is reported where
// the construction lives (tests, CLI `spectrum`), not here.
inline std::vector<double> spectrum(const FockOperator& h, int k,
                                    const GlobalConfig& cfg) {
    if (k < 1 || k > h.dim)
        throw InvalidParameter("spectrum: need 1 <= k <= dim");
    require_hermitian(h.entries, cfg, "spectrum");
    Eigen::SelfAdjointEigenSolver<CMatrix> es(h.entries, Eigen::EigenvaluesOnly);
    std::vector<double> out(k);
    for (int i = 0; i < k; ++i)
        out[i] = es.eigenvalues()(i);
    return out;
}

// Second moments of the fiducial: ⟨(ΔQ)²⟩, ⟨(ΔP)²⟩, ⟨ΔPΔQ+ΔQΔP⟩. For the
// Ω-fiducial these are ℏ/2Ω, ℏΩ/2, 0 — computed from the matrices, not
// asserted, so they can serve as an oracle for the phase-space metric.
struct FiducialMoments {
    double var_q = 0.0;
    double var_p = 0.0;
    double cross = 0.0;
};

inline FiducialMoments fiducial_moments(const Kinematics& kin) {
    const CVector& e = kin.eta.coeffs;
    const CMatrix& q = kin.Q.entries;
    const CMatrix& p = kin.P.entries;
    const Complex mq = e.dot(q * e), mp = e.dot(p * e);
    FiducialMoments m;
    m.var_q = std::real(e.dot(q * (q * e))) - std::norm(mq);
    m.var_p = std::real(e.dot(p * (p * e))) - std::norm(mp);
    m.cross = std::real(e.dot(p * (q * e)) + e.dot(q * (p * e))) -
              2.0 * std::real(mq) * std::real(mp);
    return m;
}

// Tail mass Σ_{n≥m} |c_n|² of a Fock vector beyond the leading m entries.
inline double fock_tail_mass(const FockVector& v, int m) {
    if (m >= v.dim)
        return 0.0;
    return v.coeffs.tail(v.dim - m).squaredNorm();
}

} // namespace metriq
