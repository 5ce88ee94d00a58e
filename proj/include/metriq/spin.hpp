// Spherical phase space: SU(2) generators, spin coherent states by rotation
// of the highest-weight vector, their resolution of unity with the measure
// (2s+1)/4π · sinθ dθ dφ, and the induced round metric ℏ²s(dθ² + sin²θ dφ²).
// The metric normalization is pinned by the s = ½ closed form (two-component
// states computable by hand), then asserted for higher s in the tests.
#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "metriq/coherent.hpp" // gauss_legendre
#include "metriq/errors.hpp"
#include "metriq/fock.hpp"

namespace metriq {

struct SpinSpec {
    double s = 0.5;     // half-integer spin
    double hbar = 1.0;

    void validate() const {
        const double two_s = 2.0 * s;
        if (!(s > 0.0) || std::abs(two_s - std::round(two_s)) > 1e-12)
            throw InvalidSpin("spin s must be a positive half-integer, got " +
                              std::to_string(s));
        if (!(hbar > 0.0)) throw InvalidSpin("hbar must be positive");
    }
    int dim() const { return static_cast<int>(std::lround(2.0 * s)) + 1; }
};

struct SpinOperator {
    CMatrix entries;
    int axis = 3; // 1, 2, or 3
};

struct SpinTriple {
    SpinOperator s1, s2, s3;
};

// Standard spin matrices in the descending-m basis (k = 0 ↔ m = s).
inline SpinTriple build_spin(const SpinSpec& spec) {
    spec.validate();
    const int d = spec.dim();
    const double s = spec.s, hbar = spec.hbar;
    CMatrix s3 = CMatrix::Zero(d, d), sp = CMatrix::Zero(d, d);
    for (int k = 0; k < d; ++k) {
        const double m = s - k;
        s3(k, k) = hbar * m;
        if (k >= 1) // ⟨m+1|S₊|m⟩ = ℏ√(s(s+1) − m(m+1))
            sp(k - 1, k) = hbar * std::sqrt(s * (s + 1) - m * (m + 1));
    }
    const CMatrix sm = sp.adjoint();
    SpinTriple out;
    out.s1 = {0.5 * (sp + sm), 1};
    out.s2 = {Complex(0.0, -0.5) * (sp - sm), 2};
    out.s3 = {s3, 3};
    return out;
}

// max entry of |ΣS_j² − s(s+1)ℏ²·I|.
inline double spin_casimir_defect(const SpinSpec& spec) {
    const SpinTriple t = build_spin(spec);
    const int d = spec.dim();
    CMatrix c = t.s1.entries * t.s1.entries + t.s2.entries * t.s2.entries +
                t.s3.entries * t.s3.entries;
    c -= spec.s * (spec.s + 1.0) * spec.hbar * spec.hbar * CMatrix::Identity(d, d);
    return c.cwiseAbs().maxCoeff();
}

// Cached eigensystem of S₂ so states at many (θ,φ) cost one matvec each:
// |θ,φ⟩ = e^{−iφS₃/ℏ} e^{−iθS₂/ℏ} |s,s⟩.
class SpinRotator {
  public:
    explicit SpinRotator(const SpinSpec& spec) : spec_(spec) {
        spec.validate();
        const SpinTriple t = build_spin(spec);
        Eigen::SelfAdjointEigenSolver<CMatrix> es(t.s2.entries / spec.hbar);
        lam2_ = es.eigenvalues();
        v2_ = es.eigenvectors();
        CVector e0 = CVector::Zero(spec.dim());
        e0(0) = 1.0; // highest weight |s,s⟩ in the descending-m basis
        w0_ = v2_.adjoint() * e0;
    }

    CVector state(double theta, double phi) const {
        const int d = spec_.dim();
        CVector tmp(d);
        for (int k = 0; k < d; ++k)
            tmp(k) = std::exp(Complex(0.0, -theta * lam2_(k))) * w0_(k);
        CVector v = v2_ * tmp;
        for (int k = 0; k < d; ++k)
            v(k) *= std::exp(Complex(0.0, -phi * (spec_.s - k)));
        return v;
    }

    const SpinSpec& spec() const { return spec_; }

  private:
    SpinSpec spec_;
    Eigen::VectorXd lam2_;
    CMatrix v2_;
    CVector w0_;
};

inline void validate_spin_angles(double theta, double phi) {
    if (!(theta >= 0.0) || !(theta <= M_PI))
        throw InvalidParameter("spin_coherent: theta must lie in [0, pi]");
    if (!(phi > -M_PI - 1e-12) || !(phi <= M_PI + 1e-12))
        throw InvalidParameter("spin_coherent: phi must lie in (-pi, pi]");
}

inline FockVector spin_coherent(double theta, double phi, const SpinSpec& spec,
                                const SpinRotator* cache = nullptr) {
    validate_spin_angles(theta, phi);
    FockVector v;
    v.dim = spec.dim();
    v.coeffs = cache ? cache->state(theta, phi) : SpinRotator(spec).state(theta, phi);
    return v;
}

inline Complex spin_overlap(const FockVector& a, const FockVector& b) {
    if (a.dim != b.dim) throw InvalidParameter("spin_overlap: dimension mismatch");
    return a.coeffs.dot(b.coeffs);
}

inline double spin_expectation(const SpinOperator& op, const FockVector& v) {
    return std::real(v.coeffs.dot(op.entries * v.coeffs));
}

// max entry of |(2s+1)/(4π)·ΣΣ w_θ w_φ |θφ⟩⟨θφ| − I| with Gauss–Legendre in
// cosθ and the uniform (trapezoid) rule in φ. The integrand is a polynomial
// of degree ≤ 2s in cosθ and a trigonometric polynomial of degree ≤ 2s in φ,
// so quadrature with n_theta > s and n_phi > 2s nodes is exact. The optional
// φ offset exercises rotation covariance: offsets that are multiples of the
// node spacing relabel the same configuration.
inline double spin_resolution_defect(const SpinSpec& spec, int n_theta, int n_phi,
                                     double phi_offset = 0.0) {
    spec.validate();
    if (n_theta < 1 || n_phi < 1)
        throw InvalidParameter("spin_resolution_defect: need at least one node per axis");
    std::vector<double> x(n_theta), w(n_theta);
    gauss_legendre(n_theta, x, w); // nodes/weights on (−1, 1)
    const SpinRotator rot(spec);
    const int d = spec.dim();
    CMatrix acc = CMatrix::Zero(d, d);
    for (int i = 0; i < n_theta; ++i) {
        const double theta = std::acos(x[i]);
        for (int j = 0; j < n_phi; ++j) {
            double phi = -M_PI + 2.0 * M_PI * (j + 0.5) / n_phi + phi_offset;
            if (phi > M_PI) phi -= 2.0 * M_PI;
            const CVector v = rot.state(theta, phi);
            acc.noalias() += (w[i] * 2.0 * M_PI / n_phi) * (v * v.adjoint());
        }
    }
    acc *= (2.0 * spec.s + 1.0) / (4.0 * M_PI);
    acc -= CMatrix::Identity(d, d);
    return acc.cwiseAbs().maxCoeff();
}

// dσ² = 2ℏ²[‖dψ‖² − |⟨ψ|dψ⟩|²] in (θ,φ) by central differences; expected
// ℏ²s·diag(1, sin²θ). Pole neighborhoods are excluded (the φ coordinate
// degenerates there) rather than re-charted.
inline Eigen::Matrix2d spin_induced_metric(double theta, double phi, const SpinSpec& spec,
                                           const SpinRotator* cache = nullptr,
                                           double step = 0.0) {
    if (!(theta >= 0.1) || !(theta <= M_PI - 0.1))
        throw PoleProximity("spin_induced_metric: theta " + std::to_string(theta) +
                            " within the pole exclusion zone [0.1, pi-0.1]");
    std::optional<SpinRotator> local;
    if (!cache) local.emplace(spec);
    const SpinRotator& rot = cache ? *cache : *local;
    const double h = step > 0.0
                         ? step
                         : std::sqrt(std::numeric_limits<double>::epsilon());
    const CVector psi = rot.state(theta, phi);
    const CVector dth = (rot.state(theta + h, phi) - rot.state(theta - h, phi)) / (2 * h);
    const CVector dph = (rot.state(theta, phi + h) - rot.state(theta, phi - h)) / (2 * h);
    const Complex pt = psi.dot(dth), pp = psi.dot(dph);
    const double c = 2.0 * spec.hbar * spec.hbar;
    Eigen::Matrix2d g;
    g(0, 0) = c * (std::real(dth.dot(dth)) - std::norm(pt));
    g(1, 1) = c * (std::real(dph.dot(dph)) - std::norm(pp));
    g(0, 1) = g(1, 0) = c * (std::real(dth.dot(dph)) - std::real(std::conj(pt) * pp));
    return g;
}

} // namespace metriq
