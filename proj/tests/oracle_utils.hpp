// Independent reference values for the test suites.
//
// Everything here is computed by a route that does not share code with the
// library internals it checks: closed-form kernels, recurrence-based special
// functions, brute-force sums, and a finite-difference Schrödinger solver.
// Tests compare library output against these, never the other way around.
#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "metriq/metriq.hpp"

namespace oracle {

using metriq::Complex;
using metriq::CVector;

// ----------------------------------------------------------------- coherent
// Fock coefficients of the canonical coherent state,
//   <n|p,q> = e^{-ipq/2h} e^{-|z|^2/2} z^n/sqrt(n!),  z = (Omega q + ip)/sqrt(2 Omega h).
inline CVector coherent_coefficients(int dim, double p, double q, double hbar,
                                     double omega) {
    const double s = std::sqrt(2.0 * omega * hbar);
    const Complex z(omega * q / s, p / s);
    const Complex pref =
        std::exp(Complex(-0.5 * std::norm(z), -0.5 * p * q / hbar));
    CVector c(dim);
    c(0) = pref;
    for (int n = 1; n < dim; ++n) c(n) = c(n - 1) * z / std::sqrt(double(n));
    return c;
}

// Position representation psi_{p,q}(x) = (Omega/pi h)^{1/4} e^{ip(x-q)/h} e^{-Omega(x-q)^2/2h}.
inline Complex coherent_wavefunction(double x, double p, double q, double hbar,
                                     double omega) {
    const double dx = x - q;
    return std::pow(omega / (M_PI * hbar), 0.25) *
           std::exp(Complex(-omega * dx * dx / (2.0 * hbar), p * dx / hbar));
}

// Normalized oscillator eigenfunctions phi_0..phi_nmax at x via the stable
// three-term recurrence for Hermite functions.
inline std::vector<double> oscillator_eigenfunctions(double x, int nmax, double hbar,
                                                     double omega) {
    const double xi = x * std::sqrt(omega / hbar);
    std::vector<double> phi(nmax + 1);
    phi[0] = std::pow(omega / (M_PI * hbar), 0.25) * std::exp(-0.5 * xi * xi);
    if (nmax >= 1) phi[1] = std::sqrt(2.0) * xi * phi[0];
    for (int n = 1; n < nmax; ++n)
        phi[n + 1] = xi * std::sqrt(2.0 / (n + 1)) * phi[n] -
                     std::sqrt(double(n) / (n + 1)) * phi[n - 1];
    return phi;
}

// Brute-force Poisson tail P(K > kmax) at intensity lambda.
inline double poisson_tail_bruteforce(double lambda, int kmax) {
    double term = std::exp(-lambda), cdf = term;
    for (int k = 1; k <= kmax; ++k) {
        term *= lambda / k;
        cdf += term;
    }
    return 1.0 - cdf;
}

// ---------------------------------------------------------------- kernels
inline Complex free_kernel(double qa, double qb, double T, double hbar) {
    const double d = qb - qa;
    return std::sqrt(1.0 / (2.0 * M_PI * hbar * T * Complex(0.0, 1.0))) *
           std::exp(Complex(0.0, d * d / (2.0 * hbar * T)));
}

// Oscillator kernel for H = p^2/2 + q^2/2, valid for 0 < T < pi.
inline Complex mehler_kernel(double qa, double qb, double T, double hbar) {
    const double s = std::sin(T), c = std::cos(T);
    return std::sqrt(1.0 / (2.0 * M_PI * hbar * s * Complex(0.0, 1.0))) *
           std::exp(Complex(0.0, ((qa * qa + qb * qb) * c - 2.0 * qa * qb) /
                                     (2.0 * hbar * s)));
}

// Linear-potential kernel for H = p^2/2 + g q.
inline Complex linear_potential_kernel(double qa, double qb, double T, double g,
                                       double hbar) {
    return free_kernel(qa, qb, T, hbar) *
           std::exp(Complex(0.0, -g * T * (qa + qb) / (2.0 * hbar) -
                                     g * g * T * T * T / (24.0 * hbar)));
}

// Finite-difference Schrödinger evolution for H = p^2/2 + V(q) on a uniform
// grid (5-point Laplacian, spectral decomposition), returning the smeared
// amplitude <psi_b| e^{-iHT/h} |psi_a> for wavepackets sampled on that grid.
// The raw position kernel <qb|e^{-iHT/h}|qa> is NOT grid-computable this way:
// the full spectral sum is dominated by high lattice modes whose dispersion
// is wrong, and their failed cancellation leaves O(1) noise. Smooth packets
// have negligible weight on those modes, so the smeared amplitude converges.
inline Complex fd_schrodinger_overlap(const std::function<double(double)>& V,
                                      const std::vector<Complex>& psi_a,
                                      const std::vector<Complex>& psi_b, double T,
                                      double hbar, double L) {
    const int n = static_cast<int>(psi_a.size());
    const double dx = 2.0 * L / (n - 1);
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(n, n);
    const double k2 = hbar * hbar / (dx * dx);
    for (int i = 0; i < n; ++i) {
        H(i, i) = k2 * 30.0 / 24.0 + V(-L + i * dx);
        if (i + 1 < n) H(i, i + 1) = H(i + 1, i) = -k2 * 16.0 / 24.0;
        if (i + 2 < n) H(i, i + 2) = H(i + 2, i) = k2 * 1.0 / 24.0;
    }
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
    Complex acc(0.0, 0.0);
    for (int m = 0; m < n; ++m) {
        Complex ca(0.0, 0.0), cb(0.0, 0.0);
        for (int i = 0; i < n; ++i) {
            ca += es.eigenvectors()(i, m) * psi_a[i];
            cb += es.eigenvectors()(i, m) * std::conj(psi_b[i]);
        }
        acc += cb * ca * std::exp(Complex(0.0, -es.eigenvalues()(m) * T / hbar));
    }
    return acc * dx; // two grid inner products at dx each, minus 1/dx mode norm
}

// ------------------------------------------------------------ semiclassics
// Phase-space area enclosed by h = p^2/2 + q^2/2 + q^4 at energy E, via the
// turning-point integral 4 ∫_0^{q+} sqrt(2(E - V)) dq with the square-root
// endpoint removed by q = q+ sin t.
inline double quartic_area(double E) {
    const double u = -0.25 + std::sqrt(1.0 / 16.0 + E); // q+^2
    const double qp = std::sqrt(u);
    std::vector<double> x, w;
    metriq::gauss_legendre(200, x, w);
    double area = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double t = (x[i] + 1.0) * M_PI / 4.0;
        const double q = qp * std::sin(t);
        const double integrand = std::sqrt(std::max(0.0, 2.0 * (E - 0.5 * q * q - q * q * q * q)));
        area += w[i] * (M_PI / 4.0) * integrand * qp * std::cos(t);
    }
    return 4.0 * area;
}

// Low eigenvalues of H = (P^2+Q^2)/2 + Q^4 at hbar = 1, computed once from an
// independently built 400-dimensional ladder-operator matrix and frozen here.
inline const std::vector<double>& quartic_fock_levels() {
    static const std::vector<double> e = {0.80377065, 2.73789227, 5.17929169,
                                          7.94240398, 10.96358309, 14.20313906};
    return e;
}

// ---------------------------------------------------------------- diffusion
// Closed form of the finite-diffusion pinned free propagator, written as
// 2πh e^{tau} times the planar magnetic heat kernel (field 1/h, symmetric
// gauge) with the boundary gauge phases restored. Equivalent algebraically to
// the library's expression but arranged independently.
inline Complex landau_pinned_kernel(double pb, double qb, double pa, double qa,
                                    double T, double nu, double hbar) {
    const double B = 1.0 / hbar;
    const double t = nu * T;
    const double tau = B * t / 2.0;
    const double d2 = (pb - pa) * (pb - pa) + (qb - qa) * (qb - qa);
    const double cross = pb * qa - qb * pa;
    const Complex heat = (B / (4.0 * M_PI * std::sinh(tau))) *
                         std::exp(-(B / 4.0) / std::tanh(tau) * d2) *
                         std::exp(Complex(0.0, -B * cross / 2.0));
    const Complex gauge = std::exp(Complex(0.0, (pb * qb - pa * qa) / (2.0 * hbar)));
    return 2.0 * M_PI * hbar * std::exp(tau) * gauge * heat;
}

// --------------------------------------------------------------------- spin
inline Eigen::Vector2cd spin_half_state(double theta, double phi) {
    Eigen::Vector2cd v;
    v(0) = std::cos(theta / 2.0) * std::exp(Complex(0.0, -phi / 2.0));
    v(1) = std::sin(theta / 2.0) * std::exp(Complex(0.0, phi / 2.0));
    return v;
}

// <theta_b phi_b | theta_a phi_a> = [cos cos e^{-i dphi/2} + sin sin e^{i dphi/2}]^{2s},
// dphi = phi_a - phi_b.
inline Complex spin_overlap_closed_form(double s, double theta_b, double phi_b,
                                        double theta_a, double phi_a) {
    const double dphi = phi_a - phi_b;
    const Complex base =
        std::cos(theta_b / 2.0) * std::cos(theta_a / 2.0) * std::exp(Complex(0.0, -dphi / 2.0)) +
        std::sin(theta_b / 2.0) * std::sin(theta_a / 2.0) * std::exp(Complex(0.0, dphi / 2.0));
    return std::pow(base, 2.0 * s);
}

} // namespace oracle
