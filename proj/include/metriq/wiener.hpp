// Wiener-measure regularization of the coherent-state path integral:
//
//   K(b,a;T) = lim_{ν→∞} 2πℏ e^{νT/(2ℏ)} ∫ exp{(i/ℏ)∫[p dq + dG − h dt]} dμ_W^ν
//
// with dμ_W^ν the two-dimensional pinned (unnormalized) Wiener measure of
// diffusion constant ν on phase-space paths from a to b. The implementation
// factors the unnormalized pinned measure as (free endpoint transition
// density ρ_pin) × (normalized Brownian-bridge expectation) and estimates the
// bridge expectation by Monte Carlo with antithetic pairs, batch-mean error
// bars, and a counter-based RNG so results are independent of thread count.
//
// The Stratonovich sum Σ ½(p_{l+1}+p_l)(q_{l+1}−q_l) is evaluated on the same
// grid as the bridge; ∫h dt uses the trapezoid rule. The growth factor is
// e^{νT/(2ℏ)}: it exactly offsets the leading decay of the pinned phase
// integral (see wiener_free_kernel_finite_nu), so the h = 0 estimate tends to
// the reproducing kernel as ν → ∞ with residual bias e^{−νT/ℏ}.
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <future>
#include <limits>
#include <string>
#include <vector>

#include <json.hpp>

#include "metriq/chart.hpp"
#include "metriq/coherent.hpp"
#include "metriq/config.hpp"
#include "metriq/errors.hpp"
#include "metriq/fock.hpp"
#include "metriq/observable.hpp"
#include "metriq/propagator.hpp"
#include "metriq/rng.hpp"

namespace metriq {

struct WienerConfig {
    double nu = 8.0;                // diffusion constant
    int n_steps = 256;              // bridge time steps
    long long n_samples = 100000;   // Monte Carlo paths (rounded up to full pairs)
    std::uint64_t seed = 0;
    bool antithetic = true;
    int n_batches = 20;             // error bars from batch means
    int threads = 1;

    void validate() const {
        if (!(nu > 0.0) || !std::isfinite(nu))
            throw InvalidParameter("WienerConfig: nu must be positive and finite");
        if (n_steps < 16) throw InvalidParameter("WienerConfig: n_steps must be >= 16");
        if (n_samples < 100) throw InvalidParameter("WienerConfig: n_samples must be >= 100");
        if (n_batches < 2) throw InvalidParameter("WienerConfig: n_batches must be >= 2");
        if (threads < 1) throw InvalidParameter("WienerConfig: threads must be >= 1");
        const long long units = antithetic ? (n_samples + 1) / 2 : n_samples;
        if (units < n_batches)
            throw InvalidParameter("WienerConfig: fewer samples than batches");
    }
};

struct BrownianBridgePath {
    std::vector<double> times;  // 0 = t_0 < ... < t_n = T
    std::vector<double> p_path; // pinned: p_path.front() = p_a, p_path.back() = p_b
    std::vector<double> q_path;
};

// One pinned path, deterministic in (wcfg.seed, sample_index). The standard
// bridge construction: free Brownian increments, minus the linear correction
// that enforces the endpoint; the final point is then assigned exactly.
inline BrownianBridgePath sample_bridge(const PhaseSpacePoint& a, const PhaseSpacePoint& b,
                                        double T, const WienerConfig& wcfg,
                                        std::uint64_t sample_index, bool negate = false) {
    wcfg.validate();
    if (!(T > 0.0) || !std::isfinite(T))
        throw InvalidParameter("sample_bridge: T must be positive and finite");
    if (a.chart_id != b.chart_id)
        throw ChartMismatch("sample_bridge: endpoints labeled in different charts");
    const int n = wcfg.n_steps;
    const double dt = T / n;
    const double sig = std::sqrt(wcfg.nu * dt);
    const double sgn = negate ? -1.0 : 1.0;

    GaussianStream g(wcfg.seed, sample_index);
    std::vector<double> wp(n + 1, 0.0), wq(n + 1, 0.0);
    for (int l = 0; l < n; ++l) {
        wp[l + 1] = wp[l] + sgn * sig * g.next();
        wq[l + 1] = wq[l] + sgn * sig * g.next();
    }
    BrownianBridgePath path;
    path.times.resize(n + 1);
    path.p_path.resize(n + 1);
    path.q_path.resize(n + 1);
    const double dp = b.c1 - a.c1, dq = b.c2 - a.c2;
    for (int i = 0; i <= n; ++i) {
        const double r = static_cast<double>(i) / n;
        path.times[i] = r * T;
        path.p_path[i] = a.c1 + wp[i] - r * (wp[n] - dp);
        path.q_path[i] = a.c2 + wq[i] - r * (wq[n] - dq);
    }
    path.p_path[n] = b.c1; // exact pinning, no rounding residue
    path.q_path[n] = b.c2;
    return path;
}

namespace detail {

struct WienerProblem {
    double pa, qa, pb, qb;
    double T, hbar;
    const ClassicalObservable* h;
};

// Payoff sum over one antithetic unit (a ± increment pair, or a single path
// when antithetic is off): Σ exp{(i/ℏ)(S_strat − ∫h dt)}.
inline Complex wiener_unit_sum(const WienerProblem& prob, const WienerConfig& wcfg,
                               std::uint64_t stream_index, std::vector<double>& dwp,
                               std::vector<double>& dwq) {
    const int n = wcfg.n_steps;
    const double dt = prob.T / n;
    const double sig = std::sqrt(wcfg.nu * dt);
    GaussianStream g(wcfg.seed, stream_index);
    double wpT = 0.0, wqT = 0.0;
    for (int l = 0; l < n; ++l) {
        dwp[l] = sig * g.next();
        dwq[l] = sig * g.next();
        wpT += dwp[l];
        wqT += dwq[l];
    }
    const double dp = prob.pb - prob.pa, dq = prob.qb - prob.qa;

    auto payoff = [&](double sgn) {
        double wp = 0.0, wq = 0.0;
        double p_prev = prob.pa, q_prev = prob.qa;
        double action = 0.0;
        double h_int = 0.5 * prob.h->value_at(prob.pa, prob.qa);
        for (int i = 1; i <= n; ++i) {
            wp += dwp[i - 1];
            wq += dwq[i - 1];
            double p, q;
            if (i == n) {
                p = prob.pb;
                q = prob.qb;
            } else {
                const double r = static_cast<double>(i) / n;
                p = prob.pa + sgn * wp - r * (sgn * wpT - dp);
                q = prob.qa + sgn * wq - r * (sgn * wqT - dq);
            }
            action += 0.5 * (p + p_prev) * (q - q_prev);
            h_int += (i == n ? 0.5 : 1.0) * prob.h->value_at(p, q);
            p_prev = p;
            q_prev = q;
        }
        h_int *= dt;
        return std::exp(Complex(0.0, (action - h_int) / prob.hbar));
    };

    Complex out = payoff(1.0);
    if (wcfg.antithetic) out += payoff(-1.0);
    return out;
}

} // namespace detail

// Monte Carlo estimate of 2πℏ e^{νT/(2ℏ)} ρ_pin E_bridge[e^{(i/ℏ)(S−∫h dt)}]
// times the constant gauge phase e^{(i/ℏ)[G(b)−G(a)]} when a chart with a
// gauge is given. Default (no chart) is the Cartesian chart with G ≡ 0; the
// rotated chart is admitted because a rotation is an isometry of the flat
// sampling metric, so the bridge law needs no correction.
inline PropagatorEstimate wiener_propagator(const ClassicalObservable& h,
                                            const PhaseSpacePoint& a,
                                            const PhaseSpacePoint& b, double T,
                                            const WienerConfig& wcfg,
                                            const PhaseSpaceQuadrature& /*quad*/,
                                            const FiducialSpec& fid,
                                            const GlobalConfig& cfg,
                                            const Chart* chart = nullptr) {
    wcfg.validate();
    cfg.validate();
    fid.validate();
    if (!(T > 0.0) || !std::isfinite(T))
        throw InvalidParameter("wiener_propagator: T must be positive and finite");
    if (fid.omega != 1.0)
        throw InvalidParameter(
            "wiener_propagator: the flat Cartesian Wiener measure matches the omega=1 "
            "fiducial only");
    // Oscillatory-variance budget: e^{νT/(2ℏ)} inflates the noise of the unit-
    // modulus payoff exponentially, so desk-scale runs are capped here.
    if (wcfg.nu * cfg.hbar > 16.0 + 1e-12 || T > 1.0 + 1e-12)
        throw VarianceBlowup(
            "wiener_propagator: outside the variance budget nu <= 16/hbar, T <= 1");

    const std::string expected = chart ? chart->id : "cartesian";
    if (chart && expected != "cartesian" && expected != "rotated_45")
        throw UnsupportedChart(
            "wiener_propagator: Brownian sampling is only chart-covariant under "
            "isometries; chart '" + expected + "' is not supported");
    if (h.chart_id != expected)
        throw ChartMismatch("wiener_propagator: observable labeled '" + h.chart_id +
                            "', expected '" + expected + "'");
    if (a.chart_id != expected || b.chart_id != expected)
        throw ChartMismatch("wiener_propagator: endpoints must be labeled '" + expected + "'");
    double gauge_delta = 0.0;
    if (chart) {
        chart->validate_point(a.c1, a.c2);
        chart->validate_point(b.c1, b.c2);
        if (chart->gauge)
            gauge_delta = chart->gauge(b.c1, b.c2) - chart->gauge(a.c1, a.c2);
    }

    detail::WienerProblem prob{a.c1, a.c2, b.c1, b.c2, T, cfg.hbar, &h};

    const double d2 = (b.c1 - a.c1) * (b.c1 - a.c1) + (b.c2 - a.c2) * (b.c2 - a.c2);
    const double rho_pin = std::exp(-d2 / (2.0 * wcfg.nu * T)) / (2.0 * M_PI * wcfg.nu * T);
    const Complex pref = 2.0 * M_PI * cfg.hbar * std::exp(wcfg.nu * T / (2.0 * cfg.hbar)) *
                         rho_pin * std::exp(Complex(0.0, gauge_delta / cfg.hbar));

    // Batch layout: antithetic units (pairs) are never split across batches,
    // so batches stay independent; counts differ by at most one unit.
    const std::uint64_t units =
        wcfg.antithetic ? static_cast<std::uint64_t>((wcfg.n_samples + 1) / 2)
                        : static_cast<std::uint64_t>(wcfg.n_samples);
    const int B = wcfg.n_batches;
    const std::uint64_t base = units / B, rem = units % B;
    const int draws_per_unit = wcfg.antithetic ? 2 : 1;

    std::vector<Complex> means(B);
    const int nthreads = std::min<int>(wcfg.threads, B);
    auto work = [&](int w) {
        std::vector<double> dwp(wcfg.n_steps), dwq(wcfg.n_steps);
        for (int m = w; m < B; m += nthreads) {
            const std::uint64_t count = base + (static_cast<std::uint64_t>(m) < rem ? 1 : 0);
            const std::uint64_t start =
                static_cast<std::uint64_t>(m) * base +
                std::min<std::uint64_t>(static_cast<std::uint64_t>(m), rem);
            Complex acc{0.0, 0.0};
            for (std::uint64_t u = 0; u < count; ++u)
                acc += detail::wiener_unit_sum(prob, wcfg, start + u, dwp, dwq);
            means[m] = pref * acc / static_cast<double>(count * draws_per_unit);
        }
    };
    if (nthreads == 1) {
        work(0);
    } else {
        std::vector<std::future<void>> futs;
        futs.reserve(nthreads);
        for (int w = 0; w < nthreads; ++w)
            futs.push_back(std::async(std::launch::async, work, w));
        for (auto& f : futs) f.get(); // rethrows worker exceptions
    }

    Complex mu{0.0, 0.0};
    for (const auto& m : means) mu += m;
    mu /= static_cast<double>(B);
    double var_re = 0.0, var_im = 0.0;
    for (const auto& m : means) {
        var_re += (m.real() - mu.real()) * (m.real() - mu.real());
        var_im += (m.imag() - mu.imag()) * (m.imag() - mu.imag());
    }
    var_re /= (B - 1);
    var_im /= (B - 1);

    PropagatorEstimate est;
    est.value = mu;
    est.stderr_ = std::sqrt((var_re + var_im) / B);
    est.method = PropagatorMethod::wiener_mc;
    est.params = {{"T", T},
                  {"nu", wcfg.nu},
                  {"n_steps", wcfg.n_steps},
                  {"n_samples", units * draws_per_unit},
                  {"seed", wcfg.seed},
                  {"antithetic", wcfg.antithetic},
                  {"n_batches", B},
                  {"threads", wcfg.threads},
                  {"hbar", cfg.hbar},
                  {"chart", expected}};
    if (est.stderr_ > std::abs(est.value))
        throw VarianceBlowup("wiener_propagator: stderr/|value| = " +
                             std::to_string(est.stderr_ / std::abs(est.value)) +
                             " > 1; increase n_samples or lower nu*T");
    return est;
}

// Closed form of the h = 0 estimate at finite ν (what the Monte Carlo above
// converges to as n_steps → ∞): the two-dimensional diffusion weighted by the
// phase e^{(i/ℏ)∫p dq} is the magnetic (Landau) problem with uniform field
// 1/ℏ, and its pinned heat kernel gives, with τ = νT/(2ℏ),
//   G_ν = (1−e^{−2τ})⁻¹ · exp{−coth(τ)·[(Δp)²+(Δq)²]/(4ℏ)}
//         · exp{(i/2ℏ)(p_b+p_a)(q_b−q_a)}.
// As ν → ∞ this tends to the reproducing kernel; the finite-ν bias decays
// exponentially (like e^{−2τ}), not like 1/ν.
inline Complex wiener_free_kernel_finite_nu(double pb, double qb, double pa, double qa,
                                            double T, double nu, const GlobalConfig& cfg) {
    if (!(nu > 0.0) || !(T > 0.0))
        throw InvalidParameter("wiener_free_kernel_finite_nu: need nu > 0 and T > 0");
    const double hbar = cfg.hbar;
    const double tau = nu * T / (2.0 * hbar);
    const double d2 = (pb - pa) * (pb - pa) + (qb - qa) * (qb - qa);
    const double mag =
        std::exp(-d2 / (4.0 * hbar) / std::tanh(tau)) / (1.0 - std::exp(-2.0 * tau));
    const double phase = (pb + pa) * (qb - qa) / (2.0 * hbar);
    return mag * std::exp(Complex(0.0, phase));
}

// Two-point Richardson extrapolation in 1/ν: with the model K(ν) = K∞ + C/ν,
// K∞ = (ν₂K₂ − ν₁K₁)/(ν₂ − ν₁). Error bars are propagated linearly.
inline PropagatorEstimate wiener_richardson(const PropagatorEstimate& k1, double nu1,
                                            const PropagatorEstimate& k2, double nu2) {
    if (!(nu1 > 0.0) || !(nu2 > 0.0) || nu1 == nu2)
        throw InvalidParameter("wiener_richardson: need two distinct positive nu values");
    PropagatorEstimate est;
    est.value = (nu2 * k2.value - nu1 * k1.value) / (nu2 - nu1);
    est.stderr_ = std::sqrt(nu2 * nu2 * k2.stderr_ * k2.stderr_ +
                            nu1 * nu1 * k1.stderr_ * k1.stderr_) /
                  std::abs(nu2 - nu1);
    est.method = PropagatorMethod::wiener_mc;
    est.params = {{"richardson", true}, {"nu1", nu1}, {"nu2", nu2}};
    return est;
}

// |K̄ − K| / combined stderr between the Cartesian run and the same problem
// expressed in `chart` (points mapped, observable transported, gauge phase
// from the chart). Identity chart gives exactly 0 (same seeds, same stream).
inline double chart_covariance_check(const ClassicalObservable& h, const Chart& chart,
                                     const PhaseSpacePoint& a, const PhaseSpacePoint& b,
                                     double T, const WienerConfig& wcfg,
                                     const PhaseSpaceQuadrature& quad,
                                     const FiducialSpec& fid, const GlobalConfig& cfg) {
    if (h.chart_id != "cartesian" || a.chart_id != "cartesian" || b.chart_id != "cartesian")
        throw ChartMismatch("chart_covariance_check: reference inputs must be Cartesian");
    if (chart.id != "cartesian" && chart.id != "rotated_45")
        throw UnsupportedChart(
            "chart_covariance_check: non-isometric charts (e.g. polar) are out of scope "
            "for Brownian sampling");
    const PropagatorEstimate ref = wiener_propagator(h, a, b, T, wcfg, quad, fid, cfg);
    PropagatorEstimate alt;
    if (chart.id == "cartesian") {
        alt = wiener_propagator(h, a, b, T, wcfg, quad, fid, cfg);
    } else {
        const Chart& cart = find_chart("cartesian");
        const ClassicalObservable h_chart = transport(h, cart, chart);
        const auto am = chart.from_cartesian(a.c1, a.c2);
        const auto bm = chart.from_cartesian(b.c1, b.c2);
        const PhaseSpacePoint a2{am[0], am[1], chart.id};
        const PhaseSpacePoint b2{bm[0], bm[1], chart.id};
        alt = wiener_propagator(h_chart, a2, b2, T, wcfg, quad, fid, cfg, &chart);
    }
    const double comb =
        std::sqrt(ref.stderr_ * ref.stderr_ + alt.stderr_ * alt.stderr_);
    const double diff = std::abs(alt.value - ref.value);
    return comb > 0.0 ? diff / comb : (diff > 0.0 ? std::numeric_limits<double>::infinity()
                                                  : 0.0);
}

} // namespace metriq
