#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "metriq/metriq.hpp"
#include "oracle_utils.hpp"

using namespace metriq;

namespace {
GlobalConfig cfg_with(double hbar, int dim) {
    GlobalConfig c;
    c.hbar = hbar;
    c.fock_dim = dim;
    c.validate();
    return c;
}
FiducialSpec fid_with(double omega) {
    FiducialSpec f;
    f.omega = omega;
    f.validate();
    return f;
}
} // namespace

TEST_CASE("poisson tail helper matches a brute-force sum") {
    for (const double lambda : {0.3, 2.0, 9.0})
        for (const int m : {1, 8, 24})
            CHECK(poisson_tail(lambda, m) ==
                  Catch::Approx(oracle::poisson_tail_bruteforce(lambda, m - 1)).margin(1e-13));
}

TEST_CASE("coherent-state Fock coefficients match the closed form") {
    for (const double hbar : {0.5, 1.0}) {
        for (const double omega : {0.5, 1.0, 4.0}) {
            const GlobalConfig cfg = cfg_with(hbar, 64);
            const FiducialSpec fid = fid_with(omega);
            const WeylOps ops(cfg, fid);
            for (const auto& [p, q] : {std::pair{0.7, -0.4}, {1.2, 0.9}, {0.0, 1.0}}) {
                const CVector got = ops.displace(p, q);
                const CVector want =
                    oracle::coherent_coefficients(64, p, q, hbar, omega);
                CHECK((got - want).cwiseAbs().maxCoeff() < 1e-11);
            }
        }
    }
}

TEST_CASE("coherent states are normalized") {
    const GlobalConfig cfg = cfg_with(1.0, 64);
    const FiducialSpec fid = fid_with(1.0);
    const WeylOps ops(cfg, fid);
    for (const auto& [p, q] : {std::pair{0.0, 0.0}, {2.0, -1.5}, {-3.0, 0.5}})
        CHECK(std::abs(ops.displace(p, q).norm() - 1.0) < 1e-13);
}

TEST_CASE("numeric overlap equals the closed-form kernel") {
    for (const double hbar : {0.5, 1.0, 2.0}) {
        const GlobalConfig cfg = cfg_with(hbar, 64);
        const FiducialSpec fid = fid_with(1.0);
        const WeylOps ops(cfg, fid);
        std::mt19937_64 gen(1234);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        const double r = 3.0 * std::sqrt(hbar);
        double worst = 0.0;
        for (int k = 0; k < 60; ++k) {
            const double pa = r * u(gen), qa = r * u(gen);
            const double pb = r * u(gen), qb = r * u(gen);
            const Complex num = ops.displace(pb, qb).dot(ops.displace(pa, qa));
            const Complex cf = overlap_kernel(cfg, fid, pb, qb, pa, qa);
            worst = std::max(worst, std::abs(num - cf));
        }
        CHECK(worst < 1e-9);
    }
}

TEST_CASE("kernel with an anisotropic fiducial") {
    const GlobalConfig cfg = cfg_with(1.0, 64);
    const FiducialSpec fid = fid_with(4.0);
    const WeylOps ops(cfg, fid);
    std::mt19937_64 gen(99);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    double worst = 0.0;
    for (int k = 0; k < 40; ++k) {
        const double pa = 2.0 * u(gen), qa = u(gen);
        const double pb = 2.0 * u(gen), qb = u(gen);
        const Complex num = ops.displace(pb, qb).dot(ops.displace(pa, qa));
        worst = std::max(worst, std::abs(num - overlap_kernel(cfg, fid, pb, qb, pa, qa)));
    }
    CHECK(worst < 1e-9);
}

TEST_CASE("gauge values ride along as pure phases") {
    const GlobalConfig cfg = cfg_with(1.0, 64);
    const FiducialSpec fid = fid_with(1.0);
    const WeylOps ops(cfg, fid);
    const double p = 0.8, q = -0.3, g = 0.42;
    const CVector plain = ops.displace(p, q);
    const CVector gauged = ops.displace(p, q, g);
    // |psi_G> = e^{-iG/h} |psi>, so the kernel picks up e^{+iG_bra/h} e^{-iG_ket/h}.
    CHECK((gauged - std::exp(Complex(0.0, -g / cfg.hbar)) * plain).cwiseAbs().maxCoeff() <
          1e-13);

    const CoherentState a = coherent_state({p, q, "cartesian"}, fid, g, cfg, &ops);
    const CoherentState b = coherent_state({0.1, 0.6, "cartesian"}, fid, -0.2, cfg, &ops);
    const Complex num = overlap(b, a);
    const Complex cf = overlap_kernel(cfg, fid, 0.1, 0.6, p, q, -0.2, g);
    CHECK(std::abs(num - cf) < 1e-12);
}

TEST_CASE("far labels are rejected rather than silently truncated") {
    const GlobalConfig cfg = cfg_with(1.0, 64);
    const FiducialSpec fid = fid_with(1.0);
    CHECK_THROWS_AS(coherent_state({0.0, 30.0, "cartesian"}, fid, 0.0, cfg), TailTruncation);
    CHECK_THROWS_AS(coherent_state({1.0, 2.0, "polar_action_angle"}, fid, 0.0, cfg),
                    ChartMismatch);
}

TEST_CASE("disk quadrature integrates the unit function of the kernel measure") {
    const GlobalConfig cfg = cfg_with(1.0, 64);
    const FiducialSpec fid = fid_with(1.0);
    const PhaseSpaceQuadrature quad = default_quadrature(cfg, fid, 10.0, 120, 120);
    CHECK(std::abs(quadrature_self_test(quad, cfg, fid)) < 1e-10);
    CHECK(quad.radius_sigmas() == Catch::Approx(10.0));
    CHECK_THROWS_AS(default_quadrature(cfg, fid, 4.0, 120, 120), InvalidParameter);
}

TEST_CASE("resolution of unity on the interior block") {
    // A 10-sigma disk carries lambda = 50 of mean occupation, so the block on
    // which the defect can be small at all must stay well below that: the
    //16-dim quarter block, not the default half block.
    GlobalConfig cfg = cfg_with(1.0, 64);
    cfg.tail_fraction = 0.25;
    for (const double omega : {1.0, 4.0}) {
        const FiducialSpec fid = fid_with(omega);
        const PhaseSpaceQuadrature quad =
            default_quadrature(cfg, fid, 10.0, 120, 120);
        CHECK(resolution_of_unity_defect(quad, fid, cfg) < 1e-7);
    }

    // On the default half block the same disk is simply too small; the defect
    // is macroscopic rather than subtly wrong.
    const GlobalConfig half = cfg_with(1.0, 64);
    const FiducialSpec fid = fid_with(1.0);
    const PhaseSpaceQuadrature quad = default_quadrature(half, fid, 10.0, 120, 120);
    CHECK(resolution_of_unity_defect(quad, fid, half) > 1e-4);
}

TEST_CASE("reproducing-kernel chain rule") {
    const GlobalConfig cfg = cfg_with(1.0, 64);
    const FiducialSpec fid = fid_with(1.0);
    const PhaseSpaceQuadrature quad = default_quadrature(cfg, fid, 10.0, 120, 120);
    CHECK(kernel_chain_defect({0.4, -0.3, "cartesian"}, {-0.2, 0.5, "cartesian"}, quad, fid,
                              cfg) < 1e-8);
    CHECK(kernel_chain_defect({1.0, 1.0, "cartesian"}, {1.0, 1.0, "cartesian"}, quad, fid,
                              cfg) < 1e-8);
}

TEST_CASE("upper symbol of shifted quadratic operators") {
    const GlobalConfig cfg = cfg_with(1.0, 64);
    const FiducialSpec fid = fid_with(1.0);
    const Kinematics kin = build_kinematics(cfg, fid.omega);
    const WeylOps ops(cfg, fid);
    FockOperator h;
    h.dim = 64;
    h.entries = 0.5 * (kin.P.entries * kin.P.entries + kin.Q.entries * kin.Q.entries) -
                0.5 * cfg.hbar * CMatrix::Identity(64, 64);
    h.label = "harmonic minus half hbar";
    for (const auto& [p, q] : {std::pair{0.0, 0.0}, {1.0, -1.0}, {2.0, 0.5}})
        CHECK(upper_symbol(h, {p, q, "cartesian"}, fid, cfg, &ops) ==
              Catch::Approx(0.5 * (p * p + q * q)).margin(1e-9));

    FockOperator ident;
    ident.dim = 64;
    ident.entries = CMatrix::Identity(64, 64);
    ident.label = "identity";
    CHECK(upper_symbol(ident, {0.7, 0.2, "cartesian"}, fid, cfg, &ops) ==
          Catch::Approx(1.0).margin(1e-12));
}
