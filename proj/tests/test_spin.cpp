#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "metriq/metriq.hpp"
#include "oracle_utils.hpp"

using namespace metriq;

TEST_CASE("spin matrices use the descending-m basis and close under commutation") {
    for (const double s : {0.5, 1.0, 2.5}) {
        for (const double hbar : {1.0, 0.5}) {
            const SpinSpec spec{s, hbar};
            const SpinTriple t = build_spin(spec);
            REQUIRE(t.s3.entries.rows() == spec.dim());
            CHECK(std::abs(t.s3.entries(0, 0) - hbar * s) < 1e-14);
            CHECK(std::abs(t.s3.entries(spec.dim() - 1, spec.dim() - 1) + hbar * s) < 1e-14);

            const double scale = hbar * hbar * s * (s + 1.0);
            const auto comm = [](const CMatrix& x, const CMatrix& y) -> CMatrix {
                return x * y - y * x;
            };
            const Complex ih(0.0, hbar);
            CHECK((comm(t.s1.entries, t.s2.entries) - ih * t.s3.entries)
                      .cwiseAbs()
                      .maxCoeff() < 1e-12 * (1.0 + scale));
            CHECK((comm(t.s2.entries, t.s3.entries) - ih * t.s1.entries)
                      .cwiseAbs()
                      .maxCoeff() < 1e-12 * (1.0 + scale));
            CHECK((comm(t.s3.entries, t.s1.entries) - ih * t.s2.entries)
                      .cwiseAbs()
                      .maxCoeff() < 1e-12 * (1.0 + scale));
        }
    }
}

TEST_CASE("casimir defect stays at roundoff") {
    for (double s = 0.5; s <= 3.0; s += 0.5)
        CHECK(spin_casimir_defect({s, 1.0}) < 1e-12);
    for (double s = 3.5; s <= 10.0; s += 0.5)
        CHECK(spin_casimir_defect({s, 1.0}) < 1e-11);
    CHECK(spin_casimir_defect({2.0, 0.5}) < 1e-12);
}

TEST_CASE("the spin one-half coherent state is the textbook spinor") {
    const SpinSpec spec{0.5, 1.0};
    for (const auto& [theta, phi] :
         {std::pair{0.7, 0.3}, {1.9, -2.4}, {3.0, 3.1}, {0.0, 0.0}}) {
        const FockVector v = spin_coherent(theta, phi, spec);
        const auto ref = oracle::spin_half_state(theta, phi);
        CHECK(std::abs(v.coeffs(0) - ref[0]) < 1e-14);
        CHECK(std::abs(v.coeffs(1) - ref[1]) < 1e-14);
    }
}

TEST_CASE("coherent states are normalized and live on the sphere") {
    for (const double s : {0.5, 1.0, 3.5}) {
        const SpinSpec spec{s, 1.0};
        const SpinRotator rot(spec);
        for (const auto& [theta, phi] : {std::pair{0.0, 0.0}, {0.8, 1.1}, {2.9, -3.0}}) {
            const FockVector v = spin_coherent(theta, phi, spec, &rot);
            CHECK(std::abs(v.coeffs.norm() - 1.0) < 1e-13);
        }
        // theta = 0 is the highest-weight state up to phase, for every phi.
        const FockVector north_a = spin_coherent(0.0, 0.4, spec, &rot);
        const FockVector north_b = spin_coherent(0.0, -2.0, spec, &rot);
        CHECK(std::abs(std::abs(north_a.coeffs(0)) - 1.0) < 1e-13);
        CHECK(std::abs(std::abs(spin_overlap(north_a, north_b)) - 1.0) < 1e-13);
        // phi = pi and its wrapped twin label the same ray.
        const FockVector east = spin_coherent(1.0, M_PI, spec, &rot);
        const FockVector west = spin_coherent(1.0, -M_PI, spec, &rot);
        CHECK(std::abs(std::abs(spin_overlap(east, west)) - 1.0) < 1e-13);
    }
}

TEST_CASE("overlaps match the closed form for several spins") {
    for (const double s : {0.5, 1.0, 2.0}) {
        const SpinSpec spec{s, 1.0};
        const SpinRotator rot(spec);
        for (const auto& [tb, fb, ta, fa] :
             {std::tuple{0.7, 0.2, 1.4, -0.9}, {2.5, 3.0, 0.3, -3.0}, {1.0, 1.0, 1.0, 1.0}}) {
            const FockVector b = spin_coherent(tb, fb, spec, &rot);
            const FockVector a = spin_coherent(ta, fa, spec, &rot);
            const Complex got = spin_overlap(b, a);
            const Complex want = oracle::spin_overlap_closed_form(s, tb, fb, ta, fa);
            CHECK(std::abs(got - want) < 1e-13);
        }
    }
    FockVector small, big;
    small.dim = 2;
    small.coeffs = CVector::Zero(2);
    big.dim = 3;
    big.coeffs = CVector::Zero(3);
    CHECK_THROWS_AS(spin_overlap(small, big), InvalidParameter);
}

TEST_CASE("the third component points along the classical direction") {
    for (const double s : {0.5, 1.5, 3.0}) {
        for (const double hbar : {1.0, 2.0}) {
            const SpinSpec spec{s, hbar};
            const SpinTriple t = build_spin(spec);
            const SpinRotator rot(spec);
            for (const double theta : {0.4, 1.3, 2.6}) {
                const FockVector v = spin_coherent(theta, 0.7, spec, &rot);
                CHECK(std::abs(spin_expectation(t.s3, v) - s * hbar * std::cos(theta)) <
                      1e-12 * (1.0 + s * hbar));
            }
        }
    }
}

TEST_CASE("resolution of unity is exact once the node counts clear the degree") {
    CHECK(spin_resolution_defect({0.5, 1.0}, 16, 16) < 1e-12);
    CHECK(spin_resolution_defect({2.0, 1.0}, 32, 32) < 1e-10);
    CHECK(spin_resolution_defect({3.5, 1.0}, 8, 16) < 1e-10); // minimal-ish counts
    // Under-resolved rules alias and the defect is macroscopic.
    CHECK(spin_resolution_defect({2.0, 1.0}, 8, 4) > 1e-3);
    CHECK(spin_resolution_defect({2.0, 1.0}, 2, 16) > 1e-3);
}

TEST_CASE("the phi grid offset is immaterial for a periodic exact rule") {
    const SpinSpec spec{2.0, 1.0};
    const double base = spin_resolution_defect(spec, 16, 16);
    const double shifted = spin_resolution_defect(spec, 16, 16, 2.0 * M_PI / 16.0);
    const double odd = spin_resolution_defect(spec, 16, 16, M_PI / 7.0);
    CHECK(base < 1e-12);
    CHECK(std::abs(shifted - base) < 1e-12);
    CHECK(odd < 1e-12);
}

TEST_CASE("the induced metric is the round metric at radius sqrt(s) hbar") {
    for (const double s : {0.5, 1.0, 2.0}) {
        for (const double hbar : {1.0, 2.0}) {
            const SpinSpec spec{s, hbar};
            const SpinRotator rot(spec);
            for (const double theta : {0.5, 1.2, 2.3}) {
                for (const double phi : {0.0, 1.0}) {
                    const Eigen::Matrix2d g =
                        spin_induced_metric(theta, phi, spec, &rot, 1e-5);
                    const double unit = hbar * hbar * s;
                    CHECK(std::abs(g(0, 0) - unit) < 1e-6 * unit);
                    CHECK(std::abs(g(1, 1) - unit * std::pow(std::sin(theta), 2)) <
                          1e-6 * unit);
                    CHECK(std::abs(g(0, 1)) < 1e-6 * unit);
                }
            }
        }
    }
}

TEST_CASE("spin inputs are validated") {
    CHECK_THROWS_AS(SpinSpec({0.3, 1.0}).validate(), InvalidSpin);
    CHECK_THROWS_AS(SpinSpec({-1.0, 1.0}).validate(), InvalidSpin);
    CHECK_THROWS_AS(SpinSpec({1.0, 0.0}).validate(), InvalidSpin);
    CHECK_THROWS_AS(build_spin({0.75, 1.0}), InvalidSpin);

    const SpinSpec ok{1.0, 1.0};
    CHECK_THROWS_AS(spin_coherent(-0.1, 0.0, ok), InvalidParameter);
    CHECK_THROWS_AS(spin_coherent(3.3, 0.0, ok), InvalidParameter);
    CHECK_THROWS_AS(spin_coherent(1.0, 4.0, ok), InvalidParameter);
    CHECK_THROWS_AS(spin_resolution_defect(ok, 0, 8), InvalidParameter);

    CHECK_THROWS_AS(spin_induced_metric(0.05, 0.0, ok), PoleProximity);
    CHECK_THROWS_AS(spin_induced_metric(M_PI - 0.05, 0.0, ok), PoleProximity);
}
