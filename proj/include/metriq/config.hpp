// Global configuration shared across modules: Planck constant, Fock-space
// truncation size, and the interior-block convention used by every
// truncation-aware assertion.
//
// Truncation policy: in a finite Fock space the canonical commutation
// relation [Q,P] = iℏ necessarily fails in the last row/column band, so all
// quantitative statements are made on the leading ⌈tail_fraction·N⌉
// dimensions (the "interior block"); the outer band is acknowledged
// truncation noise.
#pragma once

#include <cmath>
#include <limits>

#include "metriq/errors.hpp"

namespace metriq {

struct GlobalConfig {
    double hbar = 1.0;          // action scale, > 0
    int fock_dim = 64;          // truncated Fock dimension N, >= 4
    double tail_fraction = 0.5; // interior-block fraction, in (0,1)
    double tol_linalg = 1e-10;  // linear-algebra assertion tolerance

    // Leading block size used for truncation-safe assertions.
    int interior_dim() const {
        return static_cast<int>(std::ceil(tail_fraction * fock_dim));
    }

    void validate() const {
        if (!(hbar > 0.0) || !std::isfinite(hbar))
            throw InvalidParameter("GlobalConfig: hbar must be a positive finite real");
        if (fock_dim < 4)
            throw InvalidParameter("GlobalConfig: fock_dim must be >= 4");
        if (!(tail_fraction > 0.0) || !(tail_fraction < 1.0))
            throw InvalidParameter("GlobalConfig: tail_fraction must lie in (0,1)");
        if (!(tol_linalg > 0.0))
            throw InvalidParameter("GlobalConfig: tol_linalg must be positive");
    }
};

// Fiducial vector specification: the Ω-oscillator ground state, annihilated
// by ΩQ + iP. Only centered fiducials (⟨Q⟩ = ⟨P⟩ = 0) are admitted by the
// builtin operations; the flag exists so the restriction is explicit.
struct FiducialSpec {
    double omega = 1.0;
    bool centered = true;

    void validate() const {
        if (!(omega > 0.0) || !std::isfinite(omega))
            throw InvalidParameter("FiducialSpec: omega must be a positive finite real");
        if (!centered)
            throw InvalidParameter("FiducialSpec: builtin operations require a centered fiducial");
    }

    bool compatible(const FiducialSpec& other) const {
        return centered == other.centered &&
               std::abs(omega - other.omega) <=
                   1e-14 * std::max(1.0, std::abs(omega));
    }
};

} // namespace metriq
