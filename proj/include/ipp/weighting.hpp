#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <utility>

#include "ipp/errors.hpp"

namespace ipp {

// Penalty-weighted class masses. ePlus = C+ * n+, eMinus = C- * n-. The grid
// machinery holds the *budget* (the 0.5-baseline effective total) fixed while
// shifting weight between classes.
struct EffectiveCounts {
    double ePlus = 0.0;
    double eMinus = 0.0;

    double total() const { return ePlus + eMinus; }
    // Invariant effective total at the z=0.5 baseline.
    double budget() const { return 0.5 * ePlus + 0.5 * eMinus; }
    double priorPlus() const { return ePlus / total(); }
    double priorMinus() const { return eMinus / total(); }
};

inline EffectiveCounts effectiveCounts(double cPlus, std::size_t nPlus,
                                       double cMinus, std::size_t nMinus) {
    EffectiveCounts counts{cPlus * static_cast<double>(nPlus),
                           cMinus * static_cast<double>(nMinus)};
    if (!(counts.ePlus > 0.0) || !(counts.eMinus > 0.0))
        throw DataError("effective counts must be strictly positive");
    return counts;
}

// Per-class multipliers around the 0.5 baseline. Applied penalties are
// (zPlus*C+, zMinus*C-); zPlus*ePlus + zMinus*eMinus stays equal to budget().
struct WeightPair {
    double zPlus = 0.5;
    double zMinus = 0.5;
};

// Open admissible interval for z+; its image under zMinusForZPlus is the
// admissible interval for z-.
inline std::pair<double, double> zPlusBounds(const EffectiveCounts& counts) {
    return {0.0, counts.budget() / counts.ePlus};
}

namespace detail {
inline void requireZPlusInBounds(double zPlus, const EffectiveCounts& counts) {
    const auto [lo, hi] = zPlusBounds(counts);
    if (!(zPlus > lo) || !(zPlus < hi))
        throw DataError("zPlus " + std::to_string(zPlus) + " outside (" +
                        std::to_string(lo) + ", " + std::to_string(hi) + ")");
}
} // namespace detail

// Budget-preserving counterweight: z- = 0.5 + (0.5 - z+) * ePlus / eMinus.
inline double zMinusForZPlus(double zPlus, const EffectiveCounts& counts) {
    detail::requireZPlusInBounds(zPlus, counts);
    return 0.5 + (0.5 - zPlus) * counts.ePlus / counts.eMinus;
}

inline WeightPair weightPairForZPlus(double zPlus, const EffectiveCounts& counts) {
    return {zPlus, zMinusForZPlus(zPlus, counts)};
}

// delta- that keeps the effective total fixed when C+ moves by delta+.
inline double deltaMinusForDeltaPlus(double deltaPlus, std::size_t nPlus,
                                     std::size_t nMinus) {
    if (nMinus == 0) throw DataError("deltaMinusForDeltaPlus: nMinus must be positive");
    return deltaPlus * static_cast<double>(nPlus) / static_cast<double>(nMinus);
}

// delta <-> z bijection around the shared baseline: applied penalty
// z * cBase = 0.5 * cBase + delta.
inline double deltaPlusForZPlus(double zPlus, double cBase) {
    return (zPlus - 0.5) * cBase;
}
inline double zPlusForDeltaPlus(double deltaPlus, double cBase) {
    return 0.5 + deltaPlus / cBase;
}

// Posterior level when ePlus == eMinus: the hyperplane built at z+ carries
// implied posterior z+ itself.
inline double impliedProbabilityBalanced(double zPlus) {
    if (!(zPlus > 0.0) || !(zPlus < 1.0))
        throw DataError("impliedProbabilityBalanced: zPlus must lie in (0,1)");
    return zPlus;
}

// General closed form without balance assumptions:
//   P = z+ * eMinus / ((0.5 + z+) * eMinus + (0.5 - z+) * ePlus).
// Strictly increasing in z+ and maps the admissible interval onto (0,1).
// Evaluated as z+ / (z+ + z-), which is the same expression with the budget
// counterweight substituted in but avoids the cancellation the textbook
// arrangement suffers near the bounds at extreme count ratios.
inline double impliedProbabilityGeneral(double zPlus, const EffectiveCounts& counts) {
    const double zMinus = zMinusForZPlus(zPlus, counts);
    return zPlus / (zPlus + zMinus);
}

// Balanced data with equal base C, in the delta parameterization with
// baseline applied penalty c: P = 0.5 + 0.5 * delta+ / c.
inline double impliedProbabilityBalancedReduced(double deltaPlus, double c) {
    if (!(std::abs(deltaPlus) < c))
        throw DataError("impliedProbabilityBalancedReduced: |deltaPlus| must be < c");
    return 0.5 + 0.5 * deltaPlus / c;
}

// Inverse of impliedProbabilityGeneral: the z+ whose hyperplane carries
// implied posterior p. z+ = 0.5 p (a+b) / (a - p(a-b)) with a = eMinus,
// b = ePlus; the denominator is evaluated as a(1-p) + pb (all terms
// positive) for the same cancellation reason as the forward direction.
inline double zPlusForTargetProbability(double p, const EffectiveCounts& counts) {
    if (!(p > 0.0) || !(p < 1.0))
        throw DataError("zPlusForTargetProbability: p must lie in (0,1)");
    const double a = counts.eMinus;
    const double b = counts.ePlus;
    return 0.5 * p * (a + b) / (a * (1.0 - p) + p * b);
}

} // namespace ipp
