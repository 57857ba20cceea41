#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ipp/errors.hpp"

namespace ipp {

// Sigmoid link P(y=+1 | score) = 1 / (1 + exp(A*score + B)).
struct PlattParams {
    double A = 0.0;
    double B = 0.0;
};

// Piecewise-constant non-decreasing function; values[k] applies on the k-th
// interval cut by the breakpoints, extended left/right beyond them.
struct StepFunction {
    std::vector<double> breakpoints; // ascending; size == values.size() - 1
    std::vector<double> values;      // non-decreasing

    double operator()(double x) const {
        const auto it = std::upper_bound(breakpoints.begin(), breakpoints.end(), x);
        return values[static_cast<std::size_t>(it - breakpoints.begin())];
    }
};

struct RocCurve {
    std::vector<std::pair<double, double>> points; // (fpr, tpr), (0,0) .. (1,1)
    double auc = 0.0;
};

struct BinPoint {
    double binCenter = 0.0;
    double meanScore = 0.0;            // NaN for empty bins
    double empiricalPositiveRate = 0.0; // NaN for empty bins
    std::size_t binCount = 0;
};

struct CalibrationReport {
    std::string method;
    double calibrationScore = 0.0;
    std::vector<BinPoint> binPoints;
    StepFunction isotonic;
    RocCurve roc;
};

// 0/1 view of +1/-1 labels, as consumed by the isotonic/ROC/binning helpers.
inline std::vector<double> labels01FromPm1(std::span<const int> labels) {
    std::vector<double> out(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) out[i] = labels[i] > 0 ? 1.0 : 0.0;
    return out;
}

inline double applyPlatt(const PlattParams& p, double score) {
    const double t = p.A * score + p.B;
    // Evaluate the stable branch so huge |t| cannot overflow.
    if (t >= 0.0) {
        const double e = std::exp(-t);
        return e / (1.0 + e);
    }
    return 1.0 / (1.0 + std::exp(t));
}

namespace detail {

// Negative log-likelihood of the sigmoid fit against smoothed targets,
// evaluated branch-stably.
inline double plattObjective(std::span<const double> scores,
                             std::span<const double> targets, double A, double B) {
    double obj = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        const double u = A * scores[i] + B;
        if (u >= 0.0)
            obj += targets[i] * u + std::log1p(std::exp(-u));
        else
            obj += (targets[i] - 1.0) * u + std::log1p(std::exp(u));
    }
    return obj;
}

} // namespace detail

// Sigmoid calibration against Platt's smoothed targets via Newton iterations
// with backtracking. labels are +1/-1.
inline PlattParams fitPlatt(std::span<const double> scores, std::span<const int> labels) {
    if (scores.size() != labels.size()) throw DataError("fitPlatt: length mismatch");
    if (scores.empty()) throw DataError("fitPlatt: empty input");
    for (double s : scores)
        if (!std::isfinite(s)) throw DataError("fitPlatt: non-finite score");

    double nPlus = 0.0, nMinus = 0.0;
    for (int y : labels)
        (y > 0 ? nPlus : nMinus) += 1.0;
    if (nPlus == 0.0 || nMinus == 0.0)
        throw DataError("fitPlatt: both classes required");

    const double hiTarget = (nPlus + 1.0) / (nPlus + 2.0);
    const double loTarget = 1.0 / (nMinus + 2.0);
    std::vector<double> targets(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i)
        targets[i] = labels[i] > 0 ? hiTarget : loTarget;

    constexpr double sigma = 1e-12; // Hessian ridge
    constexpr double gradTol = 1e-10;
    constexpr int maxNewton = 100;

    double A = 0.0;
    double B = std::log((nMinus + 1.0) / (nPlus + 1.0));
    double fval = detail::plattObjective(scores, targets, A, B);

    for (int it = 0; it < maxNewton; ++it) {
        double h11 = sigma, h22 = sigma, h21 = 0.0, g1 = 0.0, g2 = 0.0;
        for (std::size_t i = 0; i < scores.size(); ++i) {
            const double u = A * scores[i] + B;
            double p, q; // p = P(+), q = 1 - p
            if (u >= 0.0) {
                q = 1.0 / (1.0 + std::exp(-u));
                p = 1.0 - q;
            } else {
                p = 1.0 / (1.0 + std::exp(u));
                q = 1.0 - p;
            }
            const double d2 = p * q;
            h11 += scores[i] * scores[i] * d2;
            h22 += d2;
            h21 += scores[i] * d2;
            const double d1 = targets[i] - p;
            g1 += scores[i] * d1;
            g2 += d1;
        }
        if (std::abs(g1) < gradTol && std::abs(g2) < gradTol) break;

        const double det = h11 * h22 - h21 * h21;
        const double dA = -(h22 * g1 - h21 * g2) / det;
        const double dB = -(-h21 * g1 + h11 * g2) / det;
        const double gd = g1 * dA + g2 * dB;

        double stepSize = 1.0;
        while (stepSize >= 1e-10) {
            const double newA = A + stepSize * dA;
            const double newB = B + stepSize * dB;
            const double newF = detail::plattObjective(scores, targets, newA, newB);
            if (newF < fval + 1e-4 * stepSize * gd) {
                A = newA;
                B = newB;
                fval = newF;
                break;
            }
            stepSize /= 2.0;
        }
        if (stepSize < 1e-10) break; // line search failed; at numerical floor
    }
    return {A, B};
}

// Least-squares monotone (non-decreasing) fit of labels against scores via
// pool-adjacent-violators. Identical scores are pooled up front so the result
// is a function of the score. labels01 are 0/1 (fractions allowed).
inline StepFunction fitIsotonic(std::span<const double> scores,
                                std::span<const double> labels01) {
    if (scores.size() != labels01.size()) throw DataError("fitIsotonic: length mismatch");
    if (scores.empty()) throw DataError("fitIsotonic: empty input");

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    // Pre-pool ties: one (score, label sum, weight) node per distinct score.
    // Sums rather than running means keep each block's fitted value a single
    // division, so results match enumeration-style oracles bit for bit.
    std::vector<double> score, labelSum, weight;
    for (std::size_t k = 0; k < order.size(); ++k) {
        const double s = scores[order[k]];
        const double v = labels01[order[k]];
        if (!score.empty() && score.back() == s) {
            labelSum.back() += v;
            weight.back() += 1.0;
        } else {
            score.push_back(s);
            labelSum.push_back(v);
            weight.push_back(1.0);
        }
    }

    // PAVA over blocks [start[b], start[b+1]) of the pooled nodes.
    std::vector<double> blockSum, blockWeight;
    std::vector<std::size_t> blockStart;
    for (std::size_t k = 0; k < score.size(); ++k) {
        blockSum.push_back(labelSum[k]);
        blockWeight.push_back(weight[k]);
        blockStart.push_back(k);
        while (blockSum.size() > 1 &&
               blockSum[blockSum.size() - 2] * blockWeight.back() >=
                   blockSum.back() * blockWeight[blockWeight.size() - 2]) {
            blockSum[blockSum.size() - 2] += blockSum.back();
            blockWeight[blockWeight.size() - 2] += blockWeight.back();
            blockSum.pop_back();
            blockWeight.pop_back();
            blockStart.pop_back();
        }
    }

    // Breakpoints at midpoints between adjacent blocks, so every training
    // score evaluates to its own block's fitted value.
    StepFunction fit;
    for (std::size_t b = 0; b < blockSum.size(); ++b)
        fit.values.push_back(blockSum[b] / blockWeight[b]);
    for (std::size_t b = 1; b < blockStart.size(); ++b) {
        const double lastOfPrev = score[blockStart[b] - 1];
        const double firstOfThis = score[blockStart[b]];
        fit.breakpoints.push_back(0.5 * (lastOfPrev + firstOfThis));
    }
    return fit;
}

// Mean absolute difference between estimates and their isotonic fit.
inline double calibrationScore(std::span<const double> estimates, const StepFunction& iso) {
    if (estimates.empty()) throw DataError("calibrationScore: empty input");
    double sum = 0.0;
    for (double e : estimates) sum += std::abs(e - iso(e));
    return sum / static_cast<double>(estimates.size());
}

// Equal-width reliability bins over [0,1]; the top bin is right-closed.
// Empty bins carry count 0 and NaN mean/rate.
inline std::vector<BinPoint> binReliability(std::span<const double> estimates,
                                            std::span<const double> labels01,
                                            std::size_t nBins) {
    if (estimates.size() != labels01.size())
        throw DataError("binReliability: length mismatch");
    if (nBins < 1) throw DataError("binReliability: nBins must be >= 1");
    std::vector<double> scoreSum(nBins, 0.0), labelSum(nBins, 0.0);
    std::vector<std::size_t> count(nBins, 0);
    for (std::size_t i = 0; i < estimates.size(); ++i) {
        const double e = estimates[i];
        auto bin = static_cast<long>(std::floor(e * static_cast<double>(nBins)));
        bin = std::clamp<long>(bin, 0, static_cast<long>(nBins) - 1);
        scoreSum[static_cast<std::size_t>(bin)] += e;
        labelSum[static_cast<std::size_t>(bin)] += labels01[i];
        ++count[static_cast<std::size_t>(bin)];
    }
    const double nan = std::numeric_limits<double>::quiet_NaN();
    std::vector<BinPoint> bins(nBins);
    for (std::size_t b = 0; b < nBins; ++b) {
        bins[b].binCenter = (static_cast<double>(b) + 0.5) / static_cast<double>(nBins);
        bins[b].binCount = count[b];
        bins[b].meanScore = count[b] ? scoreSum[b] / static_cast<double>(count[b]) : nan;
        bins[b].empiricalPositiveRate =
            count[b] ? labelSum[b] / static_cast<double>(count[b]) : nan;
    }
    return bins;
}

// Threshold sweep over distinct scores (ties grouped), AUC by trapezoid rule.
inline RocCurve rocAndAuc(std::span<const double> scores,
                          std::span<const double> labels01) {
    if (scores.size() != labels01.size()) throw DataError("rocAndAuc: length mismatch");
    double totalPos = 0.0, totalNeg = 0.0;
    for (double y : labels01)
        (y > 0.5 ? totalPos : totalNeg) += 1.0;
    if (totalPos == 0.0 || totalNeg == 0.0)
        throw DataError("rocAndAuc: both classes required");

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

    RocCurve roc;
    roc.points.emplace_back(0.0, 0.0);
    double tp = 0.0, fp = 0.0;
    std::size_t i = 0;
    while (i < order.size()) {
        const double threshold = scores[order[i]];
        while (i < order.size() && scores[order[i]] == threshold) {
            if (labels01[order[i]] > 0.5) tp += 1.0;
            else fp += 1.0;
            ++i;
        }
        roc.points.emplace_back(fp / totalNeg, tp / totalPos);
    }
    for (std::size_t k = 1; k < roc.points.size(); ++k) {
        const auto& [x0, y0] = roc.points[k - 1];
        const auto& [x1, y1] = roc.points[k];
        roc.auc += (x1 - x0) * 0.5 * (y0 + y1);
    }
    return roc;
}

// Min-max map onto [0,1]; a constant series maps to all 0.5.
inline std::vector<double> normalizeScores(std::span<const double> scores) {
    if (scores.empty()) throw DataError("normalizeScores: empty input");
    const auto [loIt, hiIt] = std::minmax_element(scores.begin(), scores.end());
    const double lo = *loIt, hi = *hiIt;
    std::vector<double> out(scores.size());
    if (hi == lo) {
        std::fill(out.begin(), out.end(), 0.5);
        return out;
    }
    for (std::size_t i = 0; i < scores.size(); ++i)
        out[i] = (scores[i] - lo) / (hi - lo);
    return out;
}

// Runs the full single-series harness: isotonic fit on (estimate, label)
// pairs, calibration score, reliability bins, ROC/AUC.
inline CalibrationReport calibrateSeries(std::string method,
                                         std::span<const double> estimates,
                                         std::span<const double> labels01,
                                         std::size_t nBins = 10) {
    CalibrationReport report;
    report.method = std::move(method);
    report.isotonic = fitIsotonic(estimates, labels01);
    report.calibrationScore = calibrationScore(estimates, report.isotonic);
    report.binPoints = binReliability(estimates, labels01, nBins);
    report.roc = rocAndAuc(estimates, labels01);
    return report;
}

} // namespace ipp
