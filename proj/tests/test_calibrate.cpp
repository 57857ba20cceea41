#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "ipp/calibrate.hpp"
#include "ipp/rng.hpp"
#include "oracles.hpp"

using namespace ipp;

TEST_CASE("applyPlatt") {
    CHECK(applyPlatt({-1.0, 0.0}, 0.0) == 0.5);
    CHECK(applyPlatt({0.0, 0.0}, 123.0) == 0.5);
    CHECK(applyPlatt({-1.0, 0.0}, 800.0) > 1.0 - 1e-12); // stable at the limit
    CHECK(applyPlatt({-1.0, 0.0}, -800.0) < 1e-12);
    CHECK(std::isfinite(applyPlatt({5.0, -3.0}, 1e308)));
}

TEST_CASE("fitPlatt") {
    SECTION("symmetric scores give a centered sigmoid") {
        const std::vector<double> scores{-2.0, -1.0, -0.5, 0.5, 1.0, 2.0};
        const std::vector<int> labels{-1, -1, -1, 1, 1, 1};
        const auto p = fitPlatt(scores, labels);
        CHECK(std::abs(p.B) < 1e-6);
        CHECK(p.A < 0.0); // higher score, higher probability
        // Strictly monotone when A != 0.
        CHECK(applyPlatt(p, -1.0) < applyPlatt(p, 0.0));
        CHECK(applyPlatt(p, 0.0) < applyPlatt(p, 1.0));
    }
    SECTION("beats the grid-search oracle") {
        const std::vector<double> scores{-2.0, -1.0, 1.0, 2.0};
        const std::vector<int> labels{-1, -1, 1, 1};
        const auto p = fitPlatt(scores, labels);
        const auto oracle = oracles::plattGridSearch(scores, labels);
        const double ours = oracles::plattNll(scores, labels, p.A, p.B);
        CHECK(ours <= oracle.nll + 1e-9 * (1.0 + std::abs(oracle.nll)));
    }
    SECTION("constant scores collapse to the smoothed base rate") {
        const std::vector<double> scores{0.7, 0.7, 0.7, 0.7, 0.7};
        const std::vector<int> labels{1, 1, 1, -1, -1};
        const auto p = fitPlatt(scores, labels);
        const double hiTarget = 4.0 / 5.0; // (3+1)/(3+2)
        const double loTarget = 1.0 / 4.0; // 1/(2+2)
        const double meanTarget = (3.0 * hiTarget + 2.0 * loTarget) / 5.0;
        CHECK(applyPlatt(p, 0.7) == Catch::Approx(meanTarget).margin(1e-6));
    }
    SECTION("errors") {
        const std::vector<double> scores{1.0, 2.0};
        CHECK_THROWS_AS(fitPlatt(scores, std::vector<int>{1, 1}), DataError);
        CHECK_THROWS_AS(fitPlatt(std::vector<double>{1.0, std::nan("")},
                                 std::vector<int>{1, -1}),
                        DataError);
        CHECK_THROWS_AS(fitPlatt(std::vector<double>{1.0}, std::vector<int>{1, -1}),
                        DataError);
    }
}

TEST_CASE("fitIsotonic") {
    SECTION("already isotonic input is reproduced") {
        const auto fit = fitIsotonic(std::vector<double>{1.0, 2.0},
                                     std::vector<double>{0.0, 1.0});
        CHECK(fit(1.0) == 0.0);
        CHECK(fit(2.0) == 1.0);
        CHECK(fit(0.0) == 0.0);  // left extension
        CHECK(fit(99.0) == 1.0); // right extension
    }
    SECTION("violator pooling: labels 1,0,1 fit as 0.5,0.5,1") {
        const auto fit = fitIsotonic(std::vector<double>{1.0, 2.0, 3.0},
                                     std::vector<double>{1.0, 0.0, 1.0});
        CHECK(fit(1.0) == 0.5);
        CHECK(fit(2.0) == 0.5);
        CHECK(fit(3.0) == 1.0);
    }
    SECTION("constant labels give a constant function") {
        const auto fit = fitIsotonic(std::vector<double>{3.0, 1.0, 2.0},
                                     std::vector<double>{1.0, 1.0, 1.0});
        CHECK(fit.values == std::vector<double>{1.0});
        CHECK(fit.breakpoints.empty());
        CHECK(fit(-100.0) == 1.0);
    }
    SECTION("ties are pooled before fitting") {
        const auto fit = fitIsotonic(std::vector<double>{1.0, 1.0, 2.0},
                                     std::vector<double>{0.0, 1.0, 1.0});
        CHECK(fit(1.0) == 0.5);
        CHECK(fit(2.0) == 1.0);
    }
    SECTION("empty input") {
        CHECK_THROWS_AS(fitIsotonic(std::vector<double>{}, std::vector<double>{}),
                        DataError);
    }
    SECTION("matches the exhaustive oracle bit for bit on small inputs") {
        Rng rng(314159);
        for (int trial = 0; trial < 400; ++trial) {
            const std::size_t n = 1 + rng.nextU64() % 8;
            std::vector<double> scores(n), labels(n);
            for (std::size_t i = 0; i < n; ++i) {
                // Coarse score lattice so ties occur often.
                scores[i] = static_cast<double>(rng.nextU64() % 5);
                labels[i] = rng.uniform() < 0.5 ? 0.0 : 1.0;
            }
            const auto fit = fitIsotonic(scores, labels);
            const auto oracle = oracles::exhaustiveIsotonicFit(scores, labels);
            for (std::size_t i = 0; i < n; ++i) CHECK(fit(scores[i]) == oracle[i]);
            // Fitted values are non-decreasing.
            for (std::size_t v = 1; v < fit.values.size(); ++v)
                CHECK(fit.values[v] >= fit.values[v - 1]);
            // Each pooled block's value is its members' label mean: residuals
            // grouped by fitted value sum to zero.
            for (double blockValue : fit.values) {
                double residual = 0.0;
                for (std::size_t i = 0; i < n; ++i)
                    if (fit(scores[i]) == blockValue) residual += labels[i] - blockValue;
                CHECK(std::abs(residual) <= 1e-12);
            }
        }
    }
}

TEST_CASE("calibrationScore") {
    SECTION("estimates on their own step function score zero") {
        // Estimates equal to the labels are a fixed point of the isotonic fit.
        const std::vector<double> estimates{0.0, 0.0, 1.0, 1.0};
        const std::vector<double> labels{0.0, 0.0, 1.0, 1.0};
        const auto iso = fitIsotonic(estimates, labels);
        CHECK(calibrationScore(estimates, iso) == 0.0);
    }
    SECTION("constant step function") {
        StepFunction iso;
        iso.values = {0.3};
        CHECK(calibrationScore(std::vector<double>{0.2, 0.4}, iso) ==
              Catch::Approx(0.1).margin(1e-15));
    }
    SECTION("empty input") {
        StepFunction iso;
        iso.values = {0.5};
        CHECK_THROWS_AS(calibrationScore(std::vector<double>{}, iso), DataError);
    }
}

TEST_CASE("binReliability") {
    SECTION("bin placement") {
        const std::vector<double> estimates{0.05, 1.0, 0.95, 0.5};
        const std::vector<double> labels{0.0, 1.0, 1.0, 0.0};
        const auto bins = binReliability(estimates, labels, 10);
        REQUIRE(bins.size() == 10);
        CHECK(bins[0].binCount == 1); // 0.05 -> [0, 0.1)
        CHECK(bins[9].binCount == 2); // 0.95 and the right-closed 1.0
        CHECK(bins[5].binCount == 1); // 0.5 -> [0.5, 0.6)
        CHECK(bins[0].binCenter == 0.05);
        std::size_t total = 0;
        for (const auto& b : bins) total += b.binCount;
        CHECK(total == estimates.size());
    }
    SECTION("empty bins are flagged") {
        const auto bins = binReliability(std::vector<double>{0.95},
                                         std::vector<double>{1.0}, 10);
        CHECK(bins[0].binCount == 0);
        CHECK(std::isnan(bins[0].meanScore));
        CHECK(std::isnan(bins[0].empiricalPositiveRate));
        CHECK(bins[9].binCount == 1);
        CHECK(bins[9].empiricalPositiveRate == 1.0);
    }
    SECTION("simulated well-calibrated estimates match bin rates") {
        Rng rng(2025);
        const std::size_t n = 20000;
        std::vector<double> estimates(n), labels(n);
        for (std::size_t i = 0; i < n; ++i) {
            estimates[i] = rng.uniform();
            labels[i] = rng.uniform() < estimates[i] ? 1.0 : 0.0;
        }
        for (const auto& b : binReliability(estimates, labels, 10)) {
            REQUIRE(b.binCount > 0);
            const double sigma =
                std::sqrt(0.25 / static_cast<double>(b.binCount));
            CHECK(std::abs(b.empiricalPositiveRate - b.meanScore) <= 3.0 * sigma + 0.01);
        }
    }
}

TEST_CASE("rocAndAuc") {
    SECTION("perfect separation") {
        const auto roc = rocAndAuc(std::vector<double>{0.9, 0.8, 0.2, 0.1},
                                   std::vector<double>{1.0, 1.0, 0.0, 0.0});
        CHECK(roc.auc == 1.0);
        CHECK(roc.points.front() == std::pair{0.0, 0.0});
        CHECK(roc.points.back() == std::pair{1.0, 1.0});
    }
    SECTION("textbook four-point curve") {
        const std::vector<double> scores{0.1, 0.4, 0.35, 0.8};
        const std::vector<double> labels{0.0, 0.0, 1.0, 1.0};
        const auto roc = rocAndAuc(scores, labels);
        CHECK(roc.auc == Catch::Approx(0.75).margin(1e-15));
        CHECK(roc.auc == Catch::Approx(oracles::pairwiseConcordance(scores, labels))
                             .margin(1e-15));
    }
    SECTION("equals pairwise concordance with ties") {
        Rng rng(808);
        for (int trial = 0; trial < 300; ++trial) {
            const std::size_t n = 2 + rng.nextU64() % 49;
            std::vector<double> scores(n), labels(n);
            for (std::size_t i = 0; i < n; ++i) {
                scores[i] = static_cast<double>(rng.nextU64() % 8) / 7.0;
                labels[i] = rng.uniform() < 0.5 ? 0.0 : 1.0;
            }
            labels[0] = 1.0;
            labels[n - 1] = 0.0;
            const auto roc = rocAndAuc(scores, labels);
            CHECK(roc.auc == Catch::Approx(oracles::pairwiseConcordance(scores, labels))
                                 .epsilon(1e-12));
            // Curve coordinates are non-decreasing.
            for (std::size_t k = 1; k < roc.points.size(); ++k) {
                CHECK(roc.points[k].first >= roc.points[k - 1].first);
                CHECK(roc.points[k].second >= roc.points[k - 1].second);
            }
        }
    }
    SECTION("independent labels give AUC near one half") {
        Rng rng(606);
        const std::size_t n = 4000;
        std::vector<double> scores(n), labels(n);
        for (std::size_t i = 0; i < n; ++i) {
            scores[i] = rng.uniform();
            labels[i] = rng.uniform() < 0.5 ? 1.0 : 0.0;
        }
        const auto roc = rocAndAuc(scores, labels);
        // sigma ~ sqrt((nPos+nNeg+1)/(12*nPos*nNeg)) ~ 0.0091 at n=4000.
        CHECK(std::abs(roc.auc - 0.5) < 3.0 * 0.0091);
    }
    SECTION("invariant under strictly increasing score transforms") {
        const std::vector<double> scores{-3.0, -1.0, 0.5, 0.5, 2.0, 4.0};
        const std::vector<double> labels{0.0, 1.0, 0.0, 1.0, 1.0, 0.0};
        const double base = rocAndAuc(scores, labels).auc;
        std::vector<double> expScores(scores.size()), affineScores(scores.size());
        for (std::size_t i = 0; i < scores.size(); ++i) {
            expScores[i] = std::exp(scores[i]);
            affineScores[i] = 2.0 * scores[i] + 3.0;
        }
        CHECK(rocAndAuc(expScores, labels).auc == base);
        CHECK(rocAndAuc(affineScores, labels).auc == base);
    }
    SECTION("single-class input") {
        CHECK_THROWS_AS(rocAndAuc(std::vector<double>{1.0, 2.0},
                                  std::vector<double>{1.0, 1.0}),
                        DataError);
    }
}

TEST_CASE("normalizeScores") {
    CHECK(normalizeScores(std::vector<double>{-2.0, 0.0, 2.0}) ==
          std::vector<double>{0.0, 0.5, 1.0});
    CHECK(normalizeScores(std::vector<double>{5.0}) == std::vector<double>{0.5});
    CHECK(normalizeScores(std::vector<double>{1.0, 1.0, 1.0}) ==
          std::vector<double>{0.5, 0.5, 0.5});
    CHECK_THROWS_AS(normalizeScores(std::vector<double>{}), DataError);
}

TEST_CASE("calibrateSeries assembles a full report") {
    Rng rng(99);
    const std::size_t n = 500;
    std::vector<double> estimates(n), labels(n);
    for (std::size_t i = 0; i < n; ++i) {
        estimates[i] = rng.uniform();
        labels[i] = rng.uniform() < estimates[i] ? 1.0 : 0.0;
    }
    const auto report = calibrateSeries("synthetic", estimates, labels, 10);
    CHECK(report.method == "synthetic");
    CHECK(report.calibrationScore >= 0.0);
    CHECK(report.calibrationScore < 0.2); // well-calibrated by construction
    CHECK(report.roc.auc > 0.5);
    std::size_t total = 0;
    for (const auto& b : report.binPoints) total += b.binCount;
    CHECK(total == n);
    for (std::size_t v = 1; v < report.isotonic.values.size(); ++v)
        CHECK(report.isotonic.values[v] >= report.isotonic.values[v - 1]);
}
