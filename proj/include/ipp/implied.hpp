#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "ipp/dataset.hpp"
#include "ipp/errors.hpp"
#include "ipp/svm.hpp"
#include "ipp/text.hpp"
#include "ipp/weighting.hpp"

namespace ipp {

enum class GridMode { exact, balancedAssumption };

inline std::string gridModeName(GridMode mode) {
    return mode == GridMode::exact ? "exact" : "balanced";
}

inline GridMode gridModeFromName(const std::string& name) {
    if (name == "exact") return GridMode::exact;
    if (name == "balanced" || name == "balancedAssumption") return GridMode::balancedAssumption;
    throw DataError("unknown grid mode '" + name + "'");
}

// One voter: a trained model at its implied posterior level, or one of the
// two fictitious endpoints (level 0 votes negative, level 1 votes positive).
struct GridEntry {
    double level = 0.0;
    std::optional<WeightPair> weights; // absent for fictitious entries
    std::optional<SvmModel> model;     // absent for fictitious entries
    bool fictitious = false;
};

// Models at levels j/(K+1), j=1..K, plus fictitious endpoints, forming a
// uniform (K+2)-point lattice on [0,1]. Immutable once built; evaluation is
// safe to run concurrently.
struct HyperplaneGrid {
    std::vector<GridEntry> entries; // ascending by level; ends are fictitious
    EffectiveCounts baseCounts;     // counts the weight pairs were derived from
    KernelSpec kernel;
    PenaltyConfig basePenalties;
    GridMode mode = GridMode::exact;

    std::size_t realCount() const { return entries.size() - 2; }
};

struct ImpliedEstimate {
    double value = 0.0;
    std::size_t positiveVotes = 0; // among real entries
    std::size_t onPlaneCount = 0;
    std::vector<ClassSide> perLevelClassification; // real entries, ascending
    bool degenerate = false;
};

// Builds the K-model grid. mode=exact derives each weight pair by inverting
// the general level formula against the dataset's actual effective counts;
// mode=balancedAssumption uses (z+, z-) = (p, 1-p) as if the counts were
// balanced. Entries may be trained on several threads (threads=0 picks the
// hardware count); results are identical to sequential training.
inline HyperplaneGrid buildHyperplaneGrid(std::shared_ptr<const Dataset> train,
                                          const KernelSpec& kernel,
                                          const PenaltyConfig& base, std::size_t K,
                                          GridMode mode, double tol = 1e-3,
                                          std::size_t maxIter = 10'000'000,
                                          unsigned threads = 1) {
    if (!train) throw DataError("buildHyperplaneGrid: null dataset");
    if (K < 1) throw DataError("buildHyperplaneGrid: K must be >= 1");
    const std::size_t nPlus = train->countLabel(1);
    const std::size_t nMinus = train->countLabel(-1);
    if (nPlus == 0 || nMinus == 0)
        throw DataError("buildHyperplaneGrid: training set needs both classes");

    HyperplaneGrid grid;
    grid.kernel = kernel;
    grid.basePenalties = base;
    grid.mode = mode;
    const auto actual = effectiveCounts(base.cPlus, nPlus, base.cMinus, nMinus);
    if (mode == GridMode::balancedAssumption) {
        const double half = 0.5 * actual.total();
        grid.baseCounts = EffectiveCounts{half, half};
    } else {
        grid.baseCounts = actual;
    }

    std::vector<double> levels(K);
    std::vector<WeightPair> pairs(K);
    for (std::size_t j = 1; j <= K; ++j) {
        const double level = static_cast<double>(j) / static_cast<double>(K + 1);
        levels[j - 1] = level;
        if (mode == GridMode::balancedAssumption)
            pairs[j - 1] = WeightPair{level, 1.0 - level};
        else
            pairs[j - 1] =
                weightPairForZPlus(zPlusForTargetProbability(level, grid.baseCounts),
                                   grid.baseCounts);
    }

    std::vector<std::optional<SvmModel>> models(K);
    std::vector<std::string> failures(K);
    std::vector<SolverDiagnostics> failureDiagnostics(K);
    std::optional<GramCache> shared;
    if (train->size() <= GramCache::kFullGramLimit) shared.emplace(*train, kernel);

    auto trainLevel = [&](std::size_t idx) {
        const PenaltyConfig applied{pairs[idx].zPlus * base.cPlus,
                                    pairs[idx].zMinus * base.cMinus};
        try {
            models[idx] = trainWeightedSvm(train, kernel, applied, tol, maxIter,
                                           shared ? &*shared : nullptr)
                              .model;
        } catch (const ConvergenceError& e) {
            failures[idx] = e.what();
            failureDiagnostics[idx] = e.diagnostics;
        }
    };

    unsigned workerCount = threads == 0 ? std::thread::hardware_concurrency() : threads;
    if (workerCount <= 1 || K == 1) {
        for (std::size_t idx = 0; idx < K; ++idx) trainLevel(idx);
    } else {
        workerCount = std::min<unsigned>(workerCount, static_cast<unsigned>(K));
        std::vector<std::thread> workers;
        for (unsigned w = 0; w < workerCount; ++w)
            workers.emplace_back([&, w] {
                for (std::size_t idx = w; idx < K; idx += workerCount) trainLevel(idx);
            });
        for (auto& worker : workers) worker.join();
    }
    for (std::size_t idx = 0; idx < K; ++idx)
        if (!models[idx])
            throw ConvergenceError("grid level " + formatDouble(levels[idx]) +
                                       " failed to converge: " + failures[idx],
                                   failureDiagnostics[idx]);

    grid.entries.push_back(GridEntry{0.0, std::nullopt, std::nullopt, true});
    for (std::size_t idx = 0; idx < K; ++idx)
        grid.entries.push_back(
            GridEntry{levels[idx], pairs[idx], std::move(models[idx]), false});
    grid.entries.push_back(GridEntry{1.0, std::nullopt, std::nullopt, true});
    return grid;
}

namespace detail {

// Degeneracy: the classification sequence over ascending levels (onPlane
// entries skipped) is non-monotone, i.e. not all-negative then all-positive.
inline bool isDegenerate(const std::vector<ClassSide>& classifications) {
    bool seenPositive = false;
    for (ClassSide side : classifications) {
        if (side == ClassSide::positive) seenPositive = true;
        else if (side == ClassSide::negative && seenPositive) return true;
    }
    return false;
}

} // namespace detail

inline ImpliedEstimate voteEstimate(const HyperplaneGrid& grid, std::span<const double> x,
                                    double epsOnPlane) {
    ImpliedEstimate est;
    est.perLevelClassification.reserve(grid.realCount());
    for (const auto& entry : grid.entries) {
        if (entry.fictitious) continue;
        const double f = entry.model->decisionValue(x);
        const double eps = epsOnPlane >= 0.0 ? epsOnPlane : adaptiveEpsOnPlane(f);
        const ClassSide side = classifyValue(f, eps);
        est.perLevelClassification.push_back(side);
        if (side == ClassSide::positive) ++est.positiveVotes;
        else if (side == ClassSide::onPlane) ++est.onPlaneCount;
    }
    const std::size_t K = grid.realCount();
    // The fictitious level-1 entry always votes positive (the +1), level-0
    // always negative; onPlane entries count half.
    est.value = (static_cast<double>(est.positiveVotes) + 1.0 +
                 0.5 * static_cast<double>(est.onPlaneCount)) /
                static_cast<double>(K + 2);
    est.degenerate = detail::isDegenerate(est.perLevelClassification);
    return est;
}

inline ImpliedEstimate voteEstimate(const HyperplaneGrid& grid, std::span<const double> x) {
    return voteEstimate(grid, x, -1.0); // per-model adaptive on-plane band
}

inline std::vector<ImpliedEstimate> estimateBatch(const HyperplaneGrid& grid,
                                                  const Dataset& test,
                                                  double epsOnPlane = -1.0) {
    std::vector<ImpliedEstimate> out;
    out.reserve(test.size());
    for (std::size_t r = 0; r < test.size(); ++r)
        out.push_back(voteEstimate(grid, test.features.row(r), epsOnPlane));
    return out;
}

// Sign-change bracket: a pair of adjacent grid levels (fictitious endpoints
// included) between which the classification flips.
struct LevelBracket {
    double low = 0.0;
    double high = 1.0;
};

struct PointDegeneracy {
    std::size_t index = 0;
    bool degenerate = false;
    LevelBracket firstChange;
    LevelBracket lastChange; // == firstChange for non-degenerate points
};

struct DegeneracySummary {
    std::size_t degenerateCount = 0;
    std::vector<std::size_t> degenerateIndices;
    std::vector<PointDegeneracy> points;
};

inline DegeneracySummary degeneracyReport(const HyperplaneGrid& grid, const Dataset& test,
                                          double epsOnPlane = -1.0) {
    DegeneracySummary summary;
    summary.points.reserve(test.size());
    const auto estimates = estimateBatch(grid, test, epsOnPlane);
    for (std::size_t r = 0; r < test.size(); ++r) {
        const auto& est = estimates[r];
        PointDegeneracy pd;
        pd.index = r;
        pd.degenerate = est.degenerate;

        // Full voting sequence with the fictitious endpoints, onPlane skipped.
        std::vector<std::pair<double, bool>> votes; // (level, isPositive)
        votes.emplace_back(0.0, false);
        for (std::size_t k = 0; k < est.perLevelClassification.size(); ++k) {
            const ClassSide side = est.perLevelClassification[k];
            if (side == ClassSide::onPlane) continue;
            votes.emplace_back(grid.entries[k + 1].level, side == ClassSide::positive);
        }
        votes.emplace_back(1.0, true);

        bool first = true;
        for (std::size_t k = 0; k + 1 < votes.size(); ++k) {
            if (votes[k].second == votes[k + 1].second) continue;
            const LevelBracket bracket{votes[k].first, votes[k + 1].first};
            if (first) {
                pd.firstChange = bracket;
                first = false;
            }
            pd.lastChange = bracket;
        }
        if (pd.degenerate) {
            ++summary.degenerateCount;
            summary.degenerateIndices.push_back(r);
        }
        summary.points.push_back(pd);
    }
    return summary;
}

// --- grid serialization ------------------------------------------------

// Writes dir/<stem>.grid plus one model file per real entry.
inline std::string saveGrid(const HyperplaneGrid& grid, const std::string& dir,
                            const std::string& stem) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    const fs::path base(dir);
    const std::string manifestName = stem + ".grid";
    std::ofstream out(base / manifestName);
    if (!out) throw DataError("cannot write grid manifest in " + dir);
    out << "ipp-grid v1\n";
    out << "mode " << gridModeName(grid.mode) << '\n';
    out << "kernel " << kernelName(grid.kernel.kind);
    if (grid.kernel.kind == KernelKind::rbf) out << ' ' << formatDouble(grid.kernel.gamma);
    out << '\n';
    out << "base-penalties " << formatDouble(grid.basePenalties.cPlus) << ' '
        << formatDouble(grid.basePenalties.cMinus) << '\n';
    out << "counts " << formatDouble(grid.baseCounts.ePlus) << ' '
        << formatDouble(grid.baseCounts.eMinus) << '\n';
    out << "K " << grid.realCount() << '\n';
    std::size_t realIndex = 0;
    for (const auto& entry : grid.entries) {
        if (entry.fictitious) {
            out << "entry " << formatDouble(entry.level) << " fictitious\n";
            continue;
        }
        const std::string modelName =
            stem + "_" + std::to_string(realIndex++) + ".model";
        saveModel(*entry.model, (base / modelName).string());
        out << "entry " << formatDouble(entry.level) << ' '
            << formatDouble(entry.weights->zPlus) << ' '
            << formatDouble(entry.weights->zMinus) << ' ' << modelName << '\n';
    }
    return (base / manifestName).string();
}

inline HyperplaneGrid loadGrid(const std::string& manifestPath) {
    namespace fs = std::filesystem;
    std::ifstream in(manifestPath);
    if (!in) throw DataError("cannot open grid manifest: " + manifestPath);
    const fs::path dir = fs::path(manifestPath).parent_path();
    std::string line;
    if (!std::getline(in, line) || trim(line) != "ipp-grid v1")
        throw DataError(manifestPath + ": not an ipp grid manifest");

    HyperplaneGrid grid;
    while (std::getline(in, line)) {
        const auto fields = splitFields(line);
        if (fields.empty()) continue;
        if (fields[0] == "mode" && fields.size() == 2) {
            grid.mode = gridModeFromName(fields[1]);
        } else if (fields[0] == "kernel" && fields.size() >= 2) {
            grid.kernel.kind = kernelKindFromName(fields[1]);
            if (grid.kernel.kind == KernelKind::rbf)
                grid.kernel.gamma = parseDouble(fields.at(2)).value_or(0.0);
        } else if (fields[0] == "base-penalties" && fields.size() == 3) {
            grid.basePenalties.cPlus = parseDouble(fields[1]).value_or(0.0);
            grid.basePenalties.cMinus = parseDouble(fields[2]).value_or(0.0);
        } else if (fields[0] == "counts" && fields.size() == 3) {
            grid.baseCounts.ePlus = parseDouble(fields[1]).value_or(0.0);
            grid.baseCounts.eMinus = parseDouble(fields[2]).value_or(0.0);
        } else if (fields[0] == "entry") {
            GridEntry entry;
            entry.level = parseDouble(fields.at(1)).value_or(-1.0);
            if (fields.size() == 3 && fields[2] == "fictitious") {
                entry.fictitious = true;
            } else if (fields.size() == 5) {
                entry.weights =
                    WeightPair{parseDouble(fields[2]).value_or(0.0),
                               parseDouble(fields[3]).value_or(0.0)};
                entry.model = loadModel((dir / fields[4]).string());
            } else {
                throw DataError(manifestPath + ": malformed entry line");
            }
            grid.entries.push_back(std::move(entry));
        }
    }
    if (grid.entries.size() < 3 || !grid.entries.front().fictitious ||
        !grid.entries.back().fictitious)
        throw DataError(manifestPath + ": grid must have fictitious endpoints and >= 1 model");
    for (std::size_t i = 1; i < grid.entries.size(); ++i)
        if (!(grid.entries[i].level > grid.entries[i - 1].level))
            throw DataError(manifestPath + ": entry levels must be strictly increasing");
    return grid;
}

// Estimates CSV: id,value,positiveVotes,onPlaneCount,degenerate.
inline void writeEstimatesCsv(const std::string& path, const Dataset& test,
                              const std::vector<ImpliedEstimate>& estimates) {
    if (test.size() != estimates.size())
        throw DataError("writeEstimatesCsv: size mismatch");
    std::ofstream out(path);
    if (!out) throw DataError("cannot write file: " + path);
    out << "id,value,positiveVotes,onPlaneCount,degenerate\n";
    for (std::size_t r = 0; r < estimates.size(); ++r) {
        const auto& e = estimates[r];
        out << test.ids[r] << ',' << formatDouble(e.value) << ',' << e.positiveVotes
            << ',' << e.onPlaneCount << ',' << (e.degenerate ? 1 : 0) << '\n';
    }
}

// Per-level classification table: one row per point, one column per real
// level, cells in {p, n, o}.
inline void writeVotesCsv(const std::string& path, const Dataset& test,
                          const HyperplaneGrid& grid,
                          const std::vector<ImpliedEstimate>& estimates) {
    if (test.size() != estimates.size()) throw DataError("writeVotesCsv: size mismatch");
    std::ofstream out(path);
    if (!out) throw DataError("cannot write file: " + path);
    out << "id";
    for (const auto& entry : grid.entries)
        if (!entry.fictitious) out << ",level_" << formatDouble(entry.level);
    out << '\n';
    for (std::size_t r = 0; r < estimates.size(); ++r) {
        out << test.ids[r];
        for (ClassSide side : estimates[r].perLevelClassification)
            out << ',' << (side == ClassSide::positive ? 'p'
                           : side == ClassSide::negative ? 'n' : 'o');
        out << '\n';
    }
}

} // namespace ipp
