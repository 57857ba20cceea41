#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <limits>
#include <list>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ipp/dataset.hpp"
#include "ipp/errors.hpp"
#include "ipp/kernel.hpp"
#include "ipp/text.hpp"

namespace ipp {

// Per-instance penalties actually applied during training (any z multipliers
// already folded in by the caller).
struct PenaltyConfig {
    double cPlus = 1.0;
    double cMinus = 1.0;
};

struct SolverDiagnostics {
    std::size_t iterations = 0;
    double maxKktViolation = 0.0;
    double dualObjective = 0.0;
    double primalObjective = 0.0;
    double dualityGap = 0.0;
    double tolerance = 0.0;
    std::vector<double> slacks;
};

struct ConvergenceError : Error {
    SolverDiagnostics diagnostics;
    ConvergenceError(const std::string& msg, SolverDiagnostics diag)
        : Error(msg), diagnostics(std::move(diag)) {}
};

struct SvmModel {
    std::shared_ptr<const Dataset> trainedOn;
    std::vector<double> dualCoeffs; // alpha_i >= 0, one per training row
    double bias = 0.0;
    KernelSpec kernel;
    PenaltyConfig penalties;
    std::vector<std::size_t> supportIndices; // rows with alpha > 0

    // f(x) = sum_i alpha_i y_i K(x_i, x) + b
    double decisionValue(std::span<const double> x) const {
        if (x.size() != trainedOn->dim())
            throw DataError("decisionValue: dimension mismatch");
        double sum = bias;
        for (std::size_t i : supportIndices)
            sum += dualCoeffs[i] * trainedOn->labels[i] *
                   kernelEval(kernel, trainedOn->features.row(i), x);
        return sum;
    }
};

enum class ClassSide { positive, negative, onPlane };

// Exact-zero decision values are measure-zero; the band exists to honor the
// half-vote convention for points sitting on a hyperplane.
inline double adaptiveEpsOnPlane(double decision) {
    return 1e-9 * (1.0 + std::abs(decision));
}

inline ClassSide classifyValue(double decision, double epsOnPlane) {
    if (epsOnPlane < 0.0) throw DataError("classify: epsOnPlane must be >= 0");
    if (decision > epsOnPlane) return ClassSide::positive;
    if (decision < -epsOnPlane) return ClassSide::negative;
    return ClassSide::onPlane;
}

inline ClassSide classify(const SvmModel& m, std::span<const double> x, double epsOnPlane) {
    return classifyValue(m.decisionValue(x), epsOnPlane);
}

inline ClassSide classify(const SvmModel& m, std::span<const double> x) {
    const double f = m.decisionValue(x);
    return classifyValue(f, adaptiveEpsOnPlane(f));
}

// Kernel value cache. Small problems get a dense symmetric Gram matrix (safe
// to share across concurrent solvers); larger ones fall back to an LRU row
// cache (single-consumer). Row spans stay valid for at least the two most
// recent row() calls.
class GramCache {
public:
    static constexpr std::size_t kFullGramLimit = 4000;

    GramCache(const Dataset& ds, const KernelSpec& k, std::size_t lruCapacity = 16)
        : ds_(&ds), kernel_(k), n_(ds.size()),
          lruCapacity_(std::max<std::size_t>(lruCapacity, 2)) {
        diag_.resize(n_);
        for (std::size_t i = 0; i < n_; ++i)
            diag_[i] = kernelEval(kernel_, ds_->features.row(i), ds_->features.row(i));
        if (n_ <= kFullGramLimit) {
            full_.resize(n_ * n_);
            for (std::size_t i = 0; i < n_; ++i) {
                full_[i * n_ + i] = diag_[i];
                for (std::size_t j = 0; j < i; ++j) {
                    const double v =
                        kernelEval(kernel_, ds_->features.row(i), ds_->features.row(j));
                    full_[i * n_ + j] = v;
                    full_[j * n_ + i] = v;
                }
            }
        }
    }

    std::size_t size() const { return n_; }
    bool fullyCached() const { return !full_.empty(); }
    double diag(std::size_t i) const { return diag_[i]; }

    std::span<const double> row(std::size_t i) const {
        if (fullyCached()) return {full_.data() + i * n_, n_};
        if (auto it = index_.find(i); it != index_.end()) {
            lru_.splice(lru_.begin(), lru_, it->second);
            return {it->second->second.data(), n_};
        }
        if (lru_.size() >= lruCapacity_) {
            index_.erase(lru_.back().first);
            lru_.pop_back();
        }
        std::vector<double> values(n_);
        for (std::size_t j = 0; j < n_; ++j)
            values[j] = kernelEval(kernel_, ds_->features.row(i), ds_->features.row(j));
        lru_.emplace_front(i, std::move(values));
        index_[i] = lru_.begin();
        return {lru_.front().second.data(), n_};
    }

private:
    const Dataset* ds_;
    KernelSpec kernel_;
    std::size_t n_;
    std::size_t lruCapacity_;
    std::vector<double> diag_;
    std::vector<double> full_;
    mutable std::list<std::pair<std::size_t, std::vector<double>>> lru_;
    mutable std::unordered_map<std::size_t, decltype(lru_)::iterator> index_;
};

struct TrainResult {
    SvmModel model;
    SolverDiagnostics diagnostics;
};

namespace detail {

// Per-point KKT violation for the dual box problem, in decision-value space.
inline double kktViolation(double alpha, double bound, int y, double decision) {
    const double r = y * decision - 1.0;
    if (alpha <= 0.0) return std::max(0.0, -r);
    if (alpha >= bound) return std::max(0.0, r);
    return std::abs(r);
}

// Fills diagnostics from per-point decision values. wGram = alpha' Q alpha
// must be computed by the caller against the same alpha.
inline SolverDiagnostics diagnosticsFromDecisions(
    const Dataset& ds, const PenaltyConfig& p, const std::vector<double>& alpha,
    const std::vector<double>& decisions, double wGram, std::size_t iterations,
    double tol) {
    SolverDiagnostics diag;
    diag.iterations = iterations;
    diag.tolerance = tol;
    diag.slacks.resize(ds.size());
    double penalizedSlack = 0.0;
    double alphaSum = 0.0;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        const int y = ds.labels[i];
        const double bound = y > 0 ? p.cPlus : p.cMinus;
        diag.slacks[i] = std::max(0.0, 1.0 - y * decisions[i]);
        penalizedSlack += bound * diag.slacks[i];
        alphaSum += alpha[i];
        diag.maxKktViolation =
            std::max(diag.maxKktViolation, kktViolation(alpha[i], bound, y, decisions[i]));
    }
    diag.primalObjective = 0.5 * wGram + penalizedSlack;
    diag.dualObjective = alphaSum - 0.5 * wGram;
    diag.dualityGap = diag.primalObjective - diag.dualObjective;
    return diag;
}

} // namespace detail

// Trains the class-weighted soft-margin SVM by two-variable decomposition
// with maximal-violating-pair selection. Converges when the pairwise KKT
// violation is within tol AND the duality gap is within tol*(1+|dual|).
// sharedGram, when given, must have been built on the same dataset and kernel.
inline TrainResult trainWeightedSvm(std::shared_ptr<const Dataset> ds,
                                    const KernelSpec& kernel, const PenaltyConfig& p,
                                    double tol = 1e-3, std::size_t maxIter = 10'000'000,
                                    const GramCache* sharedGram = nullptr) {
    if (!ds) throw DataError("trainWeightedSvm: null dataset");
    validateDataset(*ds);
    validateKernel(kernel);
    if (!(tol > 0.0)) throw DataError("trainWeightedSvm: tol must be positive");
    if (!(p.cPlus > 0.0) || !(p.cMinus > 0.0))
        throw DataError("trainWeightedSvm: penalties must be positive");
    const std::size_t n = ds->size();
    if (ds->countLabel(1) == 0 || ds->countLabel(-1) == 0)
        throw DataError("trainWeightedSvm: training requires points of both classes");

    std::optional<GramCache> ownGram;
    if (!sharedGram) ownGram.emplace(*ds, kernel);
    const GramCache& gram = sharedGram ? *sharedGram : *ownGram;

    const auto& y = ds->labels;
    auto boundOf = [&](std::size_t i) { return y[i] > 0 ? p.cPlus : p.cMinus; };

    std::vector<double> alpha(n, 0.0);
    std::vector<double> grad(n, -1.0); // gradient of 0.5 a'Qa - e'a
    std::vector<double> decisions(n);

    const double inf = std::numeric_limits<double>::infinity();
    std::size_t iterations = 0;
    double bias = 0.0;
    SolverDiagnostics diag;
    bool converged = false;

    while (true) {
        // Maximal violating pair.
        long up = -1, low = -1;
        double upValue = -inf, lowValue = inf;
        for (std::size_t k = 0; k < n; ++k) {
            const double v = -y[k] * grad[k];
            const bool inUp = y[k] > 0 ? alpha[k] < boundOf(k) : alpha[k] > 0.0;
            const bool inLow = y[k] > 0 ? alpha[k] > 0.0 : alpha[k] < boundOf(k);
            if (inUp && v > upValue) {
                upValue = v;
                up = static_cast<long>(k);
            }
            if (inLow && v < lowValue) {
                lowValue = v;
                low = static_cast<long>(k);
            }
        }
        const double violation = (up >= 0 && low >= 0) ? upValue - lowValue : 0.0;

        // Bias: mean over interior support vectors, else midpoint of the
        // feasible interval.
        auto assess = [&]() {
            double interiorSum = 0.0;
            std::size_t interiorCount = 0;
            for (std::size_t k = 0; k < n; ++k)
                if (alpha[k] > 0.0 && alpha[k] < boundOf(k)) {
                    interiorSum += -y[k] * grad[k];
                    ++interiorCount;
                }
            if (interiorCount > 0)
                bias = interiorSum / static_cast<double>(interiorCount);
            else if (up >= 0 && low >= 0)
                bias = 0.5 * (upValue + lowValue);
            else
                bias = up >= 0 ? upValue : (low >= 0 ? lowValue : 0.0);

            double wGram = 0.0;
            for (std::size_t k = 0; k < n; ++k) {
                decisions[k] = y[k] * (grad[k] + 1.0) + bias;
                wGram += alpha[k] * (grad[k] + 1.0);
            }
            diag = detail::diagnosticsFromDecisions(*ds, p, alpha, decisions, wGram,
                                                    iterations, tol);
        };

        if (violation <= tol) {
            assess();
            if (diag.dualityGap <= tol * (1.0 + std::abs(diag.dualObjective))) {
                converged = true;
                break;
            }
            if (violation <= 0.0) break; // exact KKT; nothing left to improve
        }

        if (iterations >= maxIter) {
            assess();
            break;
        }

        const std::size_t i = static_cast<std::size_t>(up);
        const std::size_t j = static_cast<std::size_t>(low);
        const auto rowI = gram.row(i);
        const auto rowJ = gram.row(j);

        double quad = gram.diag(i) + gram.diag(j) - 2.0 * rowI[j];
        if (quad <= 0.0) quad = 1e-12;
        const double capI = y[i] > 0 ? boundOf(i) - alpha[i] : alpha[i];
        const double capJ = y[j] > 0 ? alpha[j] : boundOf(j) - alpha[j];
        const double step = std::min({violation / quad, capI, capJ});

        const double oldAi = alpha[i];
        const double oldAj = alpha[j];
        alpha[i] = std::clamp(alpha[i] + y[i] * step, 0.0, boundOf(i));
        alpha[j] = std::clamp(alpha[j] - y[j] * step, 0.0, boundOf(j));
        const double deltaI = alpha[i] - oldAi;
        const double deltaJ = alpha[j] - oldAj;
        for (std::size_t k = 0; k < n; ++k)
            grad[k] += y[k] * (y[i] * rowI[k] * deltaI + y[j] * rowJ[k] * deltaJ);
        ++iterations;
    }

    if (!converged)
        throw ConvergenceError(
            "SMO did not reach tolerance " + formatDouble(tol) + " within " +
                std::to_string(maxIter) + " iterations (duality gap " +
                formatDouble(diag.dualityGap) + ")",
            diag);

    SvmModel model;
    model.trainedOn = std::move(ds);
    model.dualCoeffs = std::move(alpha);
    model.bias = bias;
    model.kernel = kernel;
    model.penalties = p;
    for (std::size_t k = 0; k < n; ++k)
        if (model.dualCoeffs[k] > 0.0) model.supportIndices.push_back(k);
    return {std::move(model), std::move(diag)};
}

// Recomputes KKT diagnostics for a model against its retained training set.
inline SolverDiagnostics checkKkt(const SvmModel& m, double tol) {
    const Dataset& ds = *m.trainedOn;
    const std::size_t n = ds.size();
    std::vector<double> decisions(n, m.bias);
    for (std::size_t j : m.supportIndices) {
        const double coeff = m.dualCoeffs[j] * ds.labels[j];
        for (std::size_t k = 0; k < n; ++k)
            decisions[k] +=
                coeff * kernelEval(m.kernel, ds.features.row(j), ds.features.row(k));
    }
    double wGram = 0.0;
    for (std::size_t k = 0; k < n; ++k)
        wGram += m.dualCoeffs[k] * ds.labels[k] * (decisions[k] - m.bias);
    return detail::diagnosticsFromDecisions(ds, m.penalties, m.dualCoeffs, decisions,
                                            wGram, 0, tol);
}

// Text round-trip: kernel, penalties, bias, and one row per support vector
// (original index, label, alpha, coordinates). Reload rebuilds a reduced
// dataset of support vectors; decision values are preserved exactly.
inline void saveModel(const SvmModel& m, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write file: " + path);
    out << "ipp-model v1\n";
    out << "kernel " << kernelName(m.kernel.kind);
    if (m.kernel.kind == KernelKind::rbf) out << ' ' << formatDouble(m.kernel.gamma);
    out << '\n';
    out << "penalties " << formatDouble(m.penalties.cPlus) << ' '
        << formatDouble(m.penalties.cMinus) << '\n';
    out << "bias " << formatDouble(m.bias) << '\n';
    out << "support " << m.supportIndices.size() << ' ' << m.trainedOn->dim() << '\n';
    for (std::size_t i : m.supportIndices) {
        out << i << ' ' << m.trainedOn->labels[i] << ' ' << formatDouble(m.dualCoeffs[i]);
        for (double v : m.trainedOn->features.row(i)) out << ' ' << formatDouble(v);
        out << '\n';
    }
}

inline SvmModel loadModel(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open file: " + path);
    std::string line;
    auto nextFields = [&]() {
        if (!std::getline(in, line)) throw DataError(path + ": truncated model file");
        return splitFields(line);
    };
    if (!std::getline(in, line) || trim(line) != "ipp-model v1")
        throw DataError(path + ": not an ipp model file");

    SvmModel m;
    auto kernelFields = nextFields();
    if (kernelFields.size() < 2 || kernelFields[0] != "kernel")
        throw DataError(path + ": missing kernel line");
    m.kernel.kind = kernelKindFromName(kernelFields[1]);
    if (m.kernel.kind == KernelKind::rbf) {
        if (kernelFields.size() != 3) throw DataError(path + ": rbf kernel needs gamma");
        m.kernel.gamma = parseDouble(kernelFields[2]).value_or(0.0);
    }
    validateKernel(m.kernel);

    auto penaltyFields = nextFields();
    if (penaltyFields.size() != 3 || penaltyFields[0] != "penalties")
        throw DataError(path + ": missing penalties line");
    m.penalties.cPlus = parseDouble(penaltyFields[1]).value_or(0.0);
    m.penalties.cMinus = parseDouble(penaltyFields[2]).value_or(0.0);

    auto biasFields = nextFields();
    if (biasFields.size() != 2 || biasFields[0] != "bias")
        throw DataError(path + ": missing bias line");
    m.bias = parseDouble(biasFields[1]).value_or(0.0);

    auto supportFields = nextFields();
    if (supportFields.size() != 3 || supportFields[0] != "support")
        throw DataError(path + ": missing support line");
    const auto count = parseLong(supportFields[1]);
    const auto dim = parseLong(supportFields[2]);
    if (!count || !dim || *count < 0 || *dim < 1)
        throw DataError(path + ": bad support header");

    auto sv = std::make_shared<Dataset>();
    sv->features = Matrix(static_cast<std::size_t>(*count), static_cast<std::size_t>(*dim));
    sv->labels.resize(static_cast<std::size_t>(*count));
    sv->ids.resize(static_cast<std::size_t>(*count));
    m.dualCoeffs.resize(static_cast<std::size_t>(*count));
    for (std::size_t r = 0; r < static_cast<std::size_t>(*count); ++r) {
        auto fields = nextFields();
        if (fields.size() != 3 + static_cast<std::size_t>(*dim))
            throw DataError(path + ": bad support row");
        sv->ids[r] = parseLong(fields[0]).value_or(-1);
        sv->labels[r] = static_cast<int>(parseLong(fields[1]).value_or(0));
        const auto a = parseDouble(fields[2]);
        if (!a) throw DataError(path + ": bad alpha");
        m.dualCoeffs[r] = *a;
        for (std::size_t c = 0; c < static_cast<std::size_t>(*dim); ++c) {
            const auto v = parseDouble(fields[3 + c]);
            if (!v) throw DataError(path + ": bad coordinate");
            sv->features.at(r, c) = *v;
        }
        m.supportIndices.push_back(r);
    }
    validateDataset(*sv);
    m.trainedOn = std::move(sv);
    return m;
}

} // namespace ipp
