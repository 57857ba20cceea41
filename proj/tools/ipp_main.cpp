// ipp: implied posterior probabilities for binary SVMs.
//
// Subcommands: gen-data, train, grid, estimate, calibrate, compare, roc.
// Every command is deterministic given its flags (all randomness flows from
// --seed), so reruns produce byte-identical outputs.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ipp/calibrate.hpp"
#include "ipp/dataset.hpp"
#include "ipp/implied.hpp"
#include "ipp/report.hpp"
#include "ipp/svm.hpp"
#include "ipp/text.hpp"
#include "ipp/weighting.hpp"

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitNoConvergence = 4;

struct DataOptions {
    std::string path;
    int labelColumn = 0;
    std::string positiveLabel = "1";
};

void addDataOptions(CLI::App* cmd, DataOptions& opts, const std::string& flag,
                    const std::string& what, bool required = true) {
    auto* opt = cmd->add_option(flag, opts.path, what + " CSV file");
    if (required) opt->required();
    cmd->add_option("--label-col", opts.labelColumn,
                    "label column index; negative counts from the end")
        ->capture_default_str();
    cmd->add_option("--positive-label", opts.positiveLabel,
                    "raw label token mapped to +1")
        ->capture_default_str();
}

ipp::Dataset loadData(const DataOptions& opts) {
    return ipp::loadCsv(opts.path, opts.labelColumn, opts.positiveLabel);
}

struct KernelOptions {
    std::string kind = "linear";
    double gamma = 0.001;
};

void addKernelOptions(CLI::App* cmd, KernelOptions& opts) {
    cmd->add_option("--kernel", opts.kind, "kernel: linear or rbf")
        ->check(CLI::IsMember({"linear", "rbf"}))
        ->capture_default_str();
    cmd->add_option("--gamma", opts.gamma, "rbf kernel width")->capture_default_str();
}

ipp::KernelSpec makeKernel(const KernelOptions& opts) {
    ipp::KernelSpec k;
    k.kind = ipp::kernelKindFromName(opts.kind);
    if (k.kind == ipp::KernelKind::rbf) k.gamma = opts.gamma;
    ipp::validateKernel(k);
    return k;
}

struct SolverOptions {
    double tol = 1e-3;
    std::size_t maxIter = 10'000'000;
    unsigned threads = 0; // 0 = hardware concurrency
};

void addSolverOptions(CLI::App* cmd, SolverOptions& opts, bool withThreads) {
    cmd->add_option("--tol", opts.tol, "KKT tolerance")->capture_default_str();
    cmd->add_option("--max-iter", opts.maxIter, "iteration budget per model")
        ->capture_default_str();
    if (withThreads)
        cmd->add_option("--threads", opts.threads,
                        "grid training threads (0 = hardware)")
            ->capture_default_str();
}

// "path[:column]" with a 0-based column index.
std::pair<std::string, std::size_t> parseColumnSpec(const std::string& spec,
                                                    std::size_t defaultCol) {
    const auto pos = spec.rfind(':');
    if (pos == std::string::npos || pos == 0) return {spec, defaultCol};
    const auto col = ipp::parseLong(spec.substr(pos + 1));
    if (!col || *col < 0) return {spec, defaultCol};
    return {spec.substr(0, pos), static_cast<std::size_t>(*col)};
}

// Reads one numeric column; a non-numeric first row is treated as a header.
std::vector<double> readColumn(const std::string& spec, std::size_t defaultCol) {
    const auto [path, col] = parseColumnSpec(spec, defaultCol);
    std::ifstream in(path);
    if (!in) throw ipp::DataError("cannot open file: " + path);
    std::vector<double> values;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (ipp::trim(line).empty()) continue;
        const auto fields = ipp::splitFields(line);
        if (col >= fields.size())
            throw ipp::DataError(path + ": column " + std::to_string(col) +
                                 " out of range");
        const auto v = ipp::parseDouble(fields[col]);
        if (!v) {
            if (first) {
                first = false;
                continue; // header
            }
            throw ipp::DataError(path + ": non-numeric value '" + fields[col] + "'");
        }
        first = false;
        values.push_back(*v);
    }
    if (values.empty()) throw ipp::DataError(path + ": no numeric rows");
    return values;
}

ipp::GridMode resolveMode(const std::string& mode, const ipp::PenaltyConfig& base) {
    if (mode == "exact") return ipp::GridMode::exact;
    if (mode == "balanced") return ipp::GridMode::balancedAssumption;
    // auto: the balanced scheme when the caller left both classes at the same
    // base C, the exact budget inversion otherwise.
    return base.cPlus == base.cMinus ? ipp::GridMode::balancedAssumption
                                     : ipp::GridMode::exact;
}

std::vector<double> decisionValues(const ipp::SvmModel& model, const ipp::Dataset& ds) {
    std::vector<double> out(ds.size());
    for (std::size_t r = 0; r < ds.size(); ++r)
        out[r] = model.decisionValue(ds.features.row(r));
    return out;
}

void writeSummary(const std::string& path,
                  const std::vector<std::pair<std::string, std::string>>& entries) {
    std::ofstream out(path);
    if (!out) throw ipp::DataError("cannot write file: " + path);
    for (const auto& [key, value] : entries) out << key << " = " << value << '\n';
}

// --- gen-data ---------------------------------------------------------------

struct GenDataConfig {
    std::string out;
    std::string preset;
    std::size_t nPlus = 10;
    std::size_t nMinus = 10;
    std::vector<double> meanPlus{1.0, 1.0};
    std::vector<double> meanMinus{-1.0, -1.0};
    std::vector<double> covPlus{1.0, 0.6, 1.4};   // [[a,b],[b,c]]
    std::vector<double> covMinus{1.2, -0.5, 0.9};
    std::uint64_t seed = 7;
};

void runGenData(const GenDataConfig& cfg) {
    ipp::GaussianSpec spec;
    spec.meanPlus = cfg.meanPlus;
    spec.meanMinus = cfg.meanMinus;
    auto cov = [](const std::vector<double>& v) {
        ipp::Matrix m(2, 2);
        m.at(0, 0) = v[0];
        m.at(0, 1) = m.at(1, 0) = v[1];
        m.at(1, 1) = v[2];
        return m;
    };
    spec.covPlus = cov(cfg.covPlus);
    spec.covMinus = cov(cfg.covMinus);
    spec.nPlus = cfg.nPlus;
    spec.nMinus = cfg.nMinus;
    spec.seed = cfg.seed;
    ipp::writeCsv(ipp::generateGaussian2D(spec), cfg.out);
    std::cout << "wrote " << cfg.out << " (" << spec.nPlus + spec.nMinus << " rows)\n";
}

// --- train --------------------------------------------------------------------

struct TrainConfig {
    DataOptions data;
    KernelOptions kernel;
    SolverOptions solver;
    double cPlus = 10.0, cMinus = 10.0;
    double zPlus = 0.5, zMinus = 0.5;
    std::string out;
};

void runTrain(const TrainConfig& cfg) {
    auto ds = std::make_shared<ipp::Dataset>(loadData(cfg.data));
    const ipp::PenaltyConfig applied{cfg.zPlus * cfg.cPlus, cfg.zMinus * cfg.cMinus};
    auto [model, diag] = ipp::trainWeightedSvm(ds, makeKernel(cfg.kernel), applied,
                                               cfg.solver.tol, cfg.solver.maxIter);
    ipp::saveModel(model, cfg.out);
    std::cout << "wrote " << cfg.out << ": " << model.supportIndices.size()
              << " support vectors, dual " << ipp::formatDouble(diag.dualObjective)
              << ", gap " << ipp::formatDouble(diag.dualityGap) << ", "
              << diag.iterations << " iterations\n";
}

// --- grid --------------------------------------------------------------------

struct GridConfig {
    DataOptions data;
    KernelOptions kernel;
    SolverOptions solver;
    double cPlus = 10.0, cMinus = 10.0;
    std::size_t K = 99;
    std::string mode = "auto";
    std::string outDir;
    std::string stem = "grid";
};

std::string runGridCore(const GridConfig& cfg, std::shared_ptr<const ipp::Dataset> train) {
    const ipp::PenaltyConfig base{cfg.cPlus, cfg.cMinus};
    const auto grid = ipp::buildHyperplaneGrid(train, makeKernel(cfg.kernel), base,
                                               cfg.K, resolveMode(cfg.mode, base),
                                               cfg.solver.tol, cfg.solver.maxIter,
                                               cfg.solver.threads);
    return ipp::saveGrid(grid, cfg.outDir, cfg.stem);
}

void runGrid(const GridConfig& cfg) {
    auto train = std::make_shared<ipp::Dataset>(loadData(cfg.data));
    const auto manifest = runGridCore(cfg, train);
    std::cout << "wrote " << manifest << " (" << cfg.K << " models + 2 fictitious)\n";
}

// --- estimate ------------------------------------------------------------------

struct EstimateConfig {
    std::string gridManifest;
    DataOptions data;
    std::string out;
    std::string votesOut;
    std::string degeneracyOut;
    double epsOnPlane = -1.0; // adaptive
};

void runEstimate(const EstimateConfig& cfg) {
    const auto grid = ipp::loadGrid(cfg.gridManifest);
    const auto test = loadData(cfg.data);
    const auto estimates = ipp::estimateBatch(grid, test, cfg.epsOnPlane);
    ipp::writeEstimatesCsv(cfg.out, test, estimates);
    if (!cfg.votesOut.empty()) ipp::writeVotesCsv(cfg.votesOut, test, grid, estimates);

    const auto report = ipp::degeneracyReport(grid, test, cfg.epsOnPlane);
    if (!cfg.degeneracyOut.empty()) {
        std::ofstream out(cfg.degeneracyOut);
        if (!out) throw ipp::DataError("cannot write file: " + cfg.degeneracyOut);
        out << "id,degenerate,firstChangeLow,firstChangeHigh,lastChangeLow,lastChangeHigh\n";
        for (const auto& p : report.points)
            out << test.ids[p.index] << ',' << (p.degenerate ? 1 : 0) << ','
                << ipp::formatDouble(p.firstChange.low) << ','
                << ipp::formatDouble(p.firstChange.high) << ','
                << ipp::formatDouble(p.lastChange.low) << ','
                << ipp::formatDouble(p.lastChange.high) << '\n';
    }
    std::cout << "wrote " << cfg.out << "; degenerate " << report.degenerateCount
              << " of " << test.size() << " points\n";
}

// --- calibrate -------------------------------------------------------------------

struct CalibrateConfig {
    DataOptions labels;
    std::string rawSpec;     // path[:col]
    std::string impliedSpec; // path[:col]
    bool noPlatt = false;
    std::size_t bins = 10;
    std::string outPrefix;
    bool svg = false;
};

void emitMethodReport(const std::string& prefix, const ipp::CalibrationReport& report,
                      bool svg) {
    ipp::writeRocCsv(prefix + "_roc.csv", report.roc);
    ipp::writeBinsCsv(prefix + "_bins.csv", report.binPoints);
    ipp::writeIsotonicCsv(prefix + "_iso.csv", report.isotonic);
    if (svg)
        ipp::writeReliabilitySvg(prefix + "_reliability.svg",
                                 report.method + " reliability", report.isotonic,
                                 report.binPoints);
}

void runCalibrate(const CalibrateConfig& cfg) {
    const auto labeled = loadData(cfg.labels);
    const auto labels01 = ipp::labels01FromPm1(labeled.labels);

    std::optional<std::vector<double>> raw, normalized, platt, implied;
    if (!cfg.rawSpec.empty()) {
        raw = readColumn(cfg.rawSpec, 0);
        if (raw->size() != labels01.size())
            throw ipp::DataError("scores/labels length mismatch");
        normalized = ipp::normalizeScores(*raw);
        if (!cfg.noPlatt) {
            const auto params = ipp::fitPlatt(*raw, labeled.labels);
            platt.emplace();
            for (double s : *raw) platt->push_back(ipp::applyPlatt(params, s));
        }
    }
    if (!cfg.impliedSpec.empty()) {
        implied = readColumn(cfg.impliedSpec, 1); // estimates CSV value column
        if (implied->size() != labels01.size())
            throw ipp::DataError("estimates/labels length mismatch");
    }
    if (!raw && !implied)
        throw ipp::DataError("calibrate: need --raw-scores and/or --implied");

    std::vector<std::pair<std::string, std::string>> summary;
    std::vector<ipp::CalibrationReport> reports;
    auto addSeries = [&](const std::string& name, const std::vector<double>& series) {
        auto report = ipp::calibrateSeries(name, series, labels01, cfg.bins);
        summary.emplace_back("calibration_score_" + name,
                             ipp::formatDouble(report.calibrationScore));
        summary.emplace_back("auc_" + name, ipp::formatDouble(report.roc.auc));
        emitMethodReport(cfg.outPrefix + "_" + name, report, cfg.svg);
        reports.push_back(std::move(report));
    };
    if (normalized) addSeries("raw", *normalized);
    if (platt) addSeries("platt", *platt);
    if (implied) addSeries("implied", *implied);

    // Canonical per-point table; isoFit is the isotonic fit of the most
    // refined series present (implied, else platt, else normalized).
    ipp::PointReport table;
    table.ids = labeled.ids;
    table.labels = labeled.labels;
    if (raw) table.rawScore = *raw;
    if (normalized) table.normalizedScore = *normalized;
    if (platt) table.plattEstimate = *platt;
    if (implied) table.impliedEstimate = *implied;
    const auto& isoSource = implied ? *implied : (platt ? *platt : *normalized);
    const auto& isoReport = reports.back();
    for (double v : isoSource) table.isoFit.push_back(isoReport.isotonic(v));
    ipp::writePointReportCsv(cfg.outPrefix + "_report.csv", table);
    writeSummary(cfg.outPrefix + "_summary.txt", summary);
    for (const auto& [key, value] : summary) std::cout << key << " = " << value << '\n';
}

// --- compare -----------------------------------------------------------------

struct CompareConfig {
    DataOptions train;
    DataOptions test;
    std::string dataPath; // single-file alternative, with --split-at
    std::size_t splitAt = 500;
    KernelOptions kernel;
    SolverOptions solver;
    double cPlus = 10.0, cMinus = 10.0;
    std::size_t K = 199;
    std::string mode = "auto";
    std::size_t bins = 10;
    bool noScale = false;
    std::string outDir = "ipp_out";
    bool svg = false;
};

void runCompare(const CompareConfig& cfg) {
    namespace fs = std::filesystem;
    fs::create_directories(cfg.outDir);
    const auto outPath = [&](const std::string& name) {
        return (fs::path(cfg.outDir) / name).string();
    };

    ipp::Dataset trainRaw, testRaw;
    if (!cfg.dataPath.empty()) {
        DataOptions all = cfg.train;
        all.path = cfg.dataPath;
        const auto full = loadData(all);
        auto [a, b] = ipp::splitConsecutive(full, cfg.splitAt);
        trainRaw = std::move(a);
        testRaw = std::move(b);
    } else {
        trainRaw = loadData(cfg.train);
        testRaw = loadData(cfg.test);
    }

    ipp::Dataset trainScaled = trainRaw, testScaled = testRaw;
    if (!cfg.noScale) {
        const auto params = ipp::fitScaling(trainRaw);
        trainScaled = ipp::applyScaling(trainRaw, params);
        testScaled = ipp::applyScaling(testRaw, params);
        ipp::saveScaling(params, outPath("scaling.txt"));
    }
    auto train = std::make_shared<const ipp::Dataset>(std::move(trainScaled));

    // Base model at the (0.5, 0.5) weight pair; Platt is fit on the training
    // split's decision values to keep the test set out of the sigmoid fit.
    const auto kernel = makeKernel(cfg.kernel);
    const ipp::PenaltyConfig base{cfg.cPlus, cfg.cMinus};
    const ipp::PenaltyConfig baseApplied{0.5 * cfg.cPlus, 0.5 * cfg.cMinus};
    auto [baseModel, baseDiag] = ipp::trainWeightedSvm(
        train, kernel, baseApplied, cfg.solver.tol, cfg.solver.maxIter);
    ipp::saveModel(baseModel, outPath("base.model"));

    const auto trainScores = decisionValues(baseModel, *train);
    const auto testScores = decisionValues(baseModel, testScaled);
    const auto plattParams = ipp::fitPlatt(trainScores, train->labels);
    std::vector<double> plattTest;
    plattTest.reserve(testScores.size());
    for (double s : testScores) plattTest.push_back(ipp::applyPlatt(plattParams, s));

    const auto grid = ipp::buildHyperplaneGrid(
        train, kernel, base, cfg.K, resolveMode(cfg.mode, base), cfg.solver.tol,
        cfg.solver.maxIter, cfg.solver.threads);
    ipp::saveGrid(grid, cfg.outDir, "grid");

    const auto estimates = ipp::estimateBatch(grid, testScaled);
    ipp::writeEstimatesCsv(outPath("estimates.csv"), testScaled, estimates);
    ipp::writeVotesCsv(outPath("votes.csv"), testScaled, grid, estimates);
    const auto degeneracy = ipp::degeneracyReport(grid, testScaled);

    std::vector<double> implied;
    implied.reserve(estimates.size());
    for (const auto& e : estimates) implied.push_back(e.value);
    const auto normalized = ipp::normalizeScores(testScores);
    const auto labels01 = ipp::labels01FromPm1(testScaled.labels);

    const auto rawReport = ipp::calibrateSeries("raw", normalized, labels01, cfg.bins);
    const auto plattReport = ipp::calibrateSeries("platt", plattTest, labels01, cfg.bins);
    const auto impliedReport =
        ipp::calibrateSeries("implied", implied, labels01, cfg.bins);

    for (const auto* report : {&rawReport, &plattReport, &impliedReport})
        emitMethodReport(outPath(report->method), *report, cfg.svg);
    if (cfg.svg) {
        const std::vector<ipp::RocSeries> series{
            {"platt", &plattReport.roc, "#1f4e9c", ""},
            {"implied", &impliedReport.roc, "#c23b22", "6,4"}};
        ipp::writeRocSvg(outPath("roc.svg"), "test-set ROC", series);
    }

    ipp::PointReport table;
    table.ids = testScaled.ids;
    table.labels = testScaled.labels;
    table.rawScore = testScores;
    table.normalizedScore = normalized;
    table.plattEstimate = plattTest;
    table.impliedEstimate = implied;
    for (double v : implied) table.isoFit.push_back(impliedReport.isotonic(v));
    ipp::writePointReportCsv(outPath("report.csv"), table);

    std::vector<std::pair<std::string, std::string>> summary{
        {"n_train", std::to_string(train->size())},
        {"n_test", std::to_string(testScaled.size())},
        {"kernel", ipp::kernelName(kernel.kind)},
        {"gamma", ipp::formatDouble(kernel.gamma)},
        {"c_plus", ipp::formatDouble(cfg.cPlus)},
        {"c_minus", ipp::formatDouble(cfg.cMinus)},
        {"K", std::to_string(cfg.K)},
        {"mode", ipp::gridModeName(resolveMode(cfg.mode, base))},
        {"bins", std::to_string(cfg.bins)},
        {"base_model_iterations", std::to_string(baseDiag.iterations)},
        {"platt_A", ipp::formatDouble(plattParams.A)},
        {"platt_B", ipp::formatDouble(plattParams.B)},
        {"calibration_score_raw", ipp::formatDouble(rawReport.calibrationScore)},
        {"calibration_score_platt", ipp::formatDouble(plattReport.calibrationScore)},
        {"calibration_score_implied", ipp::formatDouble(impliedReport.calibrationScore)},
        {"auc_raw", ipp::formatDouble(rawReport.roc.auc)},
        {"auc_platt", ipp::formatDouble(plattReport.roc.auc)},
        {"auc_implied", ipp::formatDouble(impliedReport.roc.auc)},
        {"degenerate_count", std::to_string(degeneracy.degenerateCount)},
        {"first_test_point_estimate",
         estimates.empty() ? "" : ipp::formatDouble(estimates.front().value)},
    };
    writeSummary(outPath("summary.txt"), summary);
    for (const auto& [key, value] : summary) std::cout << key << " = " << value << '\n';
}

// --- roc ----------------------------------------------------------------------

struct RocConfig {
    DataOptions labels;
    std::string scoresSpec;
    std::string out;
    bool svg = false;
};

void runRoc(const RocConfig& cfg) {
    const auto labeled = loadData(cfg.labels);
    const auto scores = readColumn(cfg.scoresSpec, 0);
    if (scores.size() != labeled.size())
        throw ipp::DataError("scores/labels length mismatch");
    const auto roc = ipp::rocAndAuc(scores, ipp::labels01FromPm1(labeled.labels));
    ipp::writeRocCsv(cfg.out, roc);
    if (cfg.svg) {
        const std::vector<ipp::RocSeries> series{{"scores", &roc, "#1f4e9c", ""}};
        ipp::writeRocSvg(cfg.out + ".svg", "ROC", series);
    }
    std::cout << "auc = " << ipp::formatDouble(roc.auc) << '\n';
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"implied posterior probability toolkit for binary SVMs"};
    app.require_subcommand(1);
    app.fallthrough(); // lets --config appear after the subcommand name
    // Keys are prefixed with the subcommand: "compare.levels=199".
    app.set_config("--config", "",
                   "key=value config file (keys as <subcommand>.<flag>); "
                   "command-line flags win on conflict");

    GenDataConfig genCfg;
    auto* gen = app.add_subcommand("gen-data", "sample a 2D two-class Gaussian dataset");
    gen->add_option("--out", genCfg.out, "output CSV")->required();
    gen->add_option("--preset", genCfg.preset, "tutorial: 10+10 points, seed 7")
        ->check(CLI::IsMember({"tutorial"}));
    gen->add_option("--n-plus", genCfg.nPlus)->capture_default_str();
    gen->add_option("--n-minus", genCfg.nMinus)->capture_default_str();
    gen->add_option("--mean-plus", genCfg.meanPlus, "mean of the positive class")
        ->expected(2)
        ->delimiter(',');
    gen->add_option("--mean-minus", genCfg.meanMinus, "mean of the negative class")
        ->expected(2)
        ->delimiter(',');
    gen->add_option("--cov-plus", genCfg.covPlus, "a,b,c for [[a,b],[b,c]]")
        ->expected(3)
        ->delimiter(',');
    gen->add_option("--cov-minus", genCfg.covMinus, "a,b,c for [[a,b],[b,c]]")
        ->expected(3)
        ->delimiter(',');
    gen->add_option("--seed", genCfg.seed)->capture_default_str();
    gen->callback([&] { runGenData(genCfg); });

    TrainConfig trainCfg;
    auto* train = app.add_subcommand("train", "train one class-weighted SVM");
    addDataOptions(train, trainCfg.data, "--data", "training");
    addKernelOptions(train, trainCfg.kernel);
    addSolverOptions(train, trainCfg.solver, false);
    train->add_option("--c-plus", trainCfg.cPlus)->capture_default_str();
    train->add_option("--c-minus", trainCfg.cMinus)->capture_default_str();
    train->add_option("--z-plus", trainCfg.zPlus, "positive-class weight multiplier")
        ->capture_default_str();
    train->add_option("--z-minus", trainCfg.zMinus, "negative-class weight multiplier")
        ->capture_default_str();
    train->add_option("--out", trainCfg.out, "model file")->required();
    train->callback([&] { runTrain(trainCfg); });

    GridConfig gridCfg;
    auto* grid = app.add_subcommand("grid", "build the hyperplane grid");
    addDataOptions(grid, gridCfg.data, "--data", "training");
    addKernelOptions(grid, gridCfg.kernel);
    addSolverOptions(grid, gridCfg.solver, true);
    grid->add_option("--c-plus", gridCfg.cPlus)->capture_default_str();
    grid->add_option("--c-minus", gridCfg.cMinus)->capture_default_str();
    grid->add_option("-K,--levels", gridCfg.K, "number of real grid levels")
        ->capture_default_str();
    grid->add_option("--mode", gridCfg.mode, "auto, exact, or balanced")
        ->check(CLI::IsMember({"auto", "exact", "balanced"}))
        ->capture_default_str();
    grid->add_option("--out-dir", gridCfg.outDir, "output directory")->required();
    grid->add_option("--stem", gridCfg.stem, "manifest/model filename stem")
        ->capture_default_str();
    grid->callback([&] { runGrid(gridCfg); });

    EstimateConfig estCfg;
    auto* estimate = app.add_subcommand("estimate", "vote-estimate test points");
    estimate->add_option("--grid", estCfg.gridManifest, "grid manifest file")->required();
    addDataOptions(estimate, estCfg.data, "--data", "test");
    estimate->add_option("--out", estCfg.out, "estimates CSV")->required();
    estimate->add_option("--votes-out", estCfg.votesOut, "per-level classification CSV");
    estimate->add_option("--degeneracy-out", estCfg.degeneracyOut,
                         "per-point degeneracy CSV");
    estimate->add_option("--eps-on-plane", estCfg.epsOnPlane,
                         "on-plane band; negative = adaptive")
        ->capture_default_str();
    estimate->callback([&] { runEstimate(estCfg); });

    CalibrateConfig calCfg;
    auto* calibrate = app.add_subcommand("calibrate", "calibration report for a series");
    addDataOptions(calibrate, calCfg.labels, "--labels-from", "labeled");
    calibrate->add_option("--raw-scores", calCfg.rawSpec,
                          "raw score column as path[:col], default col 0");
    calibrate->add_option("--implied", calCfg.impliedSpec,
                          "implied estimate column as path[:col], default col 1");
    calibrate->add_flag("--no-platt", calCfg.noPlatt, "skip the Platt fit on raw scores");
    calibrate->add_option("--bins", calCfg.bins)->capture_default_str();
    calibrate->add_option("--out-prefix", calCfg.outPrefix)->required();
    calibrate->add_flag("--svg", calCfg.svg, "emit cosmetic SVG plots");
    calibrate->callback([&] { runCalibrate(calCfg); });

    CompareConfig cmpCfg;
    auto* compare = app.add_subcommand(
        "compare", "full pipeline: scale, base model, grid, estimates, calibration");
    addDataOptions(compare, cmpCfg.train, "--train", "training", false);
    compare->add_option("--test", cmpCfg.test.path, "test CSV file");
    compare->add_option("--data", cmpCfg.dataPath,
                        "single file split consecutively via --split-at");
    compare->add_option("--split-at", cmpCfg.splitAt, "train row count for --data")
        ->capture_default_str();
    addKernelOptions(compare, cmpCfg.kernel);
    addSolverOptions(compare, cmpCfg.solver, true);
    compare->add_option("--c-plus", cmpCfg.cPlus)->capture_default_str();
    compare->add_option("--c-minus", cmpCfg.cMinus)->capture_default_str();
    compare->add_option("-K,--levels", cmpCfg.K)->capture_default_str();
    compare->add_option("--mode", cmpCfg.mode)
        ->check(CLI::IsMember({"auto", "exact", "balanced"}))
        ->capture_default_str();
    compare->add_option("--bins", cmpCfg.bins)->capture_default_str();
    compare->add_flag("--no-scale", cmpCfg.noScale, "skip min-max feature scaling");
    compare->add_option("--out-dir", cmpCfg.outDir)->capture_default_str();
    compare->add_flag("--svg", cmpCfg.svg, "emit cosmetic SVG plots");
    std::string comparePreset;
    compare->add_option("--preset", comparePreset,
                        "german: RBF g=0.001 C=10 K=199 split 500; "
                        "tutorial: linear C=20 K=9")
        ->check(CLI::IsMember({"german", "tutorial"}));
    compare->callback([&] {
        auto setIfDefault = [&](const char* flag, auto apply) {
            if (compare->count(flag) == 0) apply();
        };
        if (comparePreset == "german") {
            setIfDefault("--kernel", [&] { cmpCfg.kernel.kind = "rbf"; });
            setIfDefault("--gamma", [&] { cmpCfg.kernel.gamma = 0.001; });
            setIfDefault("--c-plus", [&] { cmpCfg.cPlus = 10.0; });
            setIfDefault("--c-minus", [&] { cmpCfg.cMinus = 10.0; });
            setIfDefault("-K", [&] { cmpCfg.K = 199; });
            setIfDefault("--split-at", [&] { cmpCfg.splitAt = 500; });
            setIfDefault("--label-col", [&] {
                cmpCfg.train.labelColumn = -1;
                cmpCfg.test.labelColumn = -1;
            });
        } else if (comparePreset == "tutorial") {
            setIfDefault("--kernel", [&] { cmpCfg.kernel.kind = "linear"; });
            setIfDefault("--c-plus", [&] { cmpCfg.cPlus = 20.0; });
            setIfDefault("--c-minus", [&] { cmpCfg.cMinus = 20.0; });
            setIfDefault("-K", [&] { cmpCfg.K = 9; });
            setIfDefault("--no-scale", [&] { cmpCfg.noScale = true; });
        }
        cmpCfg.test.labelColumn = cmpCfg.train.labelColumn;
        cmpCfg.test.positiveLabel = cmpCfg.train.positiveLabel;
        if (cmpCfg.dataPath.empty() &&
            (cmpCfg.train.path.empty() || cmpCfg.test.path.empty()))
            throw CLI::ValidationError("compare",
                                       "need --train and --test, or --data");
        runCompare(cmpCfg);
    });

    RocConfig rocCfg;
    auto* roc = app.add_subcommand("roc", "ROC curve and AUC for a score column");
    addDataOptions(roc, rocCfg.labels, "--labels-from", "labeled");
    roc->add_option("--scores", rocCfg.scoresSpec, "score column as path[:col]")
        ->required();
    roc->add_option("--out", rocCfg.out, "ROC CSV")->required();
    roc->add_flag("--svg", rocCfg.svg);
    roc->callback([&] { runRoc(rocCfg); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    } catch (const ipp::ConvergenceError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitNoConvergence;
    } catch (const ipp::DataError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
