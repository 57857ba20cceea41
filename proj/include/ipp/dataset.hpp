#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "ipp/errors.hpp"
#include "ipp/matrix.hpp"
#include "ipp/rng.hpp"
#include "ipp/text.hpp"

namespace ipp {

// A labeled feature matrix. Immutable by convention once built: every
// operation below returns a new Dataset instead of mutating in place.
struct Dataset {
    Matrix features;               // n x d
    std::vector<int> labels;       // +1 / -1 per row
    std::vector<std::int64_t> ids; // record identifiers (row order for files)

    std::size_t size() const { return features.rows; }
    std::size_t dim() const { return features.cols; }

    std::size_t countLabel(int label) const {
        return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), label));
    }
};

inline void validateDataset(const Dataset& ds) {
    if (ds.features.rows != ds.labels.size() || ds.features.rows != ds.ids.size())
        throw DataError("dataset: features/labels/ids row counts differ");
    if (ds.features.cols < 1)
        throw DataError("dataset: needs at least one feature column");
    for (int y : ds.labels)
        if (y != 1 && y != -1) throw DataError("dataset: labels must be +1 or -1");
    for (double v : ds.features.data)
        if (!std::isfinite(v)) throw DataError("dataset: non-finite feature value");
}

// Two-class Gaussian sampling spec. Covariances are row-major d x d.
struct GaussianSpec {
    std::vector<double> meanPlus;
    Matrix covPlus;
    std::vector<double> meanMinus;
    Matrix covMinus;
    std::size_t nPlus = 0;
    std::size_t nMinus = 0;
    std::uint64_t seed = 0;
};

// Per-feature affine map: scaled = (x - shift) / scale.
struct ScalingParams {
    std::vector<double> perFeatureShift;
    std::vector<double> perFeatureScale; // strictly positive
};

namespace detail {

inline std::vector<std::vector<std::string>> readRecords(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open file: " + path);
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        rows.push_back(splitFields(line));
    }
    if (rows.empty()) throw DataError("empty file: " + path);
    return rows;
}

// Lower-triangular Cholesky factor; throws DataError when the matrix is not
// symmetric positive-definite.
inline Matrix cholesky(const Matrix& a, const std::string& what) {
    const std::size_t d = a.rows;
    if (a.cols != d) throw DataError(what + ": covariance must be square");
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = i + 1; j < d; ++j)
            if (std::abs(a.at(i, j) - a.at(j, i)) >
                1e-12 * (1.0 + std::abs(a.at(i, j))))
                throw DataError(what + ": covariance not symmetric");
    Matrix l(d, d, 0.0);
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double sum = a.at(i, j);
            for (std::size_t k = 0; k < j; ++k) sum -= l.at(i, k) * l.at(j, k);
            if (i == j) {
                if (sum <= 0.0)
                    throw DataError(what + ": covariance not positive-definite");
                l.at(i, i) = std::sqrt(sum);
            } else {
                l.at(i, j) = sum / l.at(j, j);
            }
        }
    }
    return l;
}

} // namespace detail

// Loads a delimited text file into a Dataset. labelColumn may be negative to
// count from the end (-1 = last column). The label column must contain exactly
// two distinct raw tokens; positiveLabelValue maps to +1, the other to -1.
// An optional header row is detected by non-numeric feature cells.
inline Dataset loadCsv(const std::string& path, int labelColumn,
                       const std::string& positiveLabelValue) {
    auto rows = detail::readRecords(path);
    const std::size_t ncols = rows.front().size();
    if (ncols < 2) throw DataError(path + ": need a label column and at least one feature");
    for (std::size_t r = 0; r < rows.size(); ++r)
        if (rows[r].size() != ncols)
            throw DataError(path + ": row " + std::to_string(r + 1) +
                            " has " + std::to_string(rows[r].size()) +
                            " fields, expected " + std::to_string(ncols));

    long resolved = labelColumn < 0 ? static_cast<long>(ncols) + labelColumn : labelColumn;
    if (resolved < 0 || resolved >= static_cast<long>(ncols))
        throw DataError(path + ": label column out of range");
    const std::size_t labelCol = static_cast<std::size_t>(resolved);

    // Header row: any feature cell of the first row that is not a number.
    bool header = false;
    for (std::size_t c = 0; c < ncols && !header; ++c)
        if (c != labelCol && !parseDouble(rows[0][c])) header = true;
    const std::size_t firstData = header ? 1 : 0;
    if (firstData >= rows.size()) throw DataError(path + ": no data rows");

    std::set<std::string> tokens;
    for (std::size_t r = firstData; r < rows.size(); ++r) tokens.insert(rows[r][labelCol]);
    if (tokens.size() != 2) {
        std::string msg = path + ": expected exactly two label tokens, got {";
        for (const auto& t : tokens) msg += " '" + t + "'";
        throw DataError(msg + " }");
    }
    if (!tokens.count(positiveLabelValue))
        throw DataError(path + ": positive label token '" + positiveLabelValue +
                        "' not present in label column");

    const std::size_t n = rows.size() - firstData;
    const std::size_t d = ncols - 1;
    Dataset ds;
    ds.features = Matrix(n, d);
    ds.labels.resize(n);
    ds.ids.resize(n);
    for (std::size_t r = 0; r < n; ++r) {
        const auto& row = rows[r + firstData];
        std::size_t col = 0;
        for (std::size_t c = 0; c < ncols; ++c) {
            if (c == labelCol) continue;
            const auto v = parseDouble(row[c]);
            if (!v)
                throw DataError(path + ": non-numeric feature cell '" + row[c] +
                                "' at row " + std::to_string(r + firstData + 1));
            ds.features.at(r, col++) = *v;
        }
        ds.labels[r] = row[labelCol] == positiveLabelValue ? 1 : -1;
        ds.ids[r] = static_cast<std::int64_t>(r);
    }
    validateDataset(ds);
    return ds;
}

// Writes a Dataset as CSV with the +1/-1 label in the first column.
inline void writeCsv(const Dataset& ds, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write file: " + path);
    for (std::size_t r = 0; r < ds.size(); ++r) {
        out << ds.labels[r];
        for (double v : ds.features.row(r)) out << ',' << formatDouble(v);
        out << '\n';
    }
}

// First nTrain rows in order, then the rest; no shuffling.
inline std::pair<Dataset, Dataset> splitConsecutive(const Dataset& ds, std::size_t nTrain) {
    if (nTrain == 0 || nTrain >= ds.size())
        throw DataError("splitConsecutive: nTrain must be in (0, n)");
    auto slice = [&](std::size_t begin, std::size_t end) {
        Dataset out;
        out.features = Matrix(end - begin, ds.dim());
        std::copy(ds.features.data.begin() + begin * ds.dim(),
                  ds.features.data.begin() + end * ds.dim(), out.features.data.begin());
        out.labels.assign(ds.labels.begin() + begin, ds.labels.begin() + end);
        out.ids.assign(ds.ids.begin() + begin, ds.ids.begin() + end);
        return out;
    };
    return {slice(0, nTrain), slice(nTrain, ds.size())};
}

// Samples nPlus positive rows then nMinus negative rows from class Gaussians.
// Bit-reproducible for a fixed seed.
inline Dataset generateGaussian2D(const GaussianSpec& spec) {
    const std::size_t d = spec.meanPlus.size();
    if (d != 2 || spec.meanMinus.size() != 2)
        throw DataError("generateGaussian2D: means must be 2-dimensional");
    const Matrix lPlus = detail::cholesky(spec.covPlus, "covPlus");
    const Matrix lMinus = detail::cholesky(spec.covMinus, "covMinus");

    const std::size_t n = spec.nPlus + spec.nMinus;
    Dataset ds;
    ds.features = Matrix(n, d);
    ds.labels.resize(n);
    ds.ids.resize(n);
    Rng rng(spec.seed);
    for (std::size_t r = 0; r < n; ++r) {
        const bool positive = r < spec.nPlus;
        const auto& mean = positive ? spec.meanPlus : spec.meanMinus;
        const auto& l = positive ? lPlus : lMinus;
        const double z0 = rng.normal();
        const double z1 = rng.normal();
        ds.features.at(r, 0) = mean[0] + l.at(0, 0) * z0;
        ds.features.at(r, 1) = mean[1] + l.at(1, 0) * z0 + l.at(1, 1) * z1;
        ds.labels[r] = positive ? 1 : -1;
        ds.ids[r] = static_cast<std::int64_t>(r);
    }
    validateDataset(ds);
    return ds;
}

// Min-max parameters fit per feature; a constant column gets scale 1 so the
// transform stays defined (and maps the column to all zeros).
inline ScalingParams fitScaling(const Dataset& ds) {
    if (ds.size() == 0) throw DataError("fitScaling: empty dataset");
    const std::size_t d = ds.dim();
    ScalingParams p;
    p.perFeatureShift.resize(d);
    p.perFeatureScale.resize(d);
    for (std::size_t c = 0; c < d; ++c) {
        double lo = ds.features.at(0, c), hi = lo;
        for (std::size_t r = 1; r < ds.size(); ++r) {
            lo = std::min(lo, ds.features.at(r, c));
            hi = std::max(hi, ds.features.at(r, c));
        }
        p.perFeatureShift[c] = lo;
        p.perFeatureScale[c] = hi > lo ? hi - lo : 1.0;
    }
    return p;
}

inline Dataset applyScaling(const Dataset& ds, const ScalingParams& p) {
    if (p.perFeatureShift.size() != ds.dim() || p.perFeatureScale.size() != ds.dim())
        throw DataError("applyScaling: dimension mismatch");
    Dataset out = ds;
    for (std::size_t r = 0; r < out.size(); ++r)
        for (std::size_t c = 0; c < out.dim(); ++c)
            out.features.at(r, c) =
                (out.features.at(r, c) - p.perFeatureShift[c]) / p.perFeatureScale[c];
    return out;
}

inline void saveScaling(const ScalingParams& p, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write file: " + path);
    auto writeList = [&](const char* key, const std::vector<double>& v) {
        out << key << " =";
        for (double x : v) out << ' ' << formatDouble(x);
        out << '\n';
    };
    writeList("shift", p.perFeatureShift);
    writeList("scale", p.perFeatureScale);
}

inline ScalingParams loadScaling(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open file: " + path);
    ScalingParams p;
    std::string line;
    while (std::getline(in, line)) {
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        const std::string key(trim(std::string_view(line).substr(0, eq)));
        std::vector<double> values;
        for (const auto& tok : splitFields(line.substr(eq + 1))) {
            const auto v = parseDouble(tok);
            if (!v) throw DataError(path + ": bad number '" + tok + "'");
            values.push_back(*v);
        }
        if (key == "shift") p.perFeatureShift = std::move(values);
        else if (key == "scale") p.perFeatureScale = std::move(values);
    }
    if (p.perFeatureShift.empty() || p.perFeatureShift.size() != p.perFeatureScale.size())
        throw DataError(path + ": malformed scaling document");
    for (double s : p.perFeatureScale)
        if (!(s > 0.0)) throw DataError(path + ": scale entries must be positive");
    return p;
}

} // namespace ipp
