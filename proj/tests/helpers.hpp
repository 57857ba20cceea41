#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "ipp/dataset.hpp"
#include "ipp/rng.hpp"

namespace helpers {

// Random small dataset with both classes, features in a box, and a minimum
// pairwise separation (keeps RBF Gram matrices well-conditioned so dual
// optima are unique and oracle comparisons meaningful).
inline std::shared_ptr<ipp::Dataset> randomDataset(ipp::Rng& rng, std::size_t n,
                                                   std::size_t d,
                                                   double minSeparation = 0.5) {
    auto ds = std::make_shared<ipp::Dataset>();
    ds->features = ipp::Matrix(n, d);
    ds->labels.resize(n);
    ds->ids.resize(n);
    for (std::size_t r = 0; r < n; ++r) {
        while (true) {
            for (std::size_t c = 0; c < d; ++c)
                ds->features.at(r, c) = 4.0 * rng.uniform() - 2.0;
            bool separated = true;
            for (std::size_t q = 0; q < r && separated; ++q) {
                double dist2 = 0.0;
                for (std::size_t c = 0; c < d; ++c) {
                    const double diff = ds->features.at(r, c) - ds->features.at(q, c);
                    dist2 += diff * diff;
                }
                separated = dist2 >= minSeparation * minSeparation;
            }
            if (separated) break;
        }
        ds->labels[r] = rng.uniform() < 0.5 ? 1 : -1;
        ds->ids[r] = static_cast<std::int64_t>(r);
    }
    // Guarantee both classes.
    ds->labels[0] = 1;
    ds->labels[n - 1] = -1;
    return ds;
}

inline std::shared_ptr<ipp::Dataset> makeDataset(
    const std::vector<std::vector<double>>& rows, const std::vector<int>& labels) {
    auto ds = std::make_shared<ipp::Dataset>();
    const std::size_t n = rows.size();
    const std::size_t d = rows.empty() ? 1 : rows.front().size();
    ds->features = ipp::Matrix(n, d);
    ds->labels = labels;
    ds->ids.resize(n);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < d; ++c) ds->features.at(r, c) = rows[r][c];
        ds->ids[r] = static_cast<std::int64_t>(r);
    }
    return ds;
}

} // namespace helpers
