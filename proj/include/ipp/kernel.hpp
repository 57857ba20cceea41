#pragma once

#include <cmath>
#include <span>
#include <string>

#include "ipp/errors.hpp"

namespace ipp {

enum class KernelKind { linear, rbf };

struct KernelSpec {
    KernelKind kind = KernelKind::linear;
    double gamma = 0.0; // rbf only
};

inline void validateKernel(const KernelSpec& k) {
    if (k.kind == KernelKind::rbf && !(k.gamma > 0.0))
        throw DataError("rbf kernel requires gamma > 0");
}

inline double kernelEval(const KernelSpec& k, std::span<const double> x,
                         std::span<const double> y) {
    if (x.size() != y.size()) throw DataError("kernelEval: dimension mismatch");
    if (k.kind == KernelKind::linear) {
        double dot = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) dot += x[i] * y[i];
        return dot;
    }
    double dist2 = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double diff = x[i] - y[i];
        dist2 += diff * diff;
    }
    return std::exp(-k.gamma * dist2);
}

inline std::string kernelName(KernelKind kind) {
    return kind == KernelKind::linear ? "linear" : "rbf";
}

inline KernelKind kernelKindFromName(const std::string& name) {
    if (name == "linear") return KernelKind::linear;
    if (name == "rbf") return KernelKind::rbf;
    throw DataError("unknown kernel '" + name + "'");
}

} // namespace ipp
