#pragma once

// Local Outlier Probability over a fixed point set.
//
// For each point o with k-NN context set S(o) (o excluded):
//   sigma(o) = sqrt(sum_{s in S(o)} d(o,s)^2 / |S(o)|)
//   pdist(o) = lambda * sigma(o)
//   PLOF(o)  = pdist(o) / mean_{s in S(o)} pdist(s) - 1
//   nPLOF    = lambda * sqrt(mean_o PLOF(o)^2)
//   LoOP(o)  = max(0, erf(PLOF(o) / (nPLOF * sqrt(2))))

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "samprio/error.hpp"
#include "samprio/linalg.hpp"

namespace samprio {

struct LoopModel {
    std::size_t k_nn = 20;
    double lambda = 3.0;
    std::vector<std::vector<std::size_t>> neighbors;
    std::vector<double> pdist;
    std::vector<double> plof;
    double nplof = 0.0;

    std::size_t size() const { return pdist.size(); }
};

inline LoopModel fit_loop(const Matrix& points, std::size_t k_nn, double lambda) {
    const auto n = static_cast<std::size_t>(points.rows());
    if (k_nn < 1) throw ArgumentError("LoOP neighbourhood size must be at least 1");
    if (n < k_nn + 1)
        throw ArgumentError("LoOP needs at least k_nn + 1 = " + std::to_string(k_nn + 1) + " points, got " + std::to_string(n));
    if (!(lambda > 0) || !std::isfinite(lambda)) throw ArgumentError("LoOP lambda must be positive");
    if (!points.allFinite()) throw DataError("non-finite point in LoOP input");

    LoopModel m;
    m.k_nn = k_nn;
    m.lambda = lambda;
    m.neighbors.resize(n);
    m.pdist.resize(n);

    std::vector<double> d2(n);
    std::vector<std::size_t> idx(n);
    for (std::size_t o = 0; o < n; ++o) {
        const auto po = points.row(static_cast<Eigen::Index>(o));
        for (std::size_t s = 0; s < n; ++s) d2[s] = (points.row(static_cast<Eigen::Index>(s)) - po).squaredNorm();
        d2[o] = std::numeric_limits<double>::infinity();
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k_nn), idx.end(),
                          [&](std::size_t a, std::size_t b) { return d2[a] < d2[b] || (d2[a] == d2[b] && a < b); });
        m.neighbors[o].assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k_nn));
        double sum = 0;
        for (auto s : m.neighbors[o]) sum += d2[s];
        m.pdist[o] = lambda * std::sqrt(sum / static_cast<double>(k_nn));
    }

    m.plof.resize(n);
    double sq = 0;
    std::size_t finite = 0;
    for (std::size_t o = 0; o < n; ++o) {
        double mean = 0;
        for (auto s : m.neighbors[o]) mean += m.pdist[s];
        mean /= static_cast<double>(k_nn);
        if (mean > 0)
            m.plof[o] = m.pdist[o] / mean - 1.0;
        else
            // Neighbourhood collapsed onto duplicates.
            m.plof[o] = m.pdist[o] > 0 ? std::numeric_limits<double>::infinity() : 0.0;
        if (std::isfinite(m.plof[o])) {
            sq += m.plof[o] * m.plof[o];
            ++finite;
        }
    }
    m.nplof = finite > 0 ? lambda * std::sqrt(sq / static_cast<double>(finite)) : 0.0;
    return m;
}

inline double loop_score(const LoopModel& m, std::size_t index) {
    if (index >= m.size()) throw ArgumentError("LoOP index " + std::to_string(index) + " out of range");
    const double plof = m.plof[index];
    if (std::isinf(plof)) return plof > 0 ? 1.0 : 0.0;
    if (!(m.nplof > 0)) return 0.0;
    return std::max(0.0, std::erf(plof / (m.nplof * std::sqrt(2.0))));
}

inline std::vector<double> loop_scores(const LoopModel& m) {
    std::vector<double> out(m.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = loop_score(m, i);
    return out;
}

} // namespace samprio
