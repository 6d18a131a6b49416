#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "samprio/error.hpp"
#include "samprio/linalg.hpp"

namespace samprio {

struct KMeansOptions {
    std::size_t max_iterations = 300;
    /// Stop once |inertia_prev - inertia| <= tolerance * inertia_prev.
    double tolerance = 1e-4;
};

struct KMeansResult {
    Matrix centroids;
    /// Nearest final centroid per point (ties to the lower index).
    std::vector<std::size_t> labels;
    /// Euclidean distance of each point to its labelled centroid.
    std::vector<double> distances;
    double inertia = 0.0;
    std::size_t iterations = 0;
};

namespace detail {

struct Nearest {
    std::size_t index;
    double dist2;
};

inline Nearest nearest_row(const Matrix& centroids, const Eigen::Ref<const Vector>& p) {
    Nearest best{0, std::numeric_limits<double>::infinity()};
    for (Eigen::Index c = 0; c < centroids.rows(); ++c) {
        const double d2 = (centroids.row(c).transpose() - p).squaredNorm();
        if (d2 < best.dist2) best = {static_cast<std::size_t>(c), d2};
    }
    return best;
}

// k-means++ seeding: each new centre drawn with probability proportional to
// squared distance from the nearest chosen one.
inline Matrix kmeanspp_init(const Matrix& points, std::size_t k, std::mt19937_64& rng) {
    const auto n = static_cast<std::size_t>(points.rows());
    Matrix centers(static_cast<Eigen::Index>(k), points.cols());
    std::vector<double> d2(n, std::numeric_limits<double>::infinity());
    std::vector<bool> chosen(n, false);

    std::size_t pick = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
    for (std::size_t c = 0; c < k; ++c) {
        if (c > 0) {
            double total = 0;
            for (double v : d2) total += v;
            if (total > 0) {
                const double u = std::uniform_real_distribution<double>(0.0, total)(rng);
                double acc = 0;
                pick = n;
                for (std::size_t i = 0; i < n; ++i) {
                    acc += d2[i];
                    if (u < acc && d2[i] > 0) {
                        pick = i;
                        break;
                    }
                }
                if (pick == n) // rounding left u past the last bucket
                    for (std::size_t i = n; i-- > 0;)
                        if (d2[i] > 0) {
                            pick = i;
                            break;
                        }
            } else {
                // Every remaining point coincides with a centre.
                pick = 0;
                while (pick < n && chosen[pick]) ++pick;
                if (pick == n) pick = 0;
            }
        }
        chosen[pick] = true;
        centers.row(static_cast<Eigen::Index>(c)) = points.row(static_cast<Eigen::Index>(pick));
        for (std::size_t i = 0; i < n; ++i)
            d2[i] = std::min(d2[i], (points.row(static_cast<Eigen::Index>(i)) - centers.row(static_cast<Eigen::Index>(c))).squaredNorm());
    }
    return centers;
}

} // namespace detail

/// Lloyd iterations from a k-means++ start drawn with `seed`. Clusters that
/// lose all members are re-seeded from the point farthest from its centroid.
inline KMeansResult kmeans(const Matrix& points, std::size_t k, std::uint64_t seed, const KMeansOptions& opt = {}) {
    const auto n = static_cast<std::size_t>(points.rows());
    if (k < 1 || k > n) throw ArgumentError("k = " + std::to_string(k) + " outside [1, " + std::to_string(n) + "]");

    std::mt19937_64 rng(seed);
    KMeansResult res;
    res.centroids = detail::kmeanspp_init(points, k, rng);
    res.labels.assign(n, 0);
    res.distances.assign(n, 0.0);

    auto assign = [&] {
        double inertia = 0;
        for (std::size_t i = 0; i < n; ++i) {
            auto nn = detail::nearest_row(res.centroids, points.row(static_cast<Eigen::Index>(i)).transpose());
            res.labels[i] = nn.index;
            res.distances[i] = std::sqrt(nn.dist2);
            inertia += nn.dist2;
        }
        return inertia;
    };

    double prev = std::numeric_limits<double>::infinity();
    for (res.iterations = 1; res.iterations <= opt.max_iterations; ++res.iterations) {
        res.inertia = assign();
        if (std::isfinite(prev) && std::abs(prev - res.inertia) <= opt.tolerance * prev) break;
        prev = res.inertia;

        Matrix sums = Matrix::Zero(static_cast<Eigen::Index>(k), points.cols());
        std::vector<std::size_t> counts(k, 0);
        for (std::size_t i = 0; i < n; ++i) {
            sums.row(static_cast<Eigen::Index>(res.labels[i])) += points.row(static_cast<Eigen::Index>(i));
            ++counts[res.labels[i]];
        }
        std::vector<bool> taken(n, false);
        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c] > 0) {
                res.centroids.row(static_cast<Eigen::Index>(c)) = sums.row(static_cast<Eigen::Index>(c)) / static_cast<double>(counts[c]);
                continue;
            }
            std::size_t far = n;
            for (std::size_t i = 0; i < n; ++i)
                if (!taken[i] && (far == n || res.distances[i] > res.distances[far])) far = i;
            taken[far] = true;
            res.centroids.row(static_cast<Eigen::Index>(c)) = points.row(static_cast<Eigen::Index>(far));
        }
    }
    if (res.iterations > opt.max_iterations) res.iterations = opt.max_iterations;
    res.inertia = assign();
    return res;
}

} // namespace samprio
