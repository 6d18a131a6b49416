#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "samprio/data_model.hpp"
#include "samprio/detail/binio.hpp"
#include "samprio/error.hpp"
#include "samprio/linalg.hpp"

namespace samprio {

/// Intersection over union of two equally sized masks. Two empty masks agree
/// perfectly and score 1.
inline double iou(const BinaryMask& a, const BinaryMask& b) {
    if (a.width != b.width || a.height != b.height)
        throw ArgumentError("mask shape mismatch: " + std::to_string(a.width) + "x" + std::to_string(a.height) + " vs " +
                            std::to_string(b.width) + "x" + std::to_string(b.height));
    std::size_t inter = 0;
    std::size_t uni = 0;
    for (std::size_t i = 0; i < a.bits.size(); ++i) {
        const bool x = a.bits[i] != 0;
        const bool y = b.bits[i] != 0;
        inter += x && y;
        uni += x || y;
    }
    if (uni == 0) return 1.0;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

/// Inverse-distance-weighted k-NN regressor over core samples in reduced space.
struct IouPredictor {
    Matrix references;
    std::vector<double> ious;
    std::size_t k = 5;

    std::size_t dim() const { return static_cast<std::size_t>(references.cols()); }
    std::size_t size() const { return ious.size(); }
};

inline IouPredictor fit_iou_predictor(Matrix core_reduced, std::vector<double> core_ious, std::size_t k) {
    if (core_reduced.rows() == 0) throw ArgumentError("IoU predictor needs at least one reference");
    if (static_cast<std::size_t>(core_reduced.rows()) != core_ious.size())
        throw ArgumentError("reference points and IoU values differ in length");
    for (std::size_t i = 0; i < core_ious.size(); ++i)
        if (!(core_ious[i] >= 0.0 && core_ious[i] <= 1.0))
            throw DataError("reference IoU outside [0,1]", i);
    if (k < 1 || k > core_ious.size())
        throw ArgumentError("k = " + std::to_string(k) + " outside [1, " + std::to_string(core_ious.size()) + "]");
    return IouPredictor{std::move(core_reduced), std::move(core_ious), k};
}

namespace detail {

// Indices of the k smallest entries of `dist2`; ties go to the lower index.
inline std::vector<std::size_t> k_smallest(const std::vector<double>& dist2, std::size_t k) {
    std::vector<std::size_t> idx(dist2.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    auto less = [&](std::size_t a, std::size_t b) { return dist2[a] < dist2[b] || (dist2[a] == dist2[b] && a < b); };
    std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(), less);
    idx.resize(k);
    return idx;
}

} // namespace detail

inline double predict_iou(const IouPredictor& p, const Eigen::Ref<const Vector>& v) {
    if (static_cast<std::size_t>(v.size()) != p.dim())
        throw DataError("dimension mismatch: predictor expects " + std::to_string(p.dim()) + ", got " +
                        std::to_string(v.size()));
    std::vector<double> d2(p.size());
    for (std::size_t i = 0; i < d2.size(); ++i)
        d2[i] = (p.references.row(static_cast<Eigen::Index>(i)).transpose() - v).squaredNorm();
    const auto nearest = detail::k_smallest(d2, p.k);

    double zero_sum = 0;
    std::size_t zero_count = 0;
    for (auto i : nearest)
        if (d2[i] == 0.0) {
            zero_sum += p.ious[i];
            ++zero_count;
        }
    if (zero_count > 0) return zero_sum / static_cast<double>(zero_count);

    double num = 0;
    double den = 0;
    double lo = 1.0;
    double hi = 0.0;
    for (auto i : nearest) {
        const double w = 1.0 / std::sqrt(d2[i]);
        num += w * p.ious[i];
        den += w;
        lo = std::min(lo, p.ious[i]);
        hi = std::max(hi, p.ious[i]);
    }
    return std::clamp(num / den, lo, hi);
}

inline std::vector<double> predict_iou_all(const IouPredictor& p, const Matrix& queries) {
    std::vector<double> out(static_cast<std::size_t>(queries.rows()));
    for (Eigen::Index i = 0; i < queries.rows(); ++i) out[static_cast<std::size_t>(i)] = predict_iou(p, queries.row(i).transpose());
    return out;
}

// "KNN1" container: u32 N, u32 R, u32 k, f32 references[N*R], f32 ious[N].
inline void save_predictor(const IouPredictor& p, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path + " for writing");
    detail::write_magic(out, "KNN1");
    detail::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(p.size()));
    detail::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(p.dim()));
    detail::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(p.k));
    for (Eigen::Index i = 0; i < p.references.rows(); ++i)
        for (Eigen::Index j = 0; j < p.references.cols(); ++j)
            detail::write_le<float>(out, static_cast<float>(p.references(i, j)));
    for (double v : p.ious) detail::write_le<float>(out, static_cast<float>(v));
    if (!out) throw IoError("write failed for " + path);
}

inline IouPredictor load_predictor(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    try {
        detail::expect_magic(in, "KNN1");
        const auto n = detail::read_le<std::uint32_t>(in, "N");
        const auto r = detail::read_le<std::uint32_t>(in, "R");
        const auto k = detail::read_le<std::uint32_t>(in, "k");
        Matrix refs(n, r);
        for (std::uint32_t i = 0; i < n; ++i)
            for (std::uint32_t j = 0; j < r; ++j) refs(i, j) = detail::read_le<float>(in, "references");
        std::vector<double> ious(n);
        for (auto& v : ious) v = detail::read_le<float>(in, "ious");
        return fit_iou_predictor(std::move(refs), std::move(ious), k);
    } catch (const DataError& e) {
        throw DataError::prefixed(path, e);
    }
}

} // namespace samprio
