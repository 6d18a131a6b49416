#pragma once

// Two-phase clustering: k-means over core samples augmented with an IoU
// coordinate, then nearest-centroid classification of fine-tuning samples.
// Error clusters (core IoU < 0.5) and orphaned fine-tuning clusters feed the
// multiparty score.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "samprio/detail/binio.hpp"
#include "samprio/error.hpp"
#include "samprio/kmeans.hpp"
#include "samprio/linalg.hpp"

namespace samprio {

inline constexpr double kErrorIouLevel = 0.5;

/// Centroids live in augmented space: reduced coordinates divided by `scale`
/// followed by `iou_weight * iou`. Core clusters come first, error clusters
/// (is_error) after them.
struct ClusterModel {
    Vector scale;
    double iou_weight = 1.0;
    Matrix centroids;
    std::vector<std::size_t> member_count;
    std::vector<double> p95_radius;
    std::vector<std::uint8_t> is_error;
    /// Core cluster of each fitted core sample. Not persisted.
    std::vector<std::size_t> fitted_labels;

    std::size_t reduced_dim() const { return static_cast<std::size_t>(scale.size()); }
    std::size_t size() const { return member_count.size(); }
    std::size_t core_count() const { return static_cast<std::size_t>(std::count(is_error.begin(), is_error.end(), 0)); }
    std::size_t error_count() const { return size() - core_count(); }
};

struct Assignment {
    std::size_t cluster = 0;
    double raw_dist = 0.0;
    double norm_dist = 0.0;
    /// Set when the sample belongs to an orphaned fine-tuning cluster.
    std::optional<std::size_t> orphan;
};

struct OrphanCluster {
    Vector centroid;
    /// Row indices into the fine-tuning batch.
    std::vector<std::size_t> members;
};

struct OrphanReport {
    std::vector<OrphanCluster> orphans;
    std::vector<std::optional<std::size_t>> orphan_of;
    std::vector<std::optional<std::size_t>> error_of;
    std::vector<double> orph_weight;
    std::vector<double> err_weight;
};

/// k = round(sqrt(n / 2)) clamped to [2, 16], never above n.
inline std::size_t default_cluster_count(std::size_t n) {
    auto k = static_cast<std::size_t>(std::lround(std::sqrt(static_cast<double>(n) / 2.0)));
    k = std::clamp<std::size_t>(k, 2, 16);
    return std::min(k, n);
}

inline Vector augment(const ClusterModel& model, const Eigen::Ref<const Vector>& reduced, double iou_value) {
    if (static_cast<std::size_t>(reduced.size()) != model.reduced_dim())
        throw DataError("dimension mismatch: cluster model expects " + std::to_string(model.reduced_dim()) + ", got " +
                        std::to_string(reduced.size()));
    Vector out(reduced.size() + 1);
    out.head(reduced.size()) = reduced.cwiseQuotient(model.scale);
    out(reduced.size()) = model.iou_weight * iou_value;
    return out;
}

inline Matrix augment_all(const ClusterModel& model, const Matrix& reduced, const std::vector<double>& ious) {
    if (static_cast<std::size_t>(reduced.rows()) != ious.size()) throw ArgumentError("points and IoU values differ in length");
    Matrix out(reduced.rows(), reduced.cols() + 1);
    for (Eigen::Index i = 0; i < reduced.rows(); ++i)
        out.row(i) = augment(model, reduced.row(i).transpose(), ious[static_cast<std::size_t>(i)]).transpose();
    return out;
}

namespace detail {

// Nearest-rank 95th percentile.
inline double p95(std::vector<double> values) {
    if (values.empty()) return 0.0;
    std::sort(values.begin(), values.end());
    auto rank = static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(values.size())));
    return values[std::max<std::size_t>(rank, 1) - 1];
}

inline void append_clusters(ClusterModel& model, const KMeansResult& km, bool error) {
    const auto k = static_cast<std::size_t>(km.centroids.rows());
    std::vector<std::vector<double>> member_dists(k);
    for (std::size_t i = 0; i < km.labels.size(); ++i) member_dists[km.labels[i]].push_back(km.distances[i]);
    Matrix merged(model.centroids.rows() + km.centroids.rows(), km.centroids.cols());
    if (model.centroids.rows() > 0) merged.topRows(model.centroids.rows()) = model.centroids;
    merged.bottomRows(km.centroids.rows()) = km.centroids;
    model.centroids = std::move(merged);
    for (std::size_t c = 0; c < k; ++c) {
        model.member_count.push_back(member_dists[c].size());
        model.p95_radius.push_back(p95(member_dists[c]));
        model.is_error.push_back(error ? 1 : 0);
    }
}

inline void check_inputs(const Matrix& reduced, const std::vector<double>& ious) {
    if (static_cast<std::size_t>(reduced.rows()) != ious.size()) throw ArgumentError("points and IoU values differ in length");
    if (!reduced.allFinite()) throw DataError("non-finite reduced coordinate");
    for (std::size_t i = 0; i < ious.size(); ++i)
        if (!(ious[i] >= 0.0 && ious[i] <= 1.0)) throw DataError("IoU outside [0,1]", i);
}

} // namespace detail

/// Clusters core samples in augmented space. Each reduced dimension is first
/// divided by its standard deviation over the core set.
inline ClusterModel fit_core_clusters(const Matrix& core_reduced, const std::vector<double>& core_ious, std::size_t k,
                                      double iou_weight, std::uint64_t seed) {
    detail::check_inputs(core_reduced, core_ious);
    const auto n = static_cast<std::size_t>(core_reduced.rows());
    if (k < 1 || k > n) throw ArgumentError("cluster count " + std::to_string(k) + " outside [1, " + std::to_string(n) + "]");
    if (!(iou_weight > 0) || !std::isfinite(iou_weight)) throw ArgumentError("iou_weight must be positive");

    ClusterModel model;
    model.iou_weight = iou_weight;
    const Vector mean = core_reduced.colwise().mean().transpose();
    model.scale = ((core_reduced.rowwise() - mean.transpose()).colwise().squaredNorm().transpose() / static_cast<double>(n))
                      .cwiseSqrt();
    for (Eigen::Index j = 0; j < model.scale.size(); ++j)
        if (!(model.scale(j) > 0)) model.scale(j) = 1.0;
    model.centroids.resize(0, core_reduced.cols() + 1);

    const auto km = kmeans(augment_all(model, core_reduced, core_ious), k, seed);
    detail::append_clusters(model, km, false);
    model.fitted_labels = km.labels;
    return model;
}

/// Nearest core centroid in augmented space; ties go to the lower index.
inline Assignment classify(const ClusterModel& model, const Eigen::Ref<const Vector>& reduced, double iou_value) {
    const Vector p = augment(model, reduced, iou_value);
    Assignment a;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < model.size(); ++c) {
        if (model.is_error[c]) continue;
        const double d2 = (model.centroids.row(static_cast<Eigen::Index>(c)).transpose() - p).squaredNorm();
        if (d2 < best) {
            best = d2;
            a.cluster = c;
        }
    }
    a.raw_dist = std::sqrt(best);
    return a;
}

/// Scales raw distances by the batch maximum; an all-zero batch stays zero.
inline std::vector<Assignment> normalize_distances(std::vector<Assignment> batch) {
    double hi = 0;
    for (const auto& a : batch) hi = std::max(hi, a.raw_dist);
    for (auto& a : batch) a.norm_dist = hi > 0 ? std::clamp(a.raw_dist / hi, 0.0, 1.0) : 0.0;
    return batch;
}

/// Clusters the core samples below the error IoU level and appends them to
/// `model` as error clusters. Returns how many were added (0 when no core
/// sample is below the level).
inline std::size_t fit_error_clusters(ClusterModel& model, const Matrix& core_reduced, const std::vector<double>& core_ious,
                                      std::size_t k_err, std::uint64_t seed) {
    detail::check_inputs(core_reduced, core_ious);
    std::vector<Eigen::Index> low;
    for (std::size_t i = 0; i < core_ious.size(); ++i)
        if (core_ious[i] < kErrorIouLevel) low.push_back(static_cast<Eigen::Index>(i));
    if (low.empty()) return 0;
    if (k_err < 1 || k_err > low.size())
        throw ArgumentError("error cluster count " + std::to_string(k_err) + " outside [1, " + std::to_string(low.size()) + "]");

    Matrix sub(static_cast<Eigen::Index>(low.size()), core_reduced.cols() + 1);
    for (std::size_t r = 0; r < low.size(); ++r)
        sub.row(static_cast<Eigen::Index>(r)) =
            augment(model, core_reduced.row(low[r]).transpose(), core_ious[static_cast<std::size_t>(low[r])]).transpose();
    detail::append_clusters(model, kmeans(sub, k_err, seed), true);
    return k_err;
}

/// Error cluster a fine-tuning sample falls into: its predicted IoU must be
/// below the error level and it must lie within the nearest error cluster's
/// p95 radius.
inline std::optional<std::size_t> error_membership(const ClusterModel& model, const Eigen::Ref<const Vector>& reduced,
                                                   double predicted_iou) {
    if (!(predicted_iou < kErrorIouLevel) || model.error_count() == 0) return std::nullopt;
    const Vector p = augment(model, reduced, predicted_iou);
    std::size_t best_c = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < model.size(); ++c) {
        if (!model.is_error[c]) continue;
        const double d2 = (model.centroids.row(static_cast<Eigen::Index>(c)).transpose() - p).squaredNorm();
        if (d2 < best) {
            best = d2;
            best_c = c;
        }
    }
    if (std::sqrt(best) <= model.p95_radius[best_c]) return best_c;
    return std::nullopt;
}

/// Clusters the fine-tuning batch and flags clusters whose centroid lies
/// outside every core cluster's p95 radius. Weights are cluster sizes divided
/// by the largest cluster of the same kind; error clusters are sized by their
/// core membership.
inline OrphanReport detect_orphans(const ClusterModel& model, const Matrix& ft_reduced, const std::vector<double>& ft_pred_iou,
                                   std::size_t k_ft, std::uint64_t seed) {
    detail::check_inputs(ft_reduced, ft_pred_iou);
    const auto n = static_cast<std::size_t>(ft_reduced.rows());
    if (n == 0) throw ArgumentError("detect_orphans needs at least one fine-tuning sample");
    if (k_ft < 1 || k_ft > n)
        throw ArgumentError("fine-tuning cluster count " + std::to_string(k_ft) + " outside [1, " + std::to_string(n) + "]");

    const Matrix points = augment_all(model, ft_reduced, ft_pred_iou);
    const auto km = kmeans(points, k_ft, seed);

    OrphanReport rep;
    rep.orphan_of.assign(n, std::nullopt);
    rep.error_of.assign(n, std::nullopt);
    rep.orph_weight.assign(n, 0.0);
    rep.err_weight.assign(n, 0.0);

    std::vector<std::optional<std::size_t>> orphan_index(k_ft);
    for (std::size_t c = 0; c < k_ft; ++c) {
        bool inside_any = false;
        for (std::size_t j = 0; j < model.size() && !inside_any; ++j) {
            if (model.is_error[j]) continue;
            const double d = (km.centroids.row(static_cast<Eigen::Index>(c)) - model.centroids.row(static_cast<Eigen::Index>(j))).norm();
            inside_any = d <= model.p95_radius[j];
        }
        if (!inside_any) {
            orphan_index[c] = rep.orphans.size();
            rep.orphans.push_back({km.centroids.row(static_cast<Eigen::Index>(c)).transpose(), {}});
        }
    }
    for (std::size_t i = 0; i < n; ++i)
        if (auto o = orphan_index[km.labels[i]]) {
            rep.orphans[*o].members.push_back(i);
            rep.orphan_of[i] = *o;
        }

    std::size_t max_orphan = 0;
    for (const auto& o : rep.orphans) max_orphan = std::max(max_orphan, o.members.size());
    std::size_t max_error = 0;
    for (std::size_t c = 0; c < model.size(); ++c)
        if (model.is_error[c]) max_error = std::max(max_error, model.member_count[c]);

    for (std::size_t i = 0; i < n; ++i) {
        if (rep.orphan_of[i] && max_orphan > 0)
            rep.orph_weight[i] =
                static_cast<double>(rep.orphans[*rep.orphan_of[i]].members.size()) / static_cast<double>(max_orphan);
        rep.error_of[i] = error_membership(model, ft_reduced.row(static_cast<Eigen::Index>(i)).transpose(), ft_pred_iou[i]);
        if (rep.error_of[i] && max_error > 0)
            rep.err_weight[i] = static_cast<double>(model.member_count[*rep.error_of[i]]) / static_cast<double>(max_error);
    }
    return rep;
}

// "CLU1" container: u32 K, u32 R, f32 iou_weight, f32 centroids[K*(R+1)],
// f32 p95 radii[K], u8 error flags[K], then f32 scale[R] and u32 member counts[K].
inline void save_clusters(const ClusterModel& model, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path + " for writing");
    detail::write_magic(out, "CLU1");
    detail::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(model.size()));
    detail::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(model.reduced_dim()));
    detail::write_le<float>(out, static_cast<float>(model.iou_weight));
    for (Eigen::Index i = 0; i < model.centroids.rows(); ++i)
        for (Eigen::Index j = 0; j < model.centroids.cols(); ++j)
            detail::write_le<float>(out, static_cast<float>(model.centroids(i, j)));
    for (double r : model.p95_radius) detail::write_le<float>(out, static_cast<float>(r));
    for (auto f : model.is_error) detail::write_le<std::uint8_t>(out, f);
    for (Eigen::Index j = 0; j < model.scale.size(); ++j) detail::write_le<float>(out, static_cast<float>(model.scale(j)));
    for (auto c : model.member_count) detail::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(c));
    if (!out) throw IoError("write failed for " + path);
}

inline ClusterModel load_clusters(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    try {
        detail::expect_magic(in, "CLU1");
        const auto k = detail::read_le<std::uint32_t>(in, "K");
        const auto r = detail::read_le<std::uint32_t>(in, "R");
        if (k == 0 || r == 0) throw DataError("malformed header: K=" + std::to_string(k) + " R=" + std::to_string(r));
        ClusterModel m;
        m.iou_weight = detail::read_le<float>(in, "iou_weight");
        m.centroids.resize(k, r + 1);
        for (std::uint32_t i = 0; i < k; ++i)
            for (std::uint32_t j = 0; j <= r; ++j) m.centroids(i, j) = detail::read_le<float>(in, "centroids");
        m.p95_radius.resize(k);
        for (auto& v : m.p95_radius) v = detail::read_le<float>(in, "radii");
        m.is_error.resize(k);
        for (auto& f : m.is_error) f = detail::read_le<std::uint8_t>(in, "flags");
        m.scale.resize(r);
        for (std::uint32_t j = 0; j < r; ++j) m.scale(j) = detail::read_le<float>(in, "scale");
        m.member_count.resize(k);
        for (auto& c : m.member_count) c = detail::read_le<std::uint32_t>(in, "member counts");
        if (m.core_count() == 0) throw DataError("cluster model has no core clusters");
        return m;
    } catch (const DataError& e) {
        throw DataError::prefixed(path, e);
    }
}

} // namespace samprio
