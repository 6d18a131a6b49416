#pragma once

// End-to-end scoring: reduce -> predict IoU -> cluster -> orphans/errors ->
// LoOP -> priority scores.

#include <algorithm>
#include <cstdint>
#include <vector>

#include "samprio/cluster.hpp"
#include "samprio/data_model.hpp"
#include "samprio/linalg.hpp"
#include "samprio/metrics.hpp"
#include "samprio/outlier.hpp"
#include "samprio/priority.hpp"
#include "samprio/reduce.hpp"
#include "samprio/seed.hpp"

namespace samprio {

struct PipelineOptions {
    /// 0 selects the variance-threshold rule.
    std::size_t pca_components = 0;
    double pca_variance = 0.95;
    std::size_t pca_max_components = 32;
    /// Fit PCA on core vectors only instead of the pooled set.
    bool pca_core_only = false;

    std::size_t knn_k = 5;

    /// 0 selects default_cluster_count() of the relevant sample count.
    std::size_t cluster_k = 0;
    std::size_t k_err = 0;
    std::size_t k_ft = 0;
    double iou_weight = 1.0;

    std::size_t loop_k = 20;
    double loop_lambda = 3.0;
    /// Fit LoOP on fine-tuning and core points together.
    bool loop_pool_core = false;

    Coefficients coeffs;
    std::uint64_t seed = 0;

    friend bool operator==(const PipelineOptions&, const PipelineOptions&) = default;
};

struct FittedModels {
    PcaModel pca;
    IouPredictor predictor;
    ClusterModel clusters;
};

/// Everything computed for one fine-tuning batch, row-aligned with the corpus.
struct PoolFeatures {
    Matrix reduced;
    std::vector<double> pred_iou;
    std::vector<Assignment> assignments;
    OrphanReport orphans;
    std::vector<double> loop;
    std::vector<SampleScore> scores;
};

namespace detail {

inline std::vector<double> core_ious(const Corpus& core) {
    std::vector<double> out(core.size());
    for (std::size_t i = 0; i < core.size(); ++i) {
        if (!core[i].measured_iou) throw DataError("core record missing measured_iou", i);
        out[i] = *core[i].measured_iou;
    }
    return out;
}

} // namespace detail

/// Fits PCA, the IoU predictor, core clusters and error clusters. `finetune`
/// may be empty; otherwise it joins the PCA fit unless pca_core_only is set.
inline FittedModels fit_models(const Corpus& core, const Corpus& finetune, const PipelineOptions& opt) {
    if (core.size() < 2) throw DataError("core corpus needs at least 2 records");
    if (!finetune.empty() && finetune.dimension() != core.dimension())
        throw DataError("dimension mismatch: core has " + std::to_string(core.dimension()) + ", fine-tuning has " +
                        std::to_string(finetune.dimension()));
    const auto ious = detail::core_ious(core);
    const Matrix core_m = to_matrix(core);
    const Matrix fit_m = (opt.pca_core_only || finetune.empty()) ? core_m : vstack(core_m, to_matrix(finetune));

    FittedModels models;
    models.pca = opt.pca_components > 0 ? fit_pca(fit_m, opt.pca_components)
                                        : fit_pca_auto(fit_m, opt.pca_variance, opt.pca_max_components);
    const Matrix core_red = transform_all(models.pca, core_m);
    models.predictor = fit_iou_predictor(core_red, ious, std::min(opt.knn_k, core.size()));

    const std::size_t k = opt.cluster_k > 0 ? opt.cluster_k : default_cluster_count(core.size());
    models.clusters = fit_core_clusters(core_red, ious, k, opt.iou_weight, derive_seed(opt.seed, 1));

    const auto n_low = static_cast<std::size_t>(std::count_if(ious.begin(), ious.end(), [](double v) { return v < kErrorIouLevel; }));
    if (n_low > 0) {
        const std::size_t k_err = opt.k_err > 0 ? opt.k_err : std::min(default_cluster_count(n_low), n_low);
        fit_error_clusters(models.clusters, core_red, ious, k_err, derive_seed(opt.seed, 2));
    }
    return models;
}

inline PoolFeatures score_pool(const FittedModels& models, const Corpus& finetune, const PipelineOptions& opt) {
    if (finetune.empty()) throw DataError("fine-tuning corpus is empty");
    if (finetune.dimension() != models.pca.input_dim())
        throw DataError("dimension mismatch: models expect " + std::to_string(models.pca.input_dim()) +
                        ", fine-tuning embeddings have " + std::to_string(finetune.dimension()));
    const std::size_t n = finetune.size();

    PoolFeatures f;
    f.reduced = transform_all(models.pca, to_matrix(finetune));
    f.pred_iou = predict_iou_all(models.predictor, f.reduced);

    f.assignments.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
        f.assignments.push_back(classify(models.clusters, f.reduced.row(static_cast<Eigen::Index>(i)).transpose(), f.pred_iou[i]));
    f.assignments = normalize_distances(std::move(f.assignments));

    const std::size_t k_ft = opt.k_ft > 0 ? opt.k_ft : default_cluster_count(n);
    f.orphans = detect_orphans(models.clusters, f.reduced, f.pred_iou, k_ft, derive_seed(opt.seed, 3));
    for (std::size_t i = 0; i < n; ++i) f.assignments[i].orphan = f.orphans.orphan_of[i];

    const Matrix loop_points = opt.loop_pool_core ? vstack(f.reduced, models.predictor.references) : f.reduced;
    const std::size_t k_nn = std::min(opt.loop_k, static_cast<std::size_t>(loop_points.rows()) - 1);
    if (k_nn < 1) {
        f.loop.assign(n, 0.0);
    } else {
        const auto lm = fit_loop(loop_points, k_nn, opt.loop_lambda);
        f.loop.resize(n);
        for (std::size_t i = 0; i < n; ++i) f.loop[i] = loop_score(lm, i);
    }

    std::vector<FeatureBundle> bundles(n);
    for (std::size_t i = 0; i < n; ++i)
        bundles[i] = {finetune[i].id,          f.assignments[i].norm_dist, f.pred_iou[i], f.loop[i],
                      f.orphans.orph_weight[i], f.orphans.err_weight[i]};
    f.scores = score_all(bundles, opt.coeffs);
    return f;
}

} // namespace samprio
