#pragma once

// Linear dimensionality reduction of activation vectors.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "samprio/detail/binio.hpp"
#include "samprio/error.hpp"
#include "samprio/linalg.hpp"

namespace samprio {

/// Fitted PCA projection. `components` holds one orthonormal direction per
/// row, ordered by decreasing eigenvalue.
struct PcaModel {
    Vector mean;
    Matrix components;
    Vector eigenvalues;
    double total_variance = 0.0;

    std::size_t input_dim() const { return static_cast<std::size_t>(mean.size()); }
    std::size_t retained() const { return static_cast<std::size_t>(components.rows()); }
};

namespace detail {

// Flip each direction so its largest-magnitude entry (first on ties) is positive.
inline void canonicalize_signs(Matrix& components) {
    for (Eigen::Index r = 0; r < components.rows(); ++r) {
        Eigen::Index best = 0;
        for (Eigen::Index c = 1; c < components.cols(); ++c)
            if (std::abs(components(r, c)) > std::abs(components(r, best))) best = c;
        if (components(r, best) < 0) components.row(r) *= -1.0;
    }
}

// Extends `rows` orthonormal rows of `basis` to `basis.rows()` rows by
// Gram-Schmidt over the standard basis.
inline void complete_orthonormal(Matrix& basis, Eigen::Index filled) {
    const Eigen::Index d = basis.cols();
    for (Eigen::Index e = 0; e < d && filled < basis.rows(); ++e) {
        Vector v = Vector::Unit(d, e);
        for (int pass = 0; pass < 2; ++pass)
            for (Eigen::Index r = 0; r < filled; ++r) v -= basis.row(r).dot(v) * basis.row(r).transpose();
        const double n = v.norm();
        if (n > 1e-6) basis.row(filled++) = (v / n).transpose();
    }
}

} // namespace detail

/// Fits `r` principal components on the rows of `points`.
///
/// Uses the D x D covariance, or the N x N Gram matrix when there are fewer
/// samples than dimensions. Eigenvalues are sample variances (divisor N-1).
inline PcaModel fit_pca(const Matrix& points, std::size_t r) {
    const auto n = points.rows();
    const auto d = points.cols();
    if (n < 2) throw ArgumentError("fit_pca needs at least 2 samples");
    if (d < 1) throw ArgumentError("fit_pca needs dimension >= 1");
    if (r < 1 || r > static_cast<std::size_t>(std::min(n, d)))
        throw ArgumentError("requested components " + std::to_string(r) + " outside [1, " +
                            std::to_string(std::min(n, d)) + "]");

    bool constant = true;
    for (Eigen::Index i = 1; i < n && constant; ++i) constant = points.row(i) == points.row(0);
    if (constant) throw DataError("zero total variance: all vectors are identical");

    PcaModel model;
    model.mean = points.colwise().mean().transpose();
    const Matrix centered = points.rowwise() - model.mean.transpose();
    const double denom = static_cast<double>(n - 1);
    const auto rr = static_cast<Eigen::Index>(r);

    Vector evals;
    Matrix evecs; // one direction per row
    if (n >= d) {
        const Eigen::MatrixXd cov = (centered.transpose() * centered) / denom;
        model.total_variance = cov.trace();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
        if (solver.info() != Eigen::Success) throw Error("covariance eigen-decomposition failed");
        evals = solver.eigenvalues().reverse();
        evecs = solver.eigenvectors().rowwise().reverse().transpose();
    } else {
        const Eigen::MatrixXd gram = (centered * centered.transpose()) / denom;
        model.total_variance = gram.trace();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram);
        if (solver.info() != Eigen::Success) throw Error("Gram eigen-decomposition failed");
        const Vector gvals = solver.eigenvalues().reverse();
        const Eigen::MatrixXd gvecs = solver.eigenvectors().rowwise().reverse();
        evals = Vector::Zero(rr);
        evecs = Matrix::Zero(rr, d);
        const double tol = 1e-12 * std::max(1.0, gvals(0));
        Eigen::Index filled = 0;
        for (; filled < rr && gvals(filled) > tol; ++filled) {
            Vector dir = centered.transpose() * gvecs.col(filled);
            evecs.row(filled) = (dir / dir.norm()).transpose();
            evals(filled) = gvals(filled);
        }
        detail::complete_orthonormal(evecs, filled);
    }

    model.eigenvalues = evals.head(rr).cwiseMax(0.0);
    model.components = evecs.topRows(rr);
    detail::canonicalize_signs(model.components);
    return model;
}

/// Eigenvalue share of the fitted data's total variance, per component.
inline std::vector<double> explained_variance_ratio(const PcaModel& model) {
    std::vector<double> out(model.retained());
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = model.total_variance > 0 ? model.eigenvalues(static_cast<Eigen::Index>(i)) / model.total_variance : 0.0;
    return out;
}

/// Smallest count whose cumulative ratio reaches `threshold`, capped at `cap`.
inline std::size_t choose_components(const std::vector<double>& ratios, double threshold, std::size_t cap) {
    double acc = 0;
    std::size_t r = ratios.size();
    for (std::size_t i = 0; i < ratios.size(); ++i) {
        acc += ratios[i];
        if (acc >= threshold - 1e-12) {
            r = i + 1;
            break;
        }
    }
    return std::max<std::size_t>(1, std::min(r, cap));
}

/// Keeps only the leading `r` components.
inline PcaModel truncate(const PcaModel& model, std::size_t r) {
    if (r < 1 || r > model.retained()) throw ArgumentError("cannot truncate to " + std::to_string(r) + " components");
    PcaModel out = model;
    out.components = model.components.topRows(static_cast<Eigen::Index>(r));
    out.eigenvalues = model.eigenvalues.head(static_cast<Eigen::Index>(r));
    return out;
}

/// Full fit followed by the variance-threshold rule.
inline PcaModel fit_pca_auto(const Matrix& points, double variance_threshold = 0.95, std::size_t cap = 32) {
    const auto full = fit_pca(points, static_cast<std::size_t>(std::min(points.rows(), points.cols())));
    return truncate(full, choose_components(explained_variance_ratio(full), variance_threshold, cap));
}

inline Vector transform(const PcaModel& model, const Eigen::Ref<const Vector>& v) {
    if (v.size() != model.mean.size())
        throw DataError("dimension mismatch: model expects " + std::to_string(model.mean.size()) + ", got " +
                        std::to_string(v.size()));
    return model.components * (v - model.mean);
}

inline Matrix transform_all(const PcaModel& model, const Matrix& points) {
    if (points.cols() != model.mean.size())
        throw DataError("dimension mismatch: model expects " + std::to_string(model.mean.size()) + ", got " +
                        std::to_string(points.cols()));
    return (points.rowwise() - model.mean.transpose()) * model.components.transpose();
}

// "PCA1" container: u32 D, u32 R, f32 mean[D], f32 components[R*D] (row-major),
// f32 eigenvalues[R], then f64 total variance.
inline void save_pca(const PcaModel& model, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path + " for writing");
    detail::write_magic(out, "PCA1");
    detail::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(model.input_dim()));
    detail::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(model.retained()));
    for (Eigen::Index j = 0; j < model.mean.size(); ++j) detail::write_le<float>(out, static_cast<float>(model.mean(j)));
    for (Eigen::Index r = 0; r < model.components.rows(); ++r)
        for (Eigen::Index c = 0; c < model.components.cols(); ++c)
            detail::write_le<float>(out, static_cast<float>(model.components(r, c)));
    for (Eigen::Index r = 0; r < model.eigenvalues.size(); ++r)
        detail::write_le<float>(out, static_cast<float>(model.eigenvalues(r)));
    detail::write_le<double>(out, model.total_variance);
    if (!out) throw IoError("write failed for " + path);
}

inline PcaModel load_pca(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    try {
        detail::expect_magic(in, "PCA1");
        const auto d = detail::read_le<std::uint32_t>(in, "D");
        const auto r = detail::read_le<std::uint32_t>(in, "R");
        if (d == 0 || r == 0 || r > d) throw DataError("malformed header: D=" + std::to_string(d) + " R=" + std::to_string(r));
        PcaModel m;
        m.mean.resize(d);
        for (std::uint32_t j = 0; j < d; ++j) m.mean(j) = detail::read_le<float>(in, "mean");
        m.components.resize(r, d);
        for (std::uint32_t i = 0; i < r; ++i)
            for (std::uint32_t j = 0; j < d; ++j) m.components(i, j) = detail::read_le<float>(in, "components");
        m.eigenvalues.resize(r);
        for (std::uint32_t i = 0; i < r; ++i) m.eigenvalues(i) = detail::read_le<float>(in, "eigenvalues");
        m.total_variance = detail::read_le<double>(in, "total variance");
        return m;
    } catch (const DataError& e) {
        throw DataError::prefixed(path, e);
    }
}

} // namespace samprio
