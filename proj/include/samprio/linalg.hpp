#pragma once

#include <cstddef>
#include <span>

#include <Eigen/Dense>

#include "samprio/data_model.hpp"

namespace samprio {

/// One sample per row.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

inline Matrix to_matrix(const Corpus& corpus) {
    Matrix m(static_cast<Eigen::Index>(corpus.size()), static_cast<Eigen::Index>(corpus.dimension()));
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        const auto& v = corpus[i].vector;
        for (std::size_t j = 0; j < v.size(); ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v[j];
    }
    return m;
}

inline Matrix vstack(const Matrix& a, const Matrix& b) {
    if (a.rows() == 0) return b;
    if (b.rows() == 0) return a;
    if (a.cols() != b.cols()) throw ArgumentError("cannot stack matrices of different widths");
    Matrix out(a.rows() + b.rows(), a.cols());
    out.topRows(a.rows()) = a;
    out.bottomRows(b.rows()) = b;
    return out;
}

inline double squared_distance(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b) {
    return (a - b).squaredNorm();
}

} // namespace samprio
