#include <gtest/gtest.h>

#include "support/support.hpp"

using namespace samprio;

namespace {

// Pixel-by-pixel count through the accessor, independent of the bit vector loop.
double brute_iou(const BinaryMask& a, const BinaryMask& b) {
    int inter = 0;
    int uni = 0;
    for (std::size_t y = 0; y < a.height; ++y)
        for (std::size_t x = 0; x < a.width; ++x) {
            if (a.at(x, y) && b.at(x, y)) ++inter;
            if (a.at(x, y) || b.at(x, y)) ++uni;
        }
    return uni == 0 ? 1.0 : static_cast<double>(inter) / uni;
}

Matrix column(std::initializer_list<double> xs) {
    Matrix m(static_cast<Eigen::Index>(xs.size()), 1);
    Eigen::Index i = 0;
    for (double x : xs) m(i++, 0) = x;
    return m;
}

Vector vec(std::initializer_list<double> xs) {
    Vector v(static_cast<Eigen::Index>(xs.size()));
    Eigen::Index i = 0;
    for (double x : xs) v(i++) = x;
    return v;
}

} // namespace

TEST(Iou, FixtureOneThird) {
    BinaryMask a(4, 4), b(4, 4);
    for (std::size_t y = 0; y < 4; ++y)
        for (std::size_t x = 0; x < 2; ++x) a.set(x, y, true);
    for (std::size_t y = 0; y < 2; ++y)
        for (std::size_t x = 0; x < 4; ++x) b.set(x, y, true);
    EXPECT_DOUBLE_EQ(iou(a, b), 1.0 / 3.0);
}

TEST(Iou, IdentityDisjointEmpty) {
    BinaryMask a(3, 3), b(3, 3);
    a.set(0, 0, true);
    a.set(1, 2, true);
    b.set(2, 2, true);
    EXPECT_EQ(iou(a, a), 1.0);
    EXPECT_EQ(iou(a, b), 0.0);
    EXPECT_EQ(iou(BinaryMask(3, 3), BinaryMask(3, 3)), 1.0);
    EXPECT_THROW(iou(BinaryMask(3, 3), BinaryMask(3, 4)), ArgumentError);
}

TEST(Iou, MatchesBruteForceOracle) {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> density(0.0, 1.0);
    for (int i = 0; i < 200; ++i) {
        const auto a = testsupport::random_mask(rng, 16, 16, density(rng));
        const auto b = testsupport::random_mask(rng, 16, 16, density(rng));
        EXPECT_EQ(iou(a, b), brute_iou(a, b));
        EXPECT_EQ(iou(a, b), iou(b, a));
        EXPECT_EQ(iou(a, a), 1.0);
    }
}

TEST(Iou, MonotoneUnderAgreedPixels) {
    std::mt19937_64 rng(22);
    for (int i = 0; i < 100; ++i) {
        auto a = testsupport::random_mask(rng, 8, 8, 0.4);
        auto b = testsupport::random_mask(rng, 8, 8, 0.4);
        const double before = iou(a, b);
        const std::size_t p = rng() % 64;
        a.bits[p] = b.bits[p] = 1;
        EXPECT_GE(iou(a, b), before);
    }
}

TEST(Predictor, FitValidation) {
    std::mt19937_64 rng(23);
    const Matrix pts = testsupport::random_points(rng, 10, 3);
    const std::vector<double> ious(10, 0.5);
    EXPECT_EQ(fit_iou_predictor(pts, ious, 3).size(), 10u);
    EXPECT_THROW(fit_iou_predictor(pts, ious, 0), ArgumentError);
    EXPECT_THROW(fit_iou_predictor(pts, ious, 11), ArgumentError);
    EXPECT_THROW(fit_iou_predictor(pts, std::vector<double>(9, 0.5), 3), ArgumentError);
    auto bad = ious;
    bad[4] = 1.5;
    EXPECT_THROW(fit_iou_predictor(pts, bad, 3), DataError);
}

TEST(Predictor, ZeroDistanceRule) {
    const auto p = fit_iou_predictor(column({0, 1, 2, 5}), {0.1, 0.7, 0.3, 0.9}, 3);
    EXPECT_DOUBLE_EQ(predict_iou(p, vec({1})), 0.7);
}

TEST(Predictor, Symmetry) {
    const auto p = fit_iou_predictor(column({-1, 1}), {0.2, 0.8}, 2);
    EXPECT_DOUBLE_EQ(predict_iou(p, vec({0})), 0.5);
}

TEST(Predictor, InverseDistanceWeights) {
    const auto p = fit_iou_predictor(column({0, 3}), {1.0, 0.0}, 2);
    EXPECT_NEAR(predict_iou(p, vec({1})), 2.0 / 3.0, 1e-15);
}

TEST(Predictor, DimensionMismatch) {
    const auto p = fit_iou_predictor(column({0, 3}), {1.0, 0.0}, 2);
    EXPECT_THROW(predict_iou(p, vec({1, 2})), DataError);
}

TEST(Predictor, BoundedByNeighbourExtremes) {
    std::mt19937_64 rng(24);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 5 + rng() % 50;
        const std::size_t k = 1 + rng() % n;
        const Matrix refs = testsupport::random_points(rng, n, 3);
        std::vector<double> ious(n);
        for (auto& v : ious) v = u(rng);
        const auto p = fit_iou_predictor(refs, ious, k);
        const Matrix q = testsupport::random_points(rng, 30, 3);
        for (Eigen::Index i = 0; i < q.rows(); ++i) {
            std::vector<double> d2(n);
            for (std::size_t j = 0; j < n; ++j) d2[j] = (refs.row(static_cast<Eigen::Index>(j)) - q.row(i)).squaredNorm();
            double lo = 1, hi = 0;
            for (auto j : detail::k_smallest(d2, k)) {
                lo = std::min(lo, ious[j]);
                hi = std::max(hi, ious[j]);
            }
            const double v = predict_iou(p, q.row(i).transpose());
            EXPECT_GE(v, lo);
            EXPECT_LE(v, hi);
        }
    }
}

TEST(Predictor, PersistenceRoundTrip) {
    testsupport::TempDir dir("knn");
    const auto p = fit_iou_predictor(column({0.5, 3.25, -2}), {1.0, 0.0, 0.25}, 2);
    save_predictor(p, dir.file("p.bin"));
    const auto q = load_predictor(dir.file("p.bin"));
    EXPECT_EQ(q.k, 2u);
    EXPECT_EQ(q.ious, p.ious);
    EXPECT_EQ(q.references, p.references);
}
