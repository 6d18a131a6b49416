#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "samprio/data_model.hpp"
#include "samprio/error.hpp"

namespace samprio {

/// Component weights of the two priority scores. Each set sums to 1 so both
/// scores stay in [0,1].
struct Coefficients {
    double bps_a = 0.75;
    double bps_b = 0.25;
    double mps_a = 0.5;
    double mps_b = 0.25;
    double mps_c = 0.2;
    double mps_d = 0.05;

    void validate() const {
        for (double c : {bps_a, bps_b, mps_a, mps_b, mps_c, mps_d})
            if (!(c >= 0) || !std::isfinite(c)) throw ArgumentError("priority coefficients must be nonnegative");
        if (std::abs(bps_a + bps_b - 1.0) > 1e-9) throw ArgumentError("bps coefficients must sum to 1");
        if (std::abs(mps_a + mps_b + mps_c + mps_d - 1.0) > 1e-9) throw ArgumentError("mps coefficients must sum to 1");
    }

    friend bool operator==(const Coefficients&, const Coefficients&) = default;
};

namespace detail {

inline void check_unit(double v, const char* name) {
    if (!(v >= 0.0 && v <= 1.0)) throw ArgumentError(std::string(name) + " = " + std::to_string(v) + " outside [0,1]");
}

} // namespace detail

/// a*dist + b*(1 - IoU): far from every core cluster and poorly predicted.
inline double bps(double dist, double pred_iou, const Coefficients& c = {}) {
    detail::check_unit(dist, "dist");
    detail::check_unit(pred_iou, "pred_iou");
    return c.bps_a * dist + c.bps_b * (1.0 - pred_iou);
}

/// (a*orph + b*err + c*dist + d*(1 - IoU)) * (1 - LoOP).
inline double mps(double orph, double err, double dist, double pred_iou, double loop, const Coefficients& c = {}) {
    detail::check_unit(orph, "orph");
    detail::check_unit(err, "err");
    detail::check_unit(dist, "dist");
    detail::check_unit(pred_iou, "pred_iou");
    detail::check_unit(loop, "loop");
    return (c.mps_a * orph + c.mps_b * err + c.mps_c * dist + c.mps_d * (1.0 - pred_iou)) * (1.0 - loop);
}

/// Per-sample inputs to the scores; NaN marks a missing feature.
struct FeatureBundle {
    std::uint64_t id = 0;
    double dist = std::nan("");
    double pred_iou = std::nan("");
    double loop = std::nan("");
    double orph = std::nan("");
    double err = std::nan("");
};

struct SampleScore {
    std::uint64_t id = 0;
    double dist = 0;
    double pred_iou = 0;
    double loop = 0;
    double orph = 0;
    double err = 0;
    double bps = 0;
    double mps = 0;

    friend bool operator==(const SampleScore&, const SampleScore&) = default;
};

inline std::vector<SampleScore> score_all(std::span<const FeatureBundle> features, const Coefficients& coeffs = {}) {
    coeffs.validate();
    std::vector<SampleScore> out;
    out.reserve(features.size());
    for (std::size_t i = 0; i < features.size(); ++i) {
        const auto& f = features[i];
        for (double v : {f.dist, f.pred_iou, f.loop, f.orph, f.err})
            if (std::isnan(v)) throw DataError("missing feature", i);
        SampleScore s{f.id, f.dist, f.pred_iou, f.loop, f.orph, f.err, 0, 0};
        try {
            s.bps = bps(f.dist, f.pred_iou, coeffs);
            s.mps = mps(f.orph, f.err, f.dist, f.pred_iou, f.loop, coeffs);
        } catch (const ArgumentError& e) {
            throw DataError(e.what(), i);
        }
        out.push_back(s);
    }
    return out;
}

enum class Strategy { bps, mps };

inline std::string_view to_string(Strategy s) { return s == Strategy::bps ? "bps" : "mps"; }

inline Strategy parse_strategy(std::string_view s) {
    if (s == "bps") return Strategy::bps;
    if (s == "mps") return Strategy::mps;
    throw ArgumentError("unknown strategy \"" + std::string(s) + "\" (expected bps or mps)");
}

inline double score_of(const SampleScore& s, Strategy which) { return which == Strategy::bps ? s.bps : s.mps; }

/// Indices into `scores`, highest chosen score first; ties by ascending id.
inline std::vector<std::size_t> rank_indices(std::span<const SampleScore> scores, Strategy which) {
    std::vector<std::size_t> order(scores.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const double sa = score_of(scores[a], which);
        const double sb = score_of(scores[b], which);
        if (sa != sb) return sa > sb;
        return scores[a].id < scores[b].id;
    });
    return order;
}

inline std::vector<std::uint64_t> rank(std::span<const SampleScore> scores, Strategy which) {
    std::vector<std::uint64_t> ids;
    ids.reserve(scores.size());
    for (auto i : rank_indices(scores, which)) ids.push_back(scores[i].id);
    return ids;
}

inline std::vector<std::uint64_t> select_budget(std::span<const std::uint64_t> ranked, std::size_t n) {
    if (n < 1 || n > ranked.size())
        throw ArgumentError("budget " + std::to_string(n) + " outside [1, " + std::to_string(ranked.size()) + "]");
    return {ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(n)};
}

/// Ranked annotation queue: rank,id,score,dist,pred_iou,loop,orph,err.
inline void write_queue_csv(std::span<const SampleScore> scores, Strategy which, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << "rank,id,score,dist,pred_iou,loop,orph,err\n";
    std::size_t r = 1;
    for (auto i : rank_indices(scores, which)) {
        const auto& s = scores[i];
        out << r++ << ',' << s.id << ',' << detail::format_float(score_of(s, which)) << ','
            << detail::format_float(s.dist) << ',' << detail::format_float(s.pred_iou) << ','
            << detail::format_float(s.loop) << ',' << detail::format_float(s.orph) << ','
            << detail::format_float(s.err) << '\n';
    }
    if (!out) throw IoError("write failed for " + path);
}

} // namespace samprio
