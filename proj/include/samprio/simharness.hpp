#pragma once

// Seeded synthetic benchmark: a core latent space with measured IoU, a
// fine-tuning pool with novel clusters and uniform outliers, and a 1-NN
// coverage oracle standing in for fine-tuned model quality.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include "samprio/data_model.hpp"
#include "samprio/error.hpp"
#include "samprio/linalg.hpp"
#include "samprio/pipeline.hpp"
#include "samprio/seed.hpp"

namespace samprio {

struct CoreClusterSpec {
    std::vector<double> center;
    double stddev = 1.0;
    double iou_mean = 0.5;
    double iou_stddev = 0.1;
    /// Mixture weights within the core set and the core-like part of the pool.
    double core_weight = 1.0;
    double ft_weight = 1.0;
};

struct SyntheticSpec {
    std::size_t dims = 8;
    std::vector<CoreClusterSpec> core_clusters;
    std::vector<std::size_t> novel_sizes;
    double outlier_fraction = 0.02;
    std::size_t core_n = 2000;
    std::size_t ft_n = 2200;
    std::uint64_t seed = 0;

    std::size_t outlier_count() const {
        return static_cast<std::size_t>(std::llround(outlier_fraction * static_cast<double>(ft_n)));
    }
};

/// Two dominant modes (undeveloped and urbanized) plus a low-IoU sparse
/// settlement mode between them and a suburban mode; two novel clusters.
inline SyntheticSpec default_synthetic_spec(std::size_t dims = 8) {
    if (dims < 2) throw ArgumentError("synthetic benchmark needs at least 2 dimensions");
    auto at = [dims](double x, double y) {
        std::vector<double> c(dims, 0.0);
        c[0] = x;
        c[1] = y;
        return c;
    };
    SyntheticSpec s;
    s.dims = dims;
    s.core_clusters = {
        {at(-5.0, 0.0), 1.0, 0.60, 0.10, 0.4, 0.4},  // undeveloped
        {at(5.0, 0.0), 1.0, 0.85, 0.08, 0.4, 0.4},   // urbanized
        {at(0.0, 2.0), 1.0, 0.35, 0.10, 0.1, 0.1},   // sparse buildings
        {at(2.5, -4.0), 1.0, 0.70, 0.10, 0.1, 0.1},  // suburban
    };
    s.novel_sizes = {60, 140};
    return s;
}

/// Hidden labels for the fine-tuning pool, row-aligned with its corpus.
struct GroundTruth {
    static constexpr int kOutlier = -1;

    /// Core cluster index, core_clusters.size() + j for novel cluster j, or kOutlier.
    std::vector<int> hidden_cluster;
    std::vector<std::uint8_t> is_novel;
    std::vector<std::uint8_t> is_outlier;

    friend bool operator==(const GroundTruth&, const GroundTruth&) = default;
};

struct SyntheticData {
    Corpus core;
    Corpus finetune;
    GroundTruth truth;
};

inline void validate(const SyntheticSpec& s) {
    if (s.dims < 1) throw ArgumentError("dims must be positive");
    if (s.core_clusters.empty()) throw ArgumentError("at least one core cluster is required");
    if (s.core_n < 2 || s.ft_n < 1) throw ArgumentError("core_n must be >= 2 and ft_n >= 1");
    if (!(s.outlier_fraction >= 0.0 && s.outlier_fraction <= 0.2)) throw ArgumentError("outlier_fraction must lie in [0, 0.2]");
    double core_w = 0;
    double ft_w = 0;
    for (const auto& c : s.core_clusters) {
        if (c.center.size() != s.dims) throw ArgumentError("core cluster center has wrong dimension");
        if (!(c.stddev > 0) || !(c.iou_stddev >= 0) || !(c.core_weight >= 0) || !(c.ft_weight >= 0))
            throw ArgumentError("core cluster parameters must be nonnegative (stddev positive)");
        core_w += c.core_weight;
        ft_w += c.ft_weight;
    }
    if (!(core_w > 0)) throw ArgumentError("core cluster weights sum to zero");
    std::size_t fixed = s.outlier_count();
    for (auto n : s.novel_sizes) {
        if (n == 0) throw ArgumentError("novel cluster sizes must be positive");
        fixed += n;
    }
    if (fixed > s.ft_n)
        throw ArgumentError("infeasible spec: ft_n = " + std::to_string(s.ft_n) + " is smaller than novel plus outlier count " +
                            std::to_string(fixed));
    if (fixed < s.ft_n && !(ft_w > 0)) throw ArgumentError("fine-tuning cluster weights sum to zero");
}

/// Novel clusters sit at least 10 core stddevs from every core center (and
/// from each other); outliers are uniform in a box 20x the core data span.
inline SyntheticData generate_synthetic(const SyntheticSpec& spec) {
    validate(spec);
    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const std::size_t dims = spec.dims;
    const std::size_t k = spec.core_clusters.size();

    std::vector<double> core_w, ft_w;
    double sigma_max = 0;
    for (const auto& c : spec.core_clusters) {
        core_w.push_back(c.core_weight);
        ft_w.push_back(c.ft_weight);
        sigma_max = std::max(sigma_max, c.stddev);
    }
    std::discrete_distribution<std::size_t> pick_core(core_w.begin(), core_w.end());

    auto sample_around = [&](const std::vector<double>& center, double sd) {
        std::vector<float> v(dims);
        for (std::size_t j = 0; j < dims; ++j) v[j] = static_cast<float>(center[j] + sd * gauss(rng));
        return v;
    };

    std::vector<EmbeddingRecord> core;
    core.reserve(spec.core_n);
    for (std::size_t i = 0; i < spec.core_n; ++i) {
        const auto& c = spec.core_clusters[pick_core(rng)];
        EmbeddingRecord r;
        r.id = i;
        r.split = Split::core;
        r.vector = sample_around(c.center, c.stddev);
        r.measured_iou = static_cast<float>(std::clamp(c.iou_mean + c.iou_stddev * gauss(rng), 0.0, 1.0));
        core.push_back(std::move(r));
    }

    auto dist = [](const std::vector<double>& a, const std::vector<double>& b) {
        double s = 0;
        for (std::size_t j = 0; j < a.size(); ++j) s += (a[j] - b[j]) * (a[j] - b[j]);
        return std::sqrt(s);
    };
    std::vector<std::vector<double>> novel_centers;
    std::uniform_int_distribution<std::size_t> pick_anchor(0, k - 1);
    std::uniform_real_distribution<double> radius(10.0, 14.0);
    for (std::size_t j = 0; j < spec.novel_sizes.size(); ++j) {
        bool placed = false;
        for (int attempt = 0; attempt < 10000 && !placed; ++attempt) {
            const auto& anchor = spec.core_clusters[pick_anchor(rng)].center;
            std::vector<double> dir(dims);
            double norm = 0;
            for (auto& x : dir) {
                x = gauss(rng);
                norm += x * x;
            }
            norm = std::sqrt(norm);
            const double r = radius(rng) * sigma_max;
            std::vector<double> c(dims);
            for (std::size_t d = 0; d < dims; ++d) c[d] = anchor[d] + r * dir[d] / norm;
            placed = true;
            for (const auto& cc : spec.core_clusters) placed = placed && dist(c, cc.center) >= 10.0 * cc.stddev;
            for (const auto& nc : novel_centers) placed = placed && dist(c, nc) >= 10.0 * sigma_max;
            if (placed) novel_centers.push_back(std::move(c));
        }
        if (!placed) throw ArgumentError("infeasible spec: cannot place novel cluster " + std::to_string(j));
    }

    std::vector<double> lo(dims, std::numeric_limits<double>::infinity());
    std::vector<double> hi(dims, -std::numeric_limits<double>::infinity());
    for (const auto& c : spec.core_clusters)
        for (std::size_t d = 0; d < dims; ++d) {
            lo[d] = std::min(lo[d], c.center[d] - 3.0 * c.stddev);
            hi[d] = std::max(hi[d], c.center[d] + 3.0 * c.stddev);
        }

    struct Pending {
        std::vector<float> v;
        int hidden;
    };
    std::vector<Pending> pool;
    pool.reserve(spec.ft_n);
    const std::size_t n_out = spec.outlier_count();
    std::size_t n_novel = 0;
    for (auto n : spec.novel_sizes) n_novel += n;
    const std::size_t n_corelike = spec.ft_n - n_out - n_novel;
    if (n_corelike > 0) {
        std::discrete_distribution<std::size_t> pick_ft(ft_w.begin(), ft_w.end());
        for (std::size_t i = 0; i < n_corelike; ++i) {
            const auto c = pick_ft(rng);
            pool.push_back({sample_around(spec.core_clusters[c].center, spec.core_clusters[c].stddev), static_cast<int>(c)});
        }
    }
    for (std::size_t j = 0; j < novel_centers.size(); ++j)
        for (std::size_t i = 0; i < spec.novel_sizes[j]; ++i)
            pool.push_back({sample_around(novel_centers[j], sigma_max), static_cast<int>(k + j)});
    for (std::size_t i = 0; i < n_out; ++i) {
        std::vector<float> v(dims);
        for (std::size_t d = 0; d < dims; ++d) {
            const double mid = 0.5 * (lo[d] + hi[d]);
            const double half = 10.0 * (hi[d] - lo[d]);
            v[d] = static_cast<float>(std::uniform_real_distribution<double>(mid - half, mid + half)(rng));
        }
        pool.push_back({std::move(v), GroundTruth::kOutlier});
    }
    std::shuffle(pool.begin(), pool.end(), rng);

    SyntheticData out;
    std::vector<EmbeddingRecord> ft;
    ft.reserve(pool.size());
    for (std::size_t i = 0; i < pool.size(); ++i) {
        EmbeddingRecord r;
        r.id = spec.core_n + i;
        r.split = Split::finetune;
        r.vector = std::move(pool[i].v);
        ft.push_back(std::move(r));
        out.truth.hidden_cluster.push_back(pool[i].hidden);
        out.truth.is_outlier.push_back(pool[i].hidden == GroundTruth::kOutlier);
        out.truth.is_novel.push_back(pool[i].hidden >= static_cast<int>(k));
    }
    out.core = Corpus(std::move(core));
    out.finetune = Corpus(std::move(ft));
    return out;
}

/// Incremental 1-NN coverage: after each added labelled sample, every
/// non-outlier pool sample takes the hidden label of its nearest labelled
/// sample (ties to the lower pool row).
class QualityTracker {
public:
    QualityTracker(const Matrix& pool, const GroundTruth& truth) : pool_(pool), truth_(truth) {
        if (static_cast<std::size_t>(pool.rows()) != truth.hidden_cluster.size())
            throw ArgumentError("pool and ground truth differ in length");
        for (std::size_t i = 0; i < truth.hidden_cluster.size(); ++i)
            if (!truth.is_outlier[i]) valid_.push_back(i);
        best_d2_.assign(valid_.size(), std::numeric_limits<double>::infinity());
        best_row_.assign(valid_.size(), std::numeric_limits<std::size_t>::max());
    }

    void add(std::size_t row) {
        if (row >= static_cast<std::size_t>(pool_.rows())) throw ArgumentError("labelled row out of range");
        const auto p = pool_.row(static_cast<Eigen::Index>(row));
        const int label = truth_.hidden_cluster[row];
        for (std::size_t v = 0; v < valid_.size(); ++v) {
            const std::size_t i = valid_[v];
            const double d2 = (pool_.row(static_cast<Eigen::Index>(i)) - p).squaredNorm();
            if (d2 < best_d2_[v] || (d2 == best_d2_[v] && row < best_row_[v])) {
                const bool was = best_row_[v] != std::numeric_limits<std::size_t>::max() &&
                                 truth_.hidden_cluster[best_row_[v]] == truth_.hidden_cluster[i];
                const bool now = label == truth_.hidden_cluster[i];
                correct_ += static_cast<std::ptrdiff_t>(now) - static_cast<std::ptrdiff_t>(was);
                best_d2_[v] = d2;
                best_row_[v] = row;
            }
        }
    }

    double quality() const {
        if (valid_.empty()) return 1.0;
        return static_cast<double>(correct_) / static_cast<double>(valid_.size());
    }

private:
    const Matrix& pool_;
    const GroundTruth& truth_;
    std::vector<std::size_t> valid_;
    std::vector<double> best_d2_;
    std::vector<std::size_t> best_row_;
    std::ptrdiff_t correct_ = 0;
};

/// Fraction of non-outlier pool samples whose nearest labelled sample shares
/// their hidden cluster.
inline double surrogate_quality(std::span<const std::uint64_t> labeled_ids, const Corpus& ft, const GroundTruth& truth) {
    if (labeled_ids.empty()) throw ArgumentError("surrogate_quality needs a non-empty selection");
    std::unordered_map<std::uint64_t, std::size_t> row_of;
    for (std::size_t i = 0; i < ft.size(); ++i) row_of.emplace(ft[i].id, i);
    const Matrix pool = to_matrix(ft);
    QualityTracker tracker(pool, truth);
    for (auto id : labeled_ids) {
        auto it = row_of.find(id);
        if (it == row_of.end()) throw ArgumentError("labelled id " + std::to_string(id) + " is not in the fine-tuning pool");
        tracker.add(it->second);
    }
    return tracker.quality();
}

enum class SweepStrategy { priority_bps, priority_mps, random };

inline std::string_view to_string(SweepStrategy s) {
    switch (s) {
    case SweepStrategy::priority_bps: return "priority_bps";
    case SweepStrategy::priority_mps: return "priority_mps";
    case SweepStrategy::random: return "random";
    }
    return "?";
}

inline SweepStrategy parse_sweep_strategy(std::string_view s) {
    if (s == "priority_bps") return SweepStrategy::priority_bps;
    if (s == "priority_mps") return SweepStrategy::priority_mps;
    if (s == "random") return SweepStrategy::random;
    throw ArgumentError("unknown sweep strategy \"" + std::string(s) + "\"");
}

struct SweepRow {
    std::string strategy;
    std::size_t budget = 0;
    std::size_t seed = 0;
    double quality = 0;

    friend bool operator==(const SweepRow&, const SweepRow&) = default;
};

struct CellStats {
    double mean = 0;
    double stddev = 0;
    std::size_t n = 0;
};

struct SweepResult {
    std::vector<SweepRow> rows;

    /// Mean and sample standard deviation over seeds, keyed by (strategy, budget).
    std::map<std::pair<std::string, std::size_t>, CellStats> aggregate() const {
        std::map<std::pair<std::string, std::size_t>, std::vector<double>> cells;
        for (const auto& r : rows) cells[{r.strategy, r.budget}].push_back(r.quality);
        std::map<std::pair<std::string, std::size_t>, CellStats> out;
        for (const auto& [key, q] : cells) {
            CellStats s;
            s.n = q.size();
            s.mean = std::accumulate(q.begin(), q.end(), 0.0) / static_cast<double>(q.size());
            double ss = 0;
            for (double v : q) ss += (v - s.mean) * (v - s.mean);
            s.stddev = q.size() > 1 ? std::sqrt(ss / static_cast<double>(q.size() - 1)) : 0.0;
            out[key] = s;
        }
        return out;
    }

    friend bool operator==(const SweepResult&, const SweepResult&) = default;
};

/// "250:2150:100" -> {250, 350, ..., 2150}.
inline std::vector<std::size_t> budget_range(std::size_t first, std::size_t last, std::size_t step) {
    if (step == 0 || first == 0 || last < first) throw ArgumentError("invalid budget range");
    std::vector<std::size_t> out;
    for (std::size_t b = first; b <= last; b += step) out.push_back(b);
    return out;
}

namespace detail {

inline std::vector<double> quality_curve(const Matrix& pool, const GroundTruth& truth, std::span<const std::size_t> order,
                                         std::span<const std::size_t> budgets) {
    std::vector<std::size_t> sorted(budgets.begin(), budgets.end());
    std::sort(sorted.begin(), sorted.end());
    std::map<std::size_t, double> at;
    QualityTracker tracker(pool, truth);
    std::size_t added = 0;
    for (auto b : sorted) {
        while (added < b) tracker.add(order[added++]);
        at[b] = tracker.quality();
    }
    std::vector<double> out;
    for (auto b : budgets) out.push_back(at.at(b));
    return out;
}

} // namespace detail

/// Per seed: generate data, run the full scoring pipeline on the pool, and
/// evaluate nested budget prefixes of each strategy's ordering. The random
/// baseline is one seeded permutation per seed. Seeds run on `threads`
/// workers (0 = hardware concurrency); rows are ordered by strategy, budget,
/// seed regardless.
inline SweepResult run_budget_sweep(const SyntheticSpec& spec, const std::vector<std::size_t>& budgets,
                                    const std::vector<SweepStrategy>& strategies, std::size_t n_seeds,
                                    const PipelineOptions& options = {}, std::size_t threads = 0) {
    validate(spec);
    if (n_seeds < 1) throw ArgumentError("n_seeds must be at least 1");
    if (budgets.empty() || strategies.empty()) throw ArgumentError("budgets and strategies must be non-empty");
    for (auto b : budgets)
        if (b < 1 || b > spec.ft_n)
            throw ArgumentError("budget " + std::to_string(b) + " outside [1, ft_n = " + std::to_string(spec.ft_n) + "]");

    // quality[seed][strategy][budget]
    std::vector<std::vector<std::vector<double>>> quality(n_seeds);
    std::vector<std::exception_ptr> failures(n_seeds);

    auto run_seed = [&](std::size_t s) {
        SyntheticSpec sub = spec;
        sub.seed = derive_seed(spec.seed, 100 + s);
        PipelineOptions opt = options;
        opt.seed = derive_seed(spec.seed, 200 + s);
        const auto data = generate_synthetic(sub);
        const Matrix pool = to_matrix(data.finetune);

        std::vector<SampleScore> scores;
        const bool need_pipeline = std::any_of(strategies.begin(), strategies.end(),
                                               [](SweepStrategy st) { return st != SweepStrategy::random; });
        if (need_pipeline) scores = score_pool(fit_models(data.core, data.finetune, opt), data.finetune, opt).scores;

        for (auto st : strategies) {
            std::vector<std::size_t> order;
            if (st == SweepStrategy::random) {
                order.resize(data.finetune.size());
                std::iota(order.begin(), order.end(), std::size_t{0});
                std::mt19937_64 rng(derive_seed(spec.seed, 300 + s));
                std::shuffle(order.begin(), order.end(), rng);
            } else {
                order = rank_indices(scores, st == SweepStrategy::priority_bps ? Strategy::bps : Strategy::mps);
            }
            quality[s].push_back(detail::quality_curve(pool, data.truth, order, budgets));
        }
    };

    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = std::min(threads, n_seeds);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t s; (s = next.fetch_add(1)) < n_seeds;) {
            try {
                run_seed(s);
            } catch (...) {
                failures[s] = std::current_exception();
            }
        }
    };
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    }
    for (auto& f : failures)
        if (f) std::rethrow_exception(f);

    SweepResult result;
    for (std::size_t si = 0; si < strategies.size(); ++si)
        for (std::size_t bi = 0; bi < budgets.size(); ++bi)
            for (std::size_t s = 0; s < n_seeds; ++s)
                result.rows.push_back({std::string(to_string(strategies[si])), budgets[bi], s, quality[s][si][bi]});
    return result;
}

inline void write_sweep_csv(const SweepResult& result, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << "strategy,budget,seed,quality\n";
    char buf[40];
    for (const auto& r : result.rows) {
        std::snprintf(buf, sizeof buf, "%.17g", r.quality);
        out << r.strategy << ',' << r.budget << ',' << r.seed << ',' << buf << '\n';
    }
    if (!out) throw IoError("write failed for " + path);
}

inline SweepResult read_sweep_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::string line;
    if (!std::getline(in, line) || line != "strategy,budget,seed,quality")
        throw DataError(path + ": malformed header: expected strategy,budget,seed,quality");
    SweepResult result;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const std::size_t index = result.rows.size();
        auto f = detail::split_csv_line(line);
        if (f.size() != 4) throw DataError(path + ": expected 4 fields", index);
        SweepRow r;
        r.strategy = std::string(f[0]);
        r.budget = detail::parse_number<std::size_t>(f[1], index, "budget");
        r.seed = detail::parse_number<std::size_t>(f[2], index, "seed");
        r.quality = detail::parse_number<double>(f[3], index, "quality");
        result.rows.push_back(std::move(r));
    }
    return result;
}

/// Writes the per-budget table (mean/stddev per strategy plus each priority
/// strategy's difference to random) and a plain-text summary. Returns the
/// summary text.
inline std::string write_report(const SweepResult& result, const std::string& table_path, const std::string& summary_path) {
    if (result.rows.empty()) throw ArgumentError("cannot report an empty sweep result");
    const auto agg = result.aggregate();
    std::vector<std::string> strategies;
    std::vector<std::size_t> budgets;
    for (const auto& r : result.rows) {
        if (std::find(strategies.begin(), strategies.end(), r.strategy) == strategies.end()) strategies.push_back(r.strategy);
        if (std::find(budgets.begin(), budgets.end(), r.budget) == budgets.end()) budgets.push_back(r.budget);
    }
    std::sort(budgets.begin(), budgets.end());
    const bool has_random = std::find(strategies.begin(), strategies.end(), "random") != strategies.end();
    std::vector<std::string> priorities;
    for (const auto& s : strategies)
        if (s != "random") priorities.push_back(s);

    auto cell = [&](const std::string& s, std::size_t b) -> const CellStats* {
        auto it = agg.find({s, b});
        return it == agg.end() ? nullptr : &it->second;
    };
    char buf[40];
    auto num = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.6f", v);
        return std::string(buf);
    };

    std::ofstream table(table_path, std::ios::trunc);
    if (!table) throw IoError("cannot open " + table_path + " for writing");
    table << "budget";
    for (const auto& s : strategies) table << ',' << s << "_mean," << s << "_std";
    if (has_random)
        for (const auto& p : priorities) table << ',' << p << "_minus_random";
    table << '\n';
    for (auto b : budgets) {
        table << b;
        for (const auto& s : strategies) {
            const auto* c = cell(s, b);
            table << ',' << (c ? num(c->mean) : "") << ',' << (c ? num(c->stddev) : "");
        }
        if (has_random)
            for (const auto& p : priorities) {
                const auto* cp = cell(p, b);
                const auto* cr = cell("random", b);
                table << ',' << (cp && cr ? num(cp->mean - cr->mean) : "");
            }
        table << '\n';
    }
    if (!table) throw IoError("write failed for " + table_path);

    std::ostringstream sum;
    std::size_t n_seeds = 0;
    for (const auto& [key, c] : agg) n_seeds = std::max(n_seeds, c.n);
    sum << "budget sweep: " << budgets.size() << " budgets (" << budgets.front() << ".." << budgets.back() << "), "
        << strategies.size() << " strategies, " << n_seeds << " seeds\n";
    for (const auto& p : priorities) {
        if (!has_random) break;
        std::optional<std::size_t> largest;
        std::size_t wins = 0;
        for (auto b : budgets) {
            const auto* cp = cell(p, b);
            const auto* cr = cell("random", b);
            if (cp && cr && cp->mean >= cr->mean) {
                largest = b;
                ++wins;
            }
        }
        sum << p << " vs random: priority >= random at " << wins << " of " << budgets.size() << " budgets; ";
        if (largest)
            sum << "largest such budget " << *largest << '\n';
        else
            sum << "no budget where priority >= random\n";
    }
    for (auto b : budgets) {
        sum << "  budget " << b << ':';
        for (const auto& s : strategies)
            if (const auto* c = cell(s, b)) sum << ' ' << s << '=' << num(c->mean) << "+-" << num(c->stddev);
        sum << '\n';
    }
    const std::string text = sum.str();
    std::ofstream summary(summary_path, std::ios::trunc);
    if (!summary) throw IoError("cannot open " + summary_path + " for writing");
    summary << text;
    if (!summary) throw IoError("write failed for " + summary_path);
    return text;
}

struct ScatterPoint {
    std::uint64_t id = 0;
    double x = 0;
    double y = 0;
    double iou = 0;
    Split split = Split::core;
};

/// CSV id,x,y,iou,split for external plotting.
inline void export_scatter(std::span<const ScatterPoint> points, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << "id,x,y,iou,split\n";
    for (const auto& p : points) {
        if (!(p.iou >= 0.0 && p.iou <= 1.0)) throw DataError("scatter IoU outside [0,1] for id " + std::to_string(p.id));
        out << p.id << ',' << detail::format_float(p.x) << ',' << detail::format_float(p.y) << ','
            << detail::format_float(p.iou) << ',' << to_string(p.split) << '\n';
    }
    if (!out) throw IoError("write failed for " + path);
}

/// Two-component view of core and fine-tuning samples. Core points carry their
/// measured IoU, fine-tuning points the IoU predicted by `models`.
inline std::vector<ScatterPoint> scatter_view(const Corpus& core, const Corpus& finetune, const FittedModels& models,
                                              const PipelineOptions& opt) {
    const Matrix core_m = to_matrix(core);
    const Matrix fit_m = (opt.pca_core_only || finetune.empty()) ? core_m : vstack(core_m, to_matrix(finetune));
    if (fit_m.cols() < 2) throw DataError("scatter view needs embeddings with at least 2 dimensions");
    const auto view = fit_pca(fit_m, 2);
    std::vector<ScatterPoint> out;
    const Matrix core_2d = transform_all(view, core_m);
    for (std::size_t i = 0; i < core.size(); ++i)
        out.push_back({core[i].id, core_2d(static_cast<Eigen::Index>(i), 0), core_2d(static_cast<Eigen::Index>(i), 1),
                       static_cast<double>(core[i].measured_iou.value_or(0.0f)), Split::core});
    if (!finetune.empty()) {
        const Matrix ft_m = to_matrix(finetune);
        const Matrix ft_2d = transform_all(view, ft_m);
        const auto pred = predict_iou_all(models.predictor, transform_all(models.pca, ft_m));
        for (std::size_t i = 0; i < finetune.size(); ++i)
            out.push_back({finetune[i].id, ft_2d(static_cast<Eigen::Index>(i), 0), ft_2d(static_cast<Eigen::Index>(i), 1),
                           pred[i], Split::finetune});
    }
    return out;
}

} // namespace samprio
