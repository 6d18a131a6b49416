#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>
#include <unistd.h>

#include "samprio/samprio.hpp"

namespace testsupport {

namespace fs = std::filesystem;

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static std::uint64_t counter = 0;
        path_ = fs::temp_directory_path() /
                ("samprio_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    std::string file(const std::string& name) const { return (path_ / name).string(); }
    const fs::path& path() const { return path_; }

private:
    fs::path path_;
};

inline std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

inline void spit(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << text;
}

/// Runs a shell command; returns its exit status.
inline int run(const std::string& cmd) {
    const int raw = std::system((cmd + " >/dev/null 2>&1").c_str());
    return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

// Hand-rolled generators -----------------------------------------------------

inline samprio::BinaryMask random_mask(std::mt19937_64& rng, std::size_t w, std::size_t h, double density) {
    std::bernoulli_distribution on(density);
    samprio::BinaryMask m(w, h);
    for (auto& b : m.bits) b = on(rng) ? 1 : 0;
    return m;
}

inline samprio::Matrix random_points(std::mt19937_64& rng, std::size_t n, std::size_t d, double scale = 1.0) {
    std::normal_distribution<double> g(0.0, scale);
    samprio::Matrix m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = g(rng);
    return m;
}

/// Isotropic Gaussian blobs; labels are the blob index of each row.
inline samprio::Matrix blobs(std::mt19937_64& rng, const std::vector<std::vector<double>>& centers, std::size_t per_blob,
                             double sd, std::vector<std::size_t>* labels = nullptr) {
    std::normal_distribution<double> g(0.0, sd);
    const auto d = static_cast<Eigen::Index>(centers.front().size());
    samprio::Matrix m(static_cast<Eigen::Index>(centers.size() * per_blob), d);
    Eigen::Index r = 0;
    for (std::size_t c = 0; c < centers.size(); ++c)
        for (std::size_t i = 0; i < per_blob; ++i, ++r) {
            for (Eigen::Index j = 0; j < d; ++j) m(r, j) = centers[c][static_cast<std::size_t>(j)] + g(rng);
            if (labels) labels->push_back(c);
        }
    return m;
}

inline samprio::Corpus random_corpus(std::mt19937_64& rng, std::size_t n, std::size_t d, samprio::Split split,
                                     std::uint64_t first_id = 0) {
    std::normal_distribution<float> g(0.0f, 3.0f);
    std::uniform_real_distribution<float> u(0.0f, 1.0f);
    std::vector<samprio::EmbeddingRecord> recs;
    for (std::size_t i = 0; i < n; ++i) {
        samprio::EmbeddingRecord r;
        r.id = first_id + i;
        r.split = split;
        r.vector.resize(d);
        for (auto& x : r.vector) x = g(rng);
        if (split == samprio::Split::core) r.measured_iou = u(rng);
        recs.push_back(std::move(r));
    }
    return samprio::Corpus(std::move(recs));
}

/// In-range feature bundle with every component drawn from U[0,1].
inline samprio::FeatureBundle random_bundle(std::mt19937_64& rng, std::uint64_t id) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    return {id, u(rng), u(rng), u(rng), u(rng), u(rng)};
}

} // namespace testsupport
