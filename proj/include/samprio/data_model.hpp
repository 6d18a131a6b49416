#pragma once

// Embedding records, corpora and binary masks, plus their file formats.
//
// Binary embedding file ("EMB1", little-endian):
//   char[4] magic, u32 N, u32 D, u8 split (0 = core, 1 = finetune),
//   then N x { u64 id, f32 measured_iou (NaN = absent), D x f32 }.
// CSV embedding file:
//   id,split,iou,v0,...,v{D-1}   (empty iou field = absent)

#include <cctype>
#include <cmath>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "samprio/detail/binio.hpp"
#include "samprio/error.hpp"

namespace samprio {

enum class Split : std::uint8_t { core = 0, finetune = 1 };

inline std::string_view to_string(Split s) { return s == Split::core ? "core" : "finetune"; }

inline Split parse_split(std::string_view s) {
    if (s == "core") return Split::core;
    if (s == "finetune") return Split::finetune;
    throw DataError("unknown split \"" + std::string(s) + "\"");
}

struct EmbeddingRecord {
    std::uint64_t id = 0;
    Split split = Split::core;
    std::vector<float> vector;
    std::optional<float> measured_iou;
    std::string meta;

    friend bool operator==(const EmbeddingRecord&, const EmbeddingRecord&) = default;
};

/// An ordered, validated collection of records sharing one dimension.
class Corpus {
public:
    Corpus() = default;

    /// Validates and takes ownership of `records`. Throws DataError naming
    /// the first offending record.
    explicit Corpus(std::vector<EmbeddingRecord> records) : records_(std::move(records)) {
        if (records_.empty()) return;
        dimension_ = records_.front().vector.size();
        if (dimension_ == 0) throw DataError("dimension must be at least 1", 0);
        std::unordered_set<std::uint64_t> seen;
        seen.reserve(records_.size());
        for (std::size_t i = 0; i < records_.size(); ++i) {
            const auto& r = records_[i];
            if (r.vector.size() != dimension_)
                throw DataError("dimension mismatch: expected " + std::to_string(dimension_) + ", got " +
                                    std::to_string(r.vector.size()),
                                i);
            for (float x : r.vector)
                if (!std::isfinite(x)) throw DataError("non-finite vector component", i);
            if (r.measured_iou) {
                float v = *r.measured_iou;
                if (!(v >= 0.0f && v <= 1.0f)) throw DataError("measured_iou outside [0,1]", i);
            } else if (r.split == Split::core) {
                throw DataError("core record missing measured_iou", i);
            }
            if (!seen.insert(r.id).second) throw DataError("duplicate id " + std::to_string(r.id), i);
        }
    }

    const std::vector<EmbeddingRecord>& records() const noexcept { return records_; }
    std::size_t size() const noexcept { return records_.size(); }
    bool empty() const noexcept { return records_.empty(); }
    std::size_t dimension() const noexcept { return dimension_; }
    const EmbeddingRecord& operator[](std::size_t i) const { return records_[i]; }

    friend bool operator==(const Corpus&, const Corpus&) = default;

private:
    std::vector<EmbeddingRecord> records_;
    std::size_t dimension_ = 0;
};

enum class EmbeddingFormat { binary, csv };

/// ".csv" selects CSV, anything else the binary container.
inline EmbeddingFormat format_from_path(const std::string& path) {
    auto dot = path.rfind('.');
    if (dot != std::string::npos && path.substr(dot) == ".csv") return EmbeddingFormat::csv;
    return EmbeddingFormat::binary;
}

namespace detail {

template <typename T>
T parse_number(std::string_view field, std::size_t record, std::string_view what) {
    T value{};
    auto* first = field.data();
    auto* last = field.data() + field.size();
    // from_chars rejects a leading '+', which some writers emit.
    if (first != last && *first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last)
        throw DataError("cannot parse " + std::string(what) + " \"" + std::string(field) + "\"", record);
    return value;
}

inline std::vector<std::string_view> split_csv_line(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        auto comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return fields;
}

inline std::string format_float(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

inline Corpus read_binary_embeddings(std::istream& in) {
    expect_magic(in, "EMB1");
    auto n = read_le<std::uint32_t>(in, "record count");
    auto d = read_le<std::uint32_t>(in, "dimension");
    auto flag = read_le<std::uint8_t>(in, "split flag");
    if (flag > 1) throw DataError("malformed header: split flag " + std::to_string(flag));
    if (d == 0) throw DataError("malformed header: dimension 0");
    if (n == 0) throw DataError("malformed header: no records");
    auto split = static_cast<Split>(flag);
    std::vector<EmbeddingRecord> records;
    records.reserve(n);
    for (std::uint32_t i = 0; i < n; ++i) {
        EmbeddingRecord r;
        r.split = split;
        try {
            r.id = read_le<std::uint64_t>(in, "id");
            auto iou = read_le<float>(in, "measured_iou");
            if (!std::isnan(iou)) r.measured_iou = iou;
            r.vector.resize(d);
            for (auto& x : r.vector) x = read_le<float>(in, "vector");
        } catch (const DataError& e) {
            throw DataError(e.what(), i);
        }
        records.push_back(std::move(r));
    }
    if (in.peek() != std::char_traits<char>::eof()) throw DataError("trailing bytes after last record");
    return Corpus(std::move(records));
}

inline Corpus read_csv_embeddings(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw DataError("malformed header: empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto header = split_csv_line(line);
    if (header.size() < 4 || header[0] != "id" || header[1] != "split" || header[2] != "iou")
        throw DataError("malformed header: expected id,split,iou,v0,...");
    const std::size_t d = header.size() - 3;
    for (std::size_t j = 0; j < d; ++j)
        if (header[3 + j] != "v" + std::to_string(j))
            throw DataError("malformed header: column " + std::to_string(3 + j) + " should be v" + std::to_string(j));

    std::vector<EmbeddingRecord> records;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::size_t index = records.size();
        auto fields = split_csv_line(line);
        if (fields.size() != header.size())
            throw DataError("dimension mismatch: expected " + std::to_string(header.size()) + " fields, got " +
                                std::to_string(fields.size()),
                            index);
        EmbeddingRecord r;
        r.id = parse_number<std::uint64_t>(fields[0], index, "id");
        try {
            r.split = parse_split(fields[1]);
        } catch (const DataError& e) {
            throw DataError(e.what(), index);
        }
        if (!fields[2].empty()) r.measured_iou = parse_number<float>(fields[2], index, "iou");
        r.vector.resize(d);
        for (std::size_t j = 0; j < d; ++j) r.vector[j] = parse_number<float>(fields[3 + j], index, "vector component");
        records.push_back(std::move(r));
    }
    if (records.empty()) throw DataError("no records");
    return Corpus(std::move(records));
}

} // namespace detail

inline Corpus load_embeddings(const std::string& path, EmbeddingFormat format) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    try {
        return format == EmbeddingFormat::binary ? detail::read_binary_embeddings(in)
                                                 : detail::read_csv_embeddings(in);
    } catch (const DataError& e) {
        throw DataError::prefixed(path, e);
    }
}

inline Corpus load_embeddings(const std::string& path) { return load_embeddings(path, format_from_path(path)); }

inline void save_embeddings(const Corpus& corpus, const std::string& path, EmbeddingFormat format) {
    if (corpus.empty()) throw DataError("nothing to save: corpus is empty");
    const auto& recs = corpus.records();
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path + " for writing");

    if (format == EmbeddingFormat::binary) {
        const Split split = recs.front().split;
        for (std::size_t i = 0; i < recs.size(); ++i)
            if (recs[i].split != split) throw DataError("binary format holds a single split per file", i);
        detail::write_magic(out, "EMB1");
        detail::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(recs.size()));
        detail::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(corpus.dimension()));
        detail::write_le<std::uint8_t>(out, static_cast<std::uint8_t>(split));
        for (const auto& r : recs) {
            detail::write_le<std::uint64_t>(out, r.id);
            detail::write_le<float>(out, r.measured_iou.value_or(std::numeric_limits<float>::quiet_NaN()));
            for (float x : r.vector) detail::write_le<float>(out, x);
        }
    } else {
        out << "id,split,iou";
        for (std::size_t j = 0; j < corpus.dimension(); ++j) out << ",v" << j;
        out << '\n';
        for (const auto& r : recs) {
            out << r.id << ',' << to_string(r.split) << ',';
            if (r.measured_iou) out << detail::format_float(*r.measured_iou);
            for (float x : r.vector) out << ',' << detail::format_float(x);
            out << '\n';
        }
    }
    if (!out) throw IoError("write failed for " + path);
}

inline void save_embeddings(const Corpus& corpus, const std::string& path) {
    save_embeddings(corpus, path, format_from_path(path));
}

/// Row-major boolean grid; true marks a building pixel.
struct BinaryMask {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<std::uint8_t> bits;

    BinaryMask() = default;
    BinaryMask(std::size_t w, std::size_t h, std::vector<std::uint8_t> b) : width(w), height(h), bits(std::move(b)) {
        if (w == 0 || h == 0) throw DataError("mask dimensions must be positive");
        if (bits.size() != w * h) throw DataError("mask bit count does not match width x height");
    }
    BinaryMask(std::size_t w, std::size_t h) : BinaryMask(w, h, std::vector<std::uint8_t>(w * h, 0)) {}

    bool at(std::size_t x, std::size_t y) const { return bits[y * width + x] != 0; }
    void set(std::size_t x, std::size_t y, bool v) { bits[y * width + x] = v ? 1 : 0; }

    friend bool operator==(const BinaryMask&, const BinaryMask&) = default;
};

namespace detail {

// Next whitespace-delimited header token, skipping '#' comments.
inline std::string pnm_token(std::istream& in) {
    std::string tok;
    int c;
    while ((c = in.get()) != EOF) {
        if (c == '#') {
            while ((c = in.get()) != EOF && c != '\n') {}
            if (!tok.empty()) break;
            continue;
        }
        if (std::isspace(c)) {
            if (!tok.empty()) break;
            continue;
        }
        tok.push_back(static_cast<char>(c));
    }
    if (tok.empty()) throw DataError("malformed header: unexpected end of file");
    return tok;
}

inline std::size_t pnm_number(std::istream& in, std::string_view what) {
    auto tok = pnm_token(in);
    std::size_t value = 0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
    if (ec != std::errc{} || ptr != tok.data() + tok.size())
        throw DataError("malformed header: bad " + std::string(what) + " \"" + tok + "\"");
    return value;
}

} // namespace detail

/// Parses plain or raw PGM (P2/P5) and PBM (P1/P4). Gray values above 127
/// and PBM bits equal to 1 become true.
inline BinaryMask parse_mask(std::istream& in) {
    char magic[2] = {0, 0};
    in.read(magic, 2);
    if (in.gcount() != 2 || magic[0] != 'P' || (magic[1] != '1' && magic[1] != '2' && magic[1] != '4' && magic[1] != '5'))
        throw DataError("malformed header: not a P1/P2/P4/P5 file");
    const char kind = magic[1];
    const std::size_t width = detail::pnm_number(in, "width");
    const std::size_t height = detail::pnm_number(in, "height");
    if (width == 0 || height == 0) throw DataError("malformed header: zero dimension");
    std::size_t maxval = 1;
    if (kind == '2' || kind == '5') {
        maxval = detail::pnm_number(in, "maxval");
        if (maxval == 0 || maxval > 65535) throw DataError("malformed header: maxval out of range");
    }

    std::vector<std::uint8_t> bits(width * height, 0);
    switch (kind) {
    case '1': {
        for (std::size_t i = 0; i < bits.size(); ++i) {
            int c;
            do {
                c = in.get();
                if (c == '#')
                    while (c != EOF && c != '\n') c = in.get();
            } while (c != EOF && std::isspace(c));
            if (c == EOF) throw DataError("truncated data: expected " + std::to_string(bits.size()) + " pixels");
            if (c != '0' && c != '1') throw DataError("malformed pixel in P1 data");
            bits[i] = c == '1';
        }
        break;
    }
    case '2': {
        for (std::size_t i = 0; i < bits.size(); ++i) {
            std::size_t v;
            try {
                v = detail::pnm_number(in, "pixel");
            } catch (const DataError&) {
                throw DataError("truncated data: expected " + std::to_string(bits.size()) + " pixels");
            }
            bits[i] = v > 127;
        }
        break;
    }
    case '4': {
        const std::size_t row_bytes = (width + 7) / 8;
        std::vector<unsigned char> row(row_bytes);
        for (std::size_t y = 0; y < height; ++y) {
            in.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(row_bytes));
            if (in.gcount() != static_cast<std::streamsize>(row_bytes)) throw DataError("truncated data in P4 raster");
            for (std::size_t x = 0; x < width; ++x) bits[y * width + x] = (row[x / 8] >> (7 - x % 8)) & 1u;
        }
        break;
    }
    case '5': {
        const std::size_t bpp = maxval > 255 ? 2 : 1;
        std::vector<unsigned char> raw(bits.size() * bpp);
        in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
        if (in.gcount() != static_cast<std::streamsize>(raw.size())) throw DataError("truncated data in P5 raster");
        for (std::size_t i = 0; i < bits.size(); ++i) {
            std::size_t v = bpp == 1 ? raw[i] : (std::size_t{raw[2 * i]} << 8) | raw[2 * i + 1];
            bits[i] = v > 127;
        }
        break;
    }
    }
    return BinaryMask(width, height, std::move(bits));
}

inline BinaryMask load_mask(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    try {
        return parse_mask(in);
    } catch (const DataError& e) {
        throw DataError::prefixed(path, e);
    }
}

} // namespace samprio
