#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "alin/errors.hpp"
#include "alin/penalties.hpp"
#include "alin/sparse.hpp"

// Grayscale images as grids of reals in [0,1], row-major (pixel (i, j) at i·width + j).

namespace alin::imaging {

struct ImageGrid {
    std::size_t width = 0;
    std::size_t height = 0;
    Vector values;

    ImageGrid() = default;
    ImageGrid(std::size_t w, std::size_t h, Vector v) : width(w), height(h), values(std::move(v)) {
        alin::detail::require_dims(values.size() == w * h, "ImageGrid: value count must equal width*height");
    }

    /// Shape in penalty terms: height rows by width columns.
    penalties::GridShape shape() const { return penalties::GridShape({height, width}); }
    double at(std::size_t i, std::size_t j) const { return values[i * width + j]; }
};

namespace detail {

/// Next whitespace-delimited header token, skipping '#' comments.
inline std::string header_token(std::istream& in) {
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
    return tok;
}

inline std::size_t parse_count(const std::string& t, const char* what) {
    if (t.empty() || !std::all_of(t.begin(), t.end(), [](unsigned char ch) { return std::isdigit(ch); }))
        throw ParseError(std::string("PGM: bad ") + what + " '" + t + "'", 0);
    return static_cast<std::size_t>(std::stoull(t));
}

inline std::size_t header_number(std::istream& in, const char* what) { return parse_count(header_token(in), what); }

}  // namespace detail

/// Reads P2 (ASCII) or P5 (binary, 8- or 16-bit) PGM; samples are divided by maxval.
inline ImageGrid read_pgm(std::istream& in) {
    const std::string magic = detail::header_token(in);
    if (magic != "P2" && magic != "P5") throw ParseError("PGM: unsupported magic '" + magic + "'", 1);
    const std::size_t w = detail::header_number(in, "width");
    const std::size_t h = detail::header_number(in, "height");
    const std::size_t maxval = detail::header_number(in, "maxval");
    if (w == 0 || h == 0) throw ParseError("PGM: empty image", 0);
    if (maxval == 0 || maxval > 65535) throw ParseError("PGM: maxval out of range", 0);

    Vector v(w * h);
    if (magic == "P2") {
        for (auto& x : v) {
            const std::string t = detail::header_token(in);
            if (t.empty()) throw ParseError("PGM: truncated pixel data", 0);
            const std::size_t s = detail::parse_count(t, "sample");
            if (s > maxval) throw ParseError("PGM: sample exceeds maxval", 0);
            x = static_cast<double>(s) / static_cast<double>(maxval);
        }
    } else {
        const bool wide = maxval > 255;
        for (auto& x : v) {
            std::size_t s = 0;
            const int c0 = in.get();
            if (c0 == EOF) throw ParseError("PGM: truncated pixel data", 0);
            s = static_cast<unsigned char>(c0);
            if (wide) {
                const int c1 = in.get();
                if (c1 == EOF) throw ParseError("PGM: truncated pixel data", 0);
                s = (s << 8) | static_cast<unsigned char>(c1);
            }
            if (s > maxval) throw ParseError("PGM: sample exceeds maxval", 0);
            x = static_cast<double>(s) / static_cast<double>(maxval);
        }
    }
    return ImageGrid(w, h, std::move(v));
}

inline ImageGrid read_pgm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path.string() + "' for reading");
    try {
        return read_pgm(in);
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what(), e.line());
    }
}

/// 8-bit quantization with clamping to [0,1].
inline std::uint8_t quantize(double v) {
    const double c = std::isfinite(v) ? std::clamp(v, 0.0, 1.0) : 0.0;
    return static_cast<std::uint8_t>(std::lround(c * 255.0));
}

/// Writes an 8-bit PGM, binary (P5) by default.
inline void write_pgm(const ImageGrid& img, std::ostream& out, bool binary = true) {
    out << (binary ? "P5" : "P2") << '\n' << img.width << ' ' << img.height << "\n255\n";
    if (binary) {
        for (double v : img.values) out.put(static_cast<char>(quantize(v)));
    } else {
        for (std::size_t i = 0; i < img.height; ++i) {
            for (std::size_t j = 0; j < img.width; ++j) out << (j ? " " : "") << int(quantize(img.at(i, j)));
            out << '\n';
        }
    }
}

inline void write_pgm(const ImageGrid& img, const std::filesystem::path& path, bool binary = true) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    write_pgm(img, out, binary);
}

/// Each pixel replaced by the average of itself and its existing 4-neighbours.
inline SparseMatrix blur_operator(const penalties::GridShape& shape) {
    alin::detail::require(shape.rank() == 2, "blur_operator: 2-D shape required");
    const std::size_t m = shape[0], n = shape[1];
    std::vector<Triplet> t;
    t.reserve(5 * m * n);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            std::vector<std::size_t> cells{i * n + j};
            if (i > 0) cells.push_back((i - 1) * n + j);
            if (i + 1 < m) cells.push_back((i + 1) * n + j);
            if (j > 0) cells.push_back(i * n + j - 1);
            if (j + 1 < n) cells.push_back(i * n + j + 1);
            const double w = 1.0 / static_cast<double>(cells.size());
            for (auto c : cells) t.push_back({i * n + j, c, w});
        }
    return SparseMatrix::from_triplets(m * n, m * n, std::move(t));
}

}  // namespace alin::imaging
