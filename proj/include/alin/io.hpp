#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "alin/errors.hpp"
#include "alin/sparse.hpp"

namespace alin::io {

namespace detail {

inline std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

/// Parses the whole token as a finite double; false on trailing garbage.
inline bool parse_real(std::string_view tok, double& out) {
    tok = trim(tok);
    if (tok.empty()) return false;
    // from_chars rejects a leading '+'.
    if (tok.front() == '+') tok.remove_prefix(1);
    const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), out);
    return res.ec == std::errc() && res.ptr == tok.data() + tok.size() && std::isfinite(out);
}

inline std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open '" + path.string() + "' for reading");
    return in;
}

inline std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot open '" + path.string() + "' for writing");
    out << std::setprecision(17);
    return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Matrix Market (coordinate, real|integer, general). 1-based on disk.
// ---------------------------------------------------------------------------

inline SparseMatrix read_matrix_market(std::istream& in) {
    std::string line;
    std::size_t lineno = 0;
    if (!std::getline(in, line)) throw ParseError("empty Matrix Market stream", 1);
    ++lineno;
    {
        std::istringstream hs(line);
        std::string banner, object, format, field, symmetry;
        hs >> banner >> object >> format >> field >> symmetry;
        if (banner != "%%MatrixMarket") throw ParseError("missing %%MatrixMarket banner", lineno);
        object = detail::lower(object);
        format = detail::lower(format);
        field = detail::lower(field);
        symmetry = detail::lower(symmetry);
        if (object != "matrix" || format != "coordinate")
            throw ParseError("only 'matrix coordinate' Matrix Market files are supported", lineno);
        if (field != "real" && field != "integer" && field != "double")
            throw ParseError("unsupported field '" + field + "' (expected real)", lineno);
        if (symmetry != "general")
            throw ParseError("unsupported symmetry '" + symmetry + "' (expected general)", lineno);
    }

    // Skip comments and blank lines until the size line.
    std::size_t nrows = 0, ncols = 0, nnz = 0;
    for (;;) {
        if (!std::getline(in, line)) throw ParseError("missing size line", lineno + 1);
        ++lineno;
        const auto t = detail::trim(line);
        if (t.empty() || t.front() == '%') continue;
        std::istringstream ss{std::string(t)};
        long long r = -1, c = -1, z = -1;
        std::string extra;
        if (!(ss >> r >> c >> z) || (ss >> extra) || r < 0 || c < 0 || z < 0)
            throw ParseError("malformed size line", lineno);
        nrows = static_cast<std::size_t>(r);
        ncols = static_cast<std::size_t>(c);
        nnz = static_cast<std::size_t>(z);
        break;
    }

    std::vector<Triplet> triplets;
    triplets.reserve(nnz);
    while (triplets.size() < nnz) {
        if (!std::getline(in, line))
            throw ParseError("expected " + std::to_string(nnz) + " entries, found " +
                                 std::to_string(triplets.size()),
                             lineno + 1);
        ++lineno;
        const auto t = detail::trim(line);
        if (t.empty() || t.front() == '%') continue;
        std::istringstream ss{std::string(t)};
        long long i = 0, j = 0;
        std::string vtok, extra;
        if (!(ss >> i >> j >> vtok) || (ss >> extra)) throw ParseError("malformed entry", lineno);
        double v = 0.0;
        if (!detail::parse_real(vtok, v)) throw ParseError("invalid value '" + vtok + "'", lineno);
        if (i < 1 || j < 1 || static_cast<std::size_t>(i) > nrows || static_cast<std::size_t>(j) > ncols)
            throw ParseError("index (" + std::to_string(i) + "," + std::to_string(j) + ") out of bounds", lineno);
        triplets.push_back({static_cast<std::size_t>(i - 1), static_cast<std::size_t>(j - 1), v});
    }
    for (; std::getline(in, line);) {
        ++lineno;
        const auto t = detail::trim(line);
        if (!t.empty() && t.front() != '%') throw ParseError("unexpected data after last entry", lineno);
    }
    return SparseMatrix::from_triplets(nrows, ncols, std::move(triplets));
}

inline SparseMatrix read_matrix_market(const std::filesystem::path& path) {
    auto in = detail::open_in(path);
    try {
        return read_matrix_market(in);
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

inline void write_matrix_market(const SparseMatrix& a, std::ostream& out) {
    out << "%%MatrixMarket matrix coordinate real general\n";
    out << a.rows() << ' ' << a.cols() << ' ' << a.nonzeros() << '\n';
    const auto old = out.precision(17);
    for (const auto& t : a.triplets()) out << t.row + 1 << ' ' << t.col + 1 << ' ' << t.value << '\n';
    out.precision(old);
}

inline void write_matrix_market(const SparseMatrix& a, const std::filesystem::path& path) {
    auto out = detail::open_out(path);
    write_matrix_market(a, out);
    if (!out) throw ParseError("write failed for '" + path.string() + "'");
}

// ---------------------------------------------------------------------------
// CSV vectors: one real per line, no header.
// ---------------------------------------------------------------------------

inline Vector read_vector_csv(std::istream& in) {
    Vector v;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto t = detail::trim(line);
        if (t.empty()) continue;
        double x = 0.0;
        if (!detail::parse_real(t, x))
            throw ParseError(lineno == 1 ? "first line is not a number (headers are not accepted)"
                                         : "invalid or non-finite value '" + std::string(t) + "'",
                             lineno);
        v.push_back(x);
    }
    return v;
}

inline Vector read_vector_csv(const std::filesystem::path& path) {
    auto in = detail::open_in(path);
    try {
        return read_vector_csv(in);
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

inline void write_vector_csv(ConstSpan v, std::ostream& out) {
    const auto old = out.precision(17);
    for (double x : v) out << x << '\n';
    out.precision(old);
}

inline void write_vector_csv(ConstSpan v, const std::filesystem::path& path) {
    auto out = detail::open_out(path);
    write_vector_csv(v, out);
    if (!out) throw ParseError("write failed for '" + path.string() + "'");
}

}  // namespace alin::io
