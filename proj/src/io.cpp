#include "stochinv/io.hpp"

#include "stochinv/errors.hpp"
#include "stochinv/rng.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <vector>

namespace stochinv {

namespace {

[[noreturn]] void parse_fail(const std::string& path, long line, const std::string& what) {
    throw IoError(path + ":" + std::to_string(line) + ": " + what);
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

} // namespace

ProblemMatrix load_matrix_market(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);

    std::string line;
    long lineno = 0;
    if (!std::getline(in, line)) throw IoError(path + ": empty file");
    ++lineno;

    std::istringstream header(line);
    std::string banner, object, format, field, symmetry;
    header >> banner >> object >> format >> field >> symmetry;
    if (banner != "%%MatrixMarket") parse_fail(path, lineno, "missing %%MatrixMarket banner");
    object = lower(object);
    format = lower(format);
    field = lower(field);
    symmetry = lower(symmetry);
    if (object != "matrix") parse_fail(path, lineno, "unsupported object '" + object + "'");
    if (format != "coordinate" && format != "array")
        parse_fail(path, lineno, "unsupported format '" + format + "'");
    if (field != "real" && field != "integer")
        parse_fail(path, lineno, "unsupported field '" + field + "' (real values required)");
    if (symmetry != "general" && symmetry != "symmetric")
        parse_fail(path, lineno, "unsupported symmetry '" + symmetry + "'");
    const bool symmetric = symmetry == "symmetric";

    // size line (comments may precede it)
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line[0] != '%') break;
    }
    if (in.fail() && line.empty()) throw IoError(path + ": missing size line");

    std::istringstream size_line(line);
    long rows = 0, cols = 0, nnz = 0;
    if (format == "coordinate") {
        if (!(size_line >> rows >> cols >> nnz))
            parse_fail(path, lineno, "malformed coordinate size line");
    } else {
        if (!(size_line >> rows >> cols)) parse_fail(path, lineno, "malformed array size line");
    }
    if (rows != cols) parse_fail(path, lineno, "matrix must be square");
    if (rows < 1) parse_fail(path, lineno, "empty matrix");
    const Index n = static_cast<Index>(rows);
    Matrix m = Matrix::Zero(n, n);

    if (format == "coordinate") {
        long seen = 0;
        while (seen < nnz && std::getline(in, line)) {
            ++lineno;
            if (line.empty() || line[0] == '%') continue;
            std::istringstream entry(line);
            long i = 0, j = 0;
            double v = 0.0;
            if (!(entry >> i >> j >> v)) parse_fail(path, lineno, "malformed coordinate entry");
            if (i < 1 || i > rows || j < 1 || j > cols)
                parse_fail(path, lineno, "index out of range");
            m(i - 1, j - 1) = v;
            if (symmetric) m(j - 1, i - 1) = v;
            ++seen;
        }
        if (seen < nnz)
            throw IoError(path + ": truncated file, expected " + std::to_string(nnz) +
                          " entries, got " + std::to_string(seen));
    } else {
        // array format: column-major; the symmetric variant stores the
        // lower triangle of each column
        const long expected = symmetric ? rows * (rows + 1) / 2 : rows * cols;
        long seen = 0;
        Index i = 0, j = 0;
        while (seen < expected && std::getline(in, line)) {
            ++lineno;
            if (line.empty() || line[0] == '%') continue;
            std::istringstream values(line);
            double v = 0.0;
            while (values >> v) {
                if (seen >= expected) parse_fail(path, lineno, "surplus array entry");
                m(i, j) = v;
                if (symmetric) m(j, i) = v;
                ++seen;
                if (++i >= n) {
                    ++j;
                    i = symmetric ? j : 0;
                }
            }
            if (!values.eof()) parse_fail(path, lineno, "malformed array entry");
        }
        if (seen < expected)
            throw IoError(path + ": truncated file, expected " + std::to_string(expected) +
                          " entries, got " + std::to_string(seen));
    }

    return ProblemMatrix(std::move(m), symmetric ? Symmetry::symmetric : Symmetry::general);
}

ProblemMatrix build_ridge_hessian(const std::string& path, double lambda) {
    if (lambda < 0.0) throw ConfigError("build_ridge_hessian: lambda must be >= 0");
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);

    std::vector<std::vector<std::pair<Index, double>>> samples;
    Index n = 0;
    std::string line;
    long lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream row(line);
        std::string label;
        if (!(row >> label)) continue;
        std::vector<std::pair<Index, double>> features;
        std::string token;
        while (row >> token) {
            const std::size_t colon = token.find(':');
            if (colon == std::string::npos)
                parse_fail(path, lineno, "malformed feature token '" + token + "'");
            Index idx = 0;
            double value = 0.0;
            try {
                idx = static_cast<Index>(std::stol(token.substr(0, colon)));
                value = std::stod(token.substr(colon + 1));
            } catch (const std::exception&) {
                parse_fail(path, lineno, "malformed feature token '" + token + "'");
            }
            if (idx < 1) parse_fail(path, lineno, "feature indices are 1-based");
            n = std::max(n, idx);
            features.emplace_back(idx - 1, value);
        }
        samples.push_back(std::move(features));
    }
    if (n == 0) throw IoError(path + ": no features found (n = 0)");

    Matrix g = lambda * Matrix::Identity(n, n);
    for (const auto& features : samples)
        for (const auto& [i, vi] : features)
            for (const auto& [j, vj] : features) g(i, j) += vi * vj;

    return ProblemMatrix(std::move(g), lambda > 0.0 ? Symmetry::spd : Symmetry::symmetric);
}

ProblemMatrix gen_synthetic(Index n, std::uint64_t seed) {
    if (n < 2) throw ConfigError("gen_synthetic: n must be >= 2");
    RngStream rng(seed);
    return synthetic_from_factor(rng.uniform_matrix(n, n));
}

ProblemMatrix synthetic_from_factor(const Matrix& abar) {
    return ProblemMatrix(abar.transpose() * abar, Symmetry::spd);
}

} // namespace stochinv
