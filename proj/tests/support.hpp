#pragma once

// Independent oracles and fixtures for the test suites. The oracles follow
// the definitions directly (plain loops, no kernels) so they can disagree
// with the library.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "visrisk/datacube.hpp"
#include "visrisk/matrix.hpp"
#include "visrisk/network.hpp"
#include "visrisk/viewstate.hpp"

namespace testsupport {

using visrisk::Matrix;
using visrisk::MaskedRows;

inline std::istringstream text(const std::string& s) { return std::istringstream(s); }

// Exhaustive linear-scan BMU: smallest masked distance, first index on ties.
inline std::size_t bmu_exhaustive(const Matrix& refs, std::span<const double> x, std::span<const unsigned char> m) {
    std::size_t best = 0, obs = 0;
    for (auto v : m) obs += v ? 1 : 0;
    double best_d = INFINITY;
    for (std::size_t i = 0; i < refs.rows(); ++i) {
        double s = 0.0;
        for (std::size_t k = 0; k < x.size(); ++k)
            if (m[k]) s += (x[k] - refs(i, k)) * (x[k] - refs(i, k));
        const double d = std::sqrt(s * static_cast<double>(x.size()) / static_cast<double>(obs));
        if (d < best_d) {
            best_d = d;
            best = i;
        }
    }
    return best;
}

// One Lloyd step with per-component masked means; empty clusters and
// unsupported components keep their centroid value.
inline Matrix lloyd_step(const Matrix& centroids, const MaskedRows& data) {
    Matrix sum(centroids.rows(), centroids.cols(), 0.0), cnt(centroids.rows(), centroids.cols(), 0.0);
    for (std::size_t j = 0; j < data.size(); ++j) {
        const auto c = bmu_exhaustive(centroids, data.values(j), data.mask(j));
        for (std::size_t k = 0; k < data.dim(); ++k)
            if (data.mask(j)[k]) {
                sum(c, k) += data.values(j)[k];
                cnt(c, k) += 1.0;
            }
    }
    Matrix out = centroids;
    for (std::size_t i = 0; i < out.rows(); ++i)
        for (std::size_t k = 0; k < out.cols(); ++k)
            if (cnt(i, k) > 0) out(i, k) = sum(i, k) / cnt(i, k);
    return out;
}

// Mean-rank percentile by counting: rank = #less + (#equal + 1) / 2.
inline std::vector<double> percentile_oracle(const std::vector<double>& xs) {
    const std::size_t n = xs.size();
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (n == 1) {
            out[i] = 50.0;
            continue;
        }
        double less = 0, equal = 0;
        for (double y : xs) {
            if (y < xs[i]) ++less;
            if (y == xs[i]) ++equal;
        }
        const double rank = less + (equal + 1.0) / 2.0;
        out[i] = 100.0 * (rank - 1.0) / static_cast<double>(n - 1);
    }
    return out;
}

// One batch SOM update on a 1-D chain, written out longhand. Same summation
// order as the definition: per-winner sums in row order, then a weighted sum
// over winners in unit order.
inline Matrix chain_batch_oracle(const Matrix& refs, const MaskedRows& data, double sigma) {
    const std::size_t M = refs.rows(), n = refs.cols();
    Matrix S(M, n, 0.0), C(M, n, 0.0);
    for (std::size_t j = 0; j < data.size(); ++j) {
        const auto x = data.values(j);
        const auto m = data.mask(j);
        std::size_t b = 0;
        double best = INFINITY;
        for (std::size_t i = 0; i < M; ++i) {
            double s = 0.0;
            for (std::size_t k = 0; k < n; ++k)
                if (m[k]) {
                    const double d = x[k] - refs(i, k);
                    s = s + d * d;
                }
            if (s < best) {
                best = s;
                b = i;
            }
        }
        for (std::size_t k = 0; k < n; ++k)
            if (m[k]) {
                S(b, k) += x[k];
                C(b, k) += 1.0;
            }
    }
    Matrix out = refs;
    for (std::size_t i = 0; i < M; ++i)
        for (std::size_t k = 0; k < n; ++k) {
            double num = 0.0, den = 0.0;
            for (std::size_t b = 0; b < M; ++b) {
                const double d = static_cast<double>(i) - static_cast<double>(b);
                const double h = std::exp(-(d * d) / (2.0 * sigma * sigma));
                num = num + h * S(b, k);
                den = den + h * C(b, k);
            }
            if (den > 0.0) out(i, k) = num / den;
        }
    return out;
}

inline visrisk::TimePoint quarter(int year, int q) {
    return visrisk::TimePoint::parse_or_throw(std::to_string(year) + "Q" + std::to_string(q));
}

inline std::vector<visrisk::TimePoint> quarters(std::size_t count, int start_year = 2000) {
    std::vector<visrisk::TimePoint> out;
    for (std::size_t i = 0; i < count; ++i)
        out.push_back(quarter(start_year + static_cast<int>(i / 4), static_cast<int>(i % 4) + 1));
    return out;
}

inline std::vector<std::string> names(const char* prefix, std::size_t count) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < count; ++i) out.push_back(prefix + std::to_string(i));
    return out;
}

// Random cube; `missing` is the chance a cell is unobserved.
inline visrisk::DataCube random_cube(std::mt19937_64& rng, std::size_t E, std::size_t T, std::size_t K,
                                     double missing = 0.0) {
    visrisk::DataCube cube(names("e", E), quarters(T), names("k", K));
    std::normal_distribution<double> nd(0.0, 1.0);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (std::size_t e = 0; e < E; ++e)
        for (std::size_t t = 0; t < T; ++t)
            for (std::size_t k = 0; k < K; ++k)
                if (u(rng) >= missing) cube.set(e, t, k, nd(rng));
    return cube;
}

inline std::string random_token(std::mt19937_64& rng, std::size_t max_len) {
    // Whole glyphs, so multi-byte characters are never split.
    static const std::vector<std::string> glyphs = [] {
        std::vector<std::string> g;
        for (char c : std::string("abcdefghijklmnopqrstuvwxyzABCDEFGHIJ0123456789 _-.\"\\/")) g.emplace_back(1, c);
        for (const char* u : {"é", "ä", "ö", "€", "日"}) g.emplace_back(u);
        return g;
    }();
    std::uniform_int_distribution<std::size_t> len(1, max_len), pick(0, glyphs.size() - 1);
    std::string s;
    const auto n = len(rng);
    for (std::size_t i = 0; i < n; ++i) s += glyphs[pick(rng)];
    return s;
}

inline visrisk::ViewState random_state(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> view(0, 4), count(0, 6), coin(0, 1);
    std::uniform_real_distribution<double> pos(-1e6, 1e6);
    visrisk::ViewState s;
    s.view = static_cast<visrisk::View>(view(rng));
    for (int i = count(rng); i > 0; --i) s.entities.push_back(random_token(rng, 8));
    if (coin(rng)) s.time_from = random_token(rng, 7);
    if (coin(rng)) s.time_to = random_token(rng, 7);
    if (coin(rng)) s.indicator = random_token(rng, 12);
    s.percentile = coin(rng) != 0;
    for (int i = count(rng); i > 0; --i) s.events.push_back(random_token(rng, 10));
    for (int i = count(rng); i > 0; --i) s.pinned[random_token(rng, 6)] = {pos(rng), pos(rng)};
    if (coin(rng)) s.seed = rng();
    return s;
}

// An SVG document, optionally preceded by an XML declaration.
inline bool is_svg(std::string_view doc) {
    if (doc.starts_with("<?xml")) {
        const auto end = doc.find("?>");
        if (end == std::string_view::npos) return false;
        doc.remove_prefix(end + 2);
        while (!doc.empty() && (doc.front() == '\n' || doc.front() == '\r' || doc.front() == ' ')) doc.remove_prefix(1);
    }
    while (!doc.empty() && (doc.back() == '\n' || doc.back() == ' ')) doc.remove_suffix(1);
    return doc.starts_with("<svg") && doc.ends_with("</svg>");
}

// Unique scratch directory under the system temp dir, removed on destruction.
struct TempDir {
    std::filesystem::path path;
    explicit TempDir(const std::string& tag) {
        std::random_device rd;
        path = std::filesystem::temp_directory_path() / ("visrisk_" + tag + "_" + std::to_string(rd()));
        std::filesystem::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
};

}  // namespace testsupport
