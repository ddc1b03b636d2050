#pragma once

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace scml {

/// Base error for everything the library throws on its own behalf.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Misuse of the public surface: bad flags, bad config values, bad arguments.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Ill-formed or unreadable input data (files, tables, columns).
class DataError : public Error {
public:
    using Error::Error;
};

/// Deterministic random stream. All randomness in the library goes through
/// this type so results are reproducible for a given seed regardless of the
/// standard library's distribution implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next() { return eng_(); }

    /// Uniform in [0, 1), 53-bit resolution.
    double uniform01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Uniform integer in [lo, hi], inclusive, rejection-sampled (no modulo bias).
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        if (hi < lo) throw ConfigError("uniform_int: empty range");
        const std::uint64_t n = static_cast<std::uint64_t>(hi - lo) + 1;
        if (n == 0) return static_cast<std::int64_t>(eng_());  // full 64-bit range
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x;
        do {
            x = eng_();
        } while (x >= limit);
        return lo + static_cast<std::int64_t>(x % n);
    }

    /// Standard normal via Box-Muller (cosine branch only; one value per call).
    double normal() {
        double u1;
        do {
            u1 = uniform01();
        } while (u1 <= 0.0);
        const double u2 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        if (v.empty()) return;
        for (std::size_t i = v.size() - 1; i > 0; --i) {
            const auto j = static_cast<std::size_t>(uniform_int(0, static_cast<std::int64_t>(i)));
            std::swap(v[i], v[j]);
        }
    }

    std::vector<std::size_t> permutation(std::size_t n) {
        std::vector<std::size_t> p(n);
        for (std::size_t i = 0; i < n; ++i) p[i] = i;
        shuffle(p);
        return p;
    }

private:
    std::mt19937_64 eng_;
};

/// Dense row-major matrix of doubles. Deliberately minimal; heavier linear
/// algebra goes through Eigen at the call sites that need it.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

    double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

    const double* row_ptr(std::size_t i) const { return data.data() + i * cols; }

    std::vector<double> row_copy(std::size_t i) const {
        return std::vector<double>(data.begin() + static_cast<std::ptrdiff_t>(i * cols),
                                   data.begin() + static_cast<std::ptrdiff_t>((i + 1) * cols));
    }
};

inline double squared_distance(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

/// Shortest decimal representation that round-trips exactly.
inline std::string format_double(double x) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

/// Parses the entire string as a double; returns false on any trailing junk.
inline bool parse_double(std::string_view s, double& out) {
    const char* b = s.data();
    const char* e = s.data() + s.size();
    while (b < e && (*b == ' ' || *b == '\t')) ++b;
    while (e > b && (e[-1] == ' ' || e[-1] == '\t')) --e;
    if (b == e) return false;
    auto res = std::from_chars(b, e, out);
    return res.ec == std::errc() && res.ptr == e;
}

/// FNV-1a 64-bit, used to checksum serialized artifacts.
inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

class Stopwatch {
public:
    Stopwatch() : start_(std::chrono::steady_clock::now()) {}
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

}  // namespace scml
