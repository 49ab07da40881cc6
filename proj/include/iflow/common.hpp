#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace iflow {

using Vec = std::vector<double>;

// Error taxonomy, mapped to process exit codes by the CLI:
//   ArgumentError/ConfigError -> 2, NumericError -> 3, IoError -> 4.
struct ArgumentError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct CorruptionError : IoError {
    using IoError::IoError;
};
struct UnsupportedVersionError : IoError {
    using IoError::IoError;
};

// Row-major dense matrix of doubles. Kept deliberately plain: every consumer
// iterates rows, and the dimensions here are desk-scale.
struct Matrix {
    size_t rows = 0;
    size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(size_t r, size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

    double* row(size_t i) { return data.data() + i * cols; }
    const double* row(size_t i) const { return data.data() + i * cols; }
    double& at(size_t i, size_t j) { return data[i * cols + j]; }
    double at(size_t i, size_t j) const { return data[i * cols + j]; }

    Vec row_vec(size_t i) const {
        return Vec(row(i), row(i) + cols);
    }
    void set_row(size_t i, const Vec& v) {
        for (size_t j = 0; j < cols; ++j) data[i * cols + j] = v[j];
    }
};

inline double squared_norm(const Vec& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return s;
}

inline double norm(const Vec& v) { return std::sqrt(squared_norm(v)); }

inline double squared_distance(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

inline bool all_finite(const Vec& v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

inline void require_finite(const Vec& v, const char* what) {
    if (!all_finite(v)) throw ArgumentError(std::string(what) + " contains a non-finite value");
}

// Thread cap: IFLOW_THREADS wins if set, otherwise hardware concurrency.
inline unsigned thread_count() {
    if (const char* env = std::getenv("IFLOW_THREADS")) {
        long n = std::strtol(env, nullptr, 10);
        if (n >= 1) return static_cast<unsigned>(n);
        return 1;
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

// Runs fn(begin, end) over fixed-size blocks of [0, n). Block boundaries depend
// only on n, never on the thread count, so any per-block results a caller
// collects can be reduced in block order for bit-deterministic totals.
inline void parallel_blocks(size_t n, size_t block,
                            const std::function<void(size_t, size_t)>& fn) {
    if (n == 0) return;
    size_t nblocks = (n + block - 1) / block;
    unsigned nthreads = thread_count();
    if (nthreads <= 1 || nblocks <= 1) {
        for (size_t b = 0; b < nblocks; ++b)
            fn(b * block, std::min(n, (b + 1) * block));
        return;
    }
    std::vector<std::thread> pool;
    std::atomic<size_t> next{0};
    auto worker = [&] {
        for (;;) {
            size_t b = next.fetch_add(1);
            if (b >= nblocks) return;
            fn(b * block, std::min(n, (b + 1) * block));
        }
    };
    unsigned spawn = std::min<size_t>(nthreads, nblocks);
    pool.reserve(spawn);
    for (unsigned i = 0; i < spawn; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
}

}  // namespace iflow
