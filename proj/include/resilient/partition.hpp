#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "resilient/errors.hpp"

namespace resilient {

// Beyond this index the intervals t_f / 2^n are too short to integrate over.
inline constexpr int kMaxTerminalIndex = 50;

namespace detail {

inline void require_positive_horizon(double t_f) {
    if (!(t_f > 0.0) || !std::isfinite(t_f)) {
        throw DomainError("final time t_f must be finite and > 0, got " + std::to_string(t_f));
    }
}

}  // namespace detail

/// t_n = t_f - t_f / 2^n, so t_0 = 0, t_1 = t_f / 2, t_2 = 3 t_f / 4, ...
inline double partition_time(double t_f, int n) {
    detail::require_positive_horizon(t_f);
    if (n < 0) throw DomainError("partition_time: n must be >= 0");
    return t_f - std::ldexp(t_f, -n);
}

/// Delta t_n = t_n - t_{n-1} = t_f / 2^n.
inline double interval_length(double t_f, int n) {
    detail::require_positive_horizon(t_f);
    if (n < 1) throw DomainError("interval_length: n must be >= 1");
    return std::ldexp(t_f, -n);
}

/// Geometric partition of [0, t_f] truncated at the terminal index n_bar:
/// boundaries t_0, ..., t_{n_bar - 1}, t_f. The last interval merges
/// [t_{n_bar-1}, t_{n_bar}] and [t_{n_bar}, t_f].
class HorizonPartition {
public:
    HorizonPartition(double t_f, int n_bar) : t_f_(t_f), n_bar_(n_bar) {
        detail::require_positive_horizon(t_f);
        if (n_bar < 1) throw DomainError("build_partition: n_bar must be >= 1");
        if (n_bar > kMaxTerminalIndex) {
            throw CapError("build_partition: n_bar = " + std::to_string(n_bar) + " exceeds the cap of " +
                           std::to_string(kMaxTerminalIndex));
        }
        boundaries_.reserve(static_cast<std::size_t>(n_bar) + 1);
        for (int n = 0; n < n_bar; ++n) boundaries_.push_back(partition_time(t_f, n));
        boundaries_.push_back(t_f);
    }

    double final_time() const noexcept { return t_f_; }
    int n_bar() const noexcept { return n_bar_; }
    int interval_count() const noexcept { return n_bar_; }
    const std::vector<double>& boundaries() const noexcept { return boundaries_; }

    // Interval n (1-based) is [start(n), end(n)].
    double start(int n) const { return boundaries_.at(static_cast<std::size_t>(n - 1)); }
    double end(int n) const { return boundaries_.at(static_cast<std::size_t>(n)); }
    double span(int n) const { return end(n) - start(n); }
    bool is_final(int n) const noexcept { return n == n_bar_; }

private:
    double t_f_;
    int n_bar_;
    std::vector<double> boundaries_;
};

inline HorizonPartition build_partition(double t_f, int n_bar) { return HorizonPartition(t_f, n_bar); }

}  // namespace resilient
