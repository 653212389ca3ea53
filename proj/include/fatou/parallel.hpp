#pragma once

#include <cstddef>
#include <exception>
#include <functional>
#include <vector>

namespace fatou {

/// Worker count: FATOU_THREADS if set and positive, else hardware concurrency.
unsigned thread_count();

/// Runs body(i) for i in [0, n) over contiguous chunks. Each index is written
/// by exactly one worker, so callers that store into a pre-sized vector get a
/// result independent of scheduling. The first exception is rethrown. Calls
/// made from inside a worker run serially.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

/// Evaluates fn(i) for every index into a vector, in index order.
template <class T, class Fn>
std::vector<T> parallel_map(std::size_t n, Fn&& fn) {
    std::vector<T> out(n);
    parallel_for(n, [&](std::size_t i) { out[i] = fn(i); });
    return out;
}

/// Pairwise (cascade) summation; result depends only on the input order.
double pairwise_sum(const double* data, std::size_t n);

inline double pairwise_sum(const std::vector<double>& v) {
    return pairwise_sum(v.data(), v.size());
}

} // namespace fatou
