#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace weakval {

/// Worker cap: WEAKVAL_THREADS when set to a positive integer, otherwise the
/// hardware concurrency (at least 1).
unsigned worker_count();

/// Runs task(i) for every i in [0, n_tasks) on up to `workers` threads.
/// Tasks are claimed dynamically; callers must write results by index.
void run_parallel(std::size_t n_tasks, const std::function<void(std::size_t)>& task,
                  unsigned workers);

struct IndexRange {
    std::size_t begin;
    std::size_t end;
};

/// The b-th of n_batches contiguous, near-equal slices of [0, n).
inline IndexRange batch_range(std::size_t n, std::size_t n_batches, std::size_t b)
{
    return {n * b / n_batches, n * (b + 1) / n_batches};
}

/// Evaluates fn(b) for every batch and returns the results in batch order, so
/// any reduction over the returned vector is independent of the worker count.
template <typename T, typename Fn>
std::vector<T> map_batches(std::size_t n_batches, Fn&& fn, unsigned workers = worker_count())
{
    std::vector<T> out(n_batches);
    run_parallel(n_batches, [&](std::size_t b) { out[b] = fn(b); }, workers);
    return out;
}

}  // namespace weakval
