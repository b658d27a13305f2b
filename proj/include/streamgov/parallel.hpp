/**
 * @file parallel.hpp
 * @brief Minimal fork-join helper used by the pure parallel regions of each module.
 *
 * Every parallel region writes only to the slot owned by its index, so results do not
 * depend on the thread count or on scheduling.
 */
#pragma once

#include <cstddef>
#include <functional>

namespace streamgov {

/// Threads used by parallel_for. 0 means hardware concurrency.
void set_thread_count(std::size_t threads) noexcept;
[[nodiscard]] std::size_t thread_count() noexcept;

/// Calls body(i) for i in [0, count). Exceptions thrown by body are rethrown on the caller
/// (the one from the lowest index wins, so error reporting is deterministic too).
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace streamgov
