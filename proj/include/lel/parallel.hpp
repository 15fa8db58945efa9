#pragma once

#include <cstddef>
#include <functional>

namespace lel {

// Worker count: hardware concurrency, capped by the LEL_THREADS environment
// variable when it holds a positive integer.
std::size_t thread_budget();

// Runs body(i) for i in [0, count). Iterations must be independent; results
// are deterministic as long as body writes only to slot i.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace lel
