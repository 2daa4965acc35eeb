#pragma once

#include <cstddef>
#include <functional>

namespace lcg {

/// Runs body(begin, end) over contiguous chunks of [0, n) on up to `threads`
/// workers. Chunking is static, so any per-index computation gives the same
/// result for every thread count. The first exception thrown is rethrown.
void parallel_for(std::size_t n, unsigned threads,
                  const std::function<void(std::size_t begin, std::size_t end)>& body);

}  // namespace lcg
