#pragma once

#include <cstddef>
#include <functional>

namespace oy3d {

// Worker-pool bound shared by all parallel stages. 0 means hardware
// concurrency. Outputs of every parallel loop are written to disjoint
// slots, so results do not depend on the thread count.
void set_max_threads(int n);
int max_threads();

// Runs fn(begin, end) over a static partition of [0, n).
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn);

}  // namespace oy3d
