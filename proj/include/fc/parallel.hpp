#pragma once

#include <algorithm>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace fc {

// Process-wide worker budget, set once by the CLI --threads flag.
void set_thread_count(int n);
int thread_count();

// Splits [begin, end) into contiguous chunks, one worker per chunk.
// Work items must write only to their own output slots so that the result
// is identical for every thread count.
void parallel_for(int64_t begin, int64_t end, const std::function<void(int64_t)>& body);

}  // namespace fc
