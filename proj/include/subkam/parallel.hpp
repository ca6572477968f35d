#ifndef SUBKAM_PARALLEL_HPP
#define SUBKAM_PARALLEL_HPP

#include <cstddef>
#include <functional>

namespace subkam {

// Worker count used by parallel_for; 0 selects the hardware concurrency.
void set_worker_threads(unsigned n);
unsigned worker_threads();

// Runs body(i) for i in [0, count). Nested calls run serially on the calling thread.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

} // namespace subkam

#endif
