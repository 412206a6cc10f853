#include "fairaudit/parallel.hpp"

#include <atomic>

namespace fairaudit {

namespace {
std::atomic<int> g_thread_cap{1};
}

int thread_cap() { return g_thread_cap.load(); }

void set_thread_cap(int n) { g_thread_cap.store(n < 1 ? 1 : n); }

}  // namespace fairaudit
