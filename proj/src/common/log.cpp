#include "common/log.hpp"

#include <atomic>
#include <iostream>
#include <mutex>

namespace wsground::log {
namespace {
std::atomic<bool> g_quiet{false};
std::atomic<std::size_t> g_count{0};
std::mutex g_mutex;
}  // namespace

void warn(const std::string& message) {
  g_count.fetch_add(1);
  if (g_quiet.load()) return;
  std::lock_guard lock(g_mutex);
  std::cerr << "warning: " << message << '\n';
}

void set_quiet(bool quiet) { g_quiet.store(quiet); }

std::size_t warning_count() { return g_count.load(); }

}  // namespace wsground::log
