#include "rvlab/log.hpp"

#include <atomic>
#include <iostream>
#include <mutex>

namespace rvlab::log {

namespace {
std::atomic<int> g_level{kQuiet};
std::mutex g_mutex;

void emit(const char* tag, const std::string& msg) {
  std::lock_guard<std::mutex> lock(g_mutex);
  std::cerr << "[rvlab] " << tag << msg << '\n';
}
}  // namespace

void set_verbosity(int level) { g_level = level; }
int verbosity() { return g_level; }
void info(const std::string& msg) {
  if (g_level >= kInfo) emit("", msg);
}
void debug(const std::string& msg) {
  if (g_level >= kDebug) emit("", msg);
}
void warn(const std::string& msg) { emit("warning: ", msg); }

}  // namespace rvlab::log
