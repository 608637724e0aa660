#pragma once

#include <string>

namespace rvlab::log {

enum Level : int { kQuiet = 0, kInfo = 1, kDebug = 2 };

void set_verbosity(int level);
int verbosity();
// One line on stderr: "[rvlab] <msg>".
void info(const std::string& msg);
void debug(const std::string& msg);
void warn(const std::string& msg);

}  // namespace rvlab::log
