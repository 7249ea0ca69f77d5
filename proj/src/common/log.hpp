#pragma once

#include <string>

namespace wsground::log {

// Warnings go to stderr unless silenced; the counter lets tests observe that
// a warning-only path was taken.
void warn(const std::string& message);
void set_quiet(bool quiet);
std::size_t warning_count();

}  // namespace wsground::log
