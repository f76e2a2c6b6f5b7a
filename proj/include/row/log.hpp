#pragma once

#include <iostream>
#include <sstream>
#include <string>

namespace row {

// Log verbosity from the ROW_LOG environment variable:
//   0 = quiet, 1 = progress (default), 2 = per-task detail.
int log_verbosity();

// Writes one line to stderr when the configured verbosity reaches `level`.
void log_line(int level, const std::string& message);

} // namespace row
