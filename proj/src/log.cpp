#include "row/log.hpp"

#include <cstdlib>

namespace row {

int log_verbosity() {
    static const int level = [] {
        const char* env = std::getenv("ROW_LOG");
        if (!env || !*env) return 1;
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end == env || *end != '\0') return 1;
        return static_cast<int>(v);
    }();
    return level;
}

void log_line(int level, const std::string& message) {
    if (log_verbosity() >= level) std::cerr << message << "\n";
}

} // namespace row
