#include "flagwalk/parallel.hpp"

#include <cstdlib>
#include <string>

namespace flagwalk {

int default_workers() {
    if (const char* env = std::getenv("FLAGWALK_WORKERS")) {
        try {
            const int n = std::stoi(env);
            if (n > 0) return n;
        } catch (...) {
        }
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

int resolve_workers(int requested) { return requested > 0 ? requested : default_workers(); }

}  // namespace flagwalk
