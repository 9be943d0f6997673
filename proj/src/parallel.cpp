#include "hsa/parallel.hpp"

#include <cstdlib>
#include <string>

namespace hsa::detail {

int thread_budget() {
    if (const char* env = std::getenv("HS_THREADS")) {
        try {
            const int requested = std::stoi(env);
            if (requested >= 1) return requested;
        } catch (...) {
            // unparseable value falls through to the default
        }
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

}  // namespace hsa::detail
