#include "resonance/parallel.hpp"

#include <cstdlib>

namespace resonance {

unsigned resolve_workers(unsigned requested)
{
    if (requested > 0) return requested;
    if (const char* env = std::getenv("RESONANCE_THREADS")) {
        char* end = nullptr;
        const long n = std::strtol(env, &end, 10);
        if (end != env && n > 0) return static_cast<unsigned>(n);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace resonance
