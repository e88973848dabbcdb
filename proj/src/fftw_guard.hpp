#pragma once

#include <mutex>

namespace deflect {

// FFTW plan creation and destruction are not thread-safe; executing plans
// is.  Every translation unit that plans transforms must hold this lock
// while doing so.
inline std::mutex& fftw_plan_mutex() {
    static std::mutex m;
    return m;
}

}  // namespace deflect
