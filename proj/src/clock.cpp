#include "fabkit/clock.hpp"

#include <thread>

namespace fabkit {

void SystemClock::sleep_for(std::chrono::seconds d) {
    std::this_thread::sleep_for(d);
}

} // namespace fabkit
