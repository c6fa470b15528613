#ifndef FABKIT_CLOCK_HPP
#define FABKIT_CLOCK_HPP

#include <chrono>
#include <vector>

namespace fabkit {

// Injectable time source so polling cadence and timestamped names are
// testable without real waiting.
class Clock {
public:
    virtual ~Clock() = default;
    virtual std::chrono::system_clock::time_point now() = 0;
    virtual void sleep_for(std::chrono::seconds d) = 0;
};

class SystemClock final : public Clock {
public:
    std::chrono::system_clock::time_point now() override {
        return std::chrono::system_clock::now();
    }
    void sleep_for(std::chrono::seconds d) override;
};

// Virtual clock: sleep_for advances time instantly and records the request.
class FakeClock final : public Clock {
public:
    explicit FakeClock(std::chrono::system_clock::time_point start =
                           std::chrono::system_clock::time_point{})
        : now_(start) {}

    std::chrono::system_clock::time_point now() override { return now_; }

    void sleep_for(std::chrono::seconds d) override {
        sleeps.push_back(d);
        now_ += d;
    }

    void advance(std::chrono::seconds d) { now_ += d; }

    std::vector<std::chrono::seconds> sleeps;

private:
    std::chrono::system_clock::time_point now_;
};

} // namespace fabkit

#endif
