#include "egir/sysinfo.hpp"

#include <sys/resource.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cstdio>

namespace egir {

uint64_t current_rss_bytes() {
    FILE* f = std::fopen("/proc/self/statm", "r");
    if (!f) return 0;
    unsigned long long size = 0, resident = 0;
    int got = std::fscanf(f, "%llu %llu", &size, &resident);
    std::fclose(f);
    if (got != 2) return 0;
    return static_cast<uint64_t>(resident) * static_cast<uint64_t>(sysconf(_SC_PAGESIZE));
}

uint64_t peak_rss_bytes() {
    struct rusage ru{};
    if (getrusage(RUSAGE_SELF, &ru) != 0) return 0;
    return static_cast<uint64_t>(ru.ru_maxrss) * 1024; // Linux reports KiB
}

PeakRssSampler::PeakRssSampler() {
    peak_.store(current_rss_bytes());
    sampler_ = std::thread([this] {
        while (!stop_.load(std::memory_order_relaxed)) {
            uint64_t now = current_rss_bytes();
            uint64_t prev = peak_.load(std::memory_order_relaxed);
            while (now > prev && !peak_.compare_exchange_weak(prev, now)) {
            }
            std::this_thread::sleep_for(std::chrono::milliseconds(10));
        }
    });
}

PeakRssSampler::~PeakRssSampler() {
    stop_.store(true);
    if (sampler_.joinable()) sampler_.join();
}

uint64_t PeakRssSampler::peak() const {
    return std::max(peak_.load(), peak_rss_bytes());
}

} // namespace egir
