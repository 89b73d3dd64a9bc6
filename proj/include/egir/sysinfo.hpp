#pragma once

#include <atomic>
#include <cstdint>
#include <thread>

namespace egir {

/// Current resident set size in bytes (0 if unavailable).
uint64_t current_rss_bytes();

/// Process peak RSS high-water mark from the OS, in bytes.
uint64_t peak_rss_bytes();

/// Samples RSS on a 10 ms tick for the lifetime of the object and keeps
/// the maximum. Approximate by nature; good enough for the benchmark
/// report's peak-memory column.
class PeakRssSampler {
public:
    PeakRssSampler();
    ~PeakRssSampler();
    PeakRssSampler(const PeakRssSampler&) = delete;
    PeakRssSampler& operator=(const PeakRssSampler&) = delete;

    /// Max of the 10 ms samples and the OS process high-water mark.
    uint64_t peak() const;

private:
    std::atomic<uint64_t> peak_{0};
    std::atomic<bool> stop_{false};
    std::thread sampler_;
};

} // namespace egir
