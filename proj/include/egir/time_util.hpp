#pragma once

#include <cstdint>
#include <string>

namespace egir {

/// Seconds between consecutive samples: 15-minute resolution.
inline constexpr int64_t kStepSeconds = 900;

/// Parses "YYYY-MM-DDTHH:MM:SS" (optional trailing 'Z', 'T' or space
/// separator) as UTC. Throws DataError on anything else.
int64_t iso8601_parse(const std::string& s);

/// Formats epoch seconds as "YYYY-MM-DDTHH:MM:SSZ".
std::string iso8601_format(int64_t epoch_seconds);

} // namespace egir
