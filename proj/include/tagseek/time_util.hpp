#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace tagseek {

// Milliseconds since the Unix epoch, UTC. All record timestamps use this.
using UtcMillis = std::int64_t;

UtcMillis now_utc_millis();

// "2017-02-01T12:00:00.123Z"
std::string format_utc(UtcMillis t);
std::optional<UtcMillis> parse_utc(const std::string& s);

// Durations like "500ms", "20s", "5m", "12h", "7d". Bare integers are seconds.
std::optional<std::int64_t> parse_duration_ms(const std::string& s);

}  // namespace tagseek
