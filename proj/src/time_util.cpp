#include "tagseek/time_util.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>

namespace tagseek {

UtcMillis now_utc_millis() {
  using namespace std::chrono;
  return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
}

std::string format_utc(UtcMillis t) {
  std::time_t secs = static_cast<std::time_t>(t / 1000);
  int millis = static_cast<int>(t % 1000);
  if (millis < 0) {
    millis += 1000;
    secs -= 1;
  }
  std::tm tm{};
  gmtime_r(&secs, &tm);
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ",
                tm.tm_year + 1900, tm.tm_mon + 1, tm.tm_mday, tm.tm_hour,
                tm.tm_min, tm.tm_sec, millis);
  return buf;
}

std::optional<UtcMillis> parse_utc(const std::string& s) {
  std::tm tm{};
  int millis = 0;
  int consumed = 0;
  int n = std::sscanf(s.c_str(), "%4d-%2d-%2dT%2d:%2d:%2d%n", &tm.tm_year,
                      &tm.tm_mon, &tm.tm_mday, &tm.tm_hour, &tm.tm_min,
                      &tm.tm_sec, &consumed);
  if (n != 6) return std::nullopt;
  const char* rest = s.c_str() + consumed;
  if (*rest == '.') {
    ++rest;
    int digits = 0;
    int frac = 0;
    while (*rest >= '0' && *rest <= '9' && digits < 3) {
      frac = frac * 10 + (*rest - '0');
      ++rest;
      ++digits;
    }
    while (digits < 3) {
      frac *= 10;
      ++digits;
    }
    // swallow extra precision
    while (*rest >= '0' && *rest <= '9') ++rest;
    millis = frac;
  }
  if (*rest != 'Z') return std::nullopt;
  tm.tm_year -= 1900;
  tm.tm_mon -= 1;
  std::time_t secs = timegm(&tm);
  if (secs == static_cast<std::time_t>(-1)) return std::nullopt;
  return static_cast<UtcMillis>(secs) * 1000 + millis;
}

std::optional<std::int64_t> parse_duration_ms(const std::string& s) {
  if (s.empty()) return std::nullopt;
  char* end = nullptr;
  double value = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || value < 0) return std::nullopt;
  std::string unit(end);
  double scale;
  if (unit.empty() || unit == "s") scale = 1000;
  else if (unit == "ms") scale = 1;
  else if (unit == "m") scale = 60 * 1000;
  else if (unit == "h") scale = 3600 * 1000;
  else if (unit == "d") scale = 24.0 * 3600 * 1000;
  else return std::nullopt;
  return static_cast<std::int64_t>(value * scale);
}

}  // namespace tagseek
