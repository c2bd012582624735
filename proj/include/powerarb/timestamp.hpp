#ifndef POWERARB_TIMESTAMP_HPP
#define POWERARB_TIMESTAMP_HPP

#include <cstdint>
#include <string>
#include <string_view>

namespace powerarb {

// Seconds since 1970-01-01T00:00:00Z.
using Timestamp = std::int64_t;

inline constexpr Timestamp kSecondsPerQuarter = 900;
inline constexpr Timestamp kSecondsPerHour = 3600;
inline constexpr Timestamp kSecondsPerDay = 86400;

// Accepts "YYYY-MM-DDTHH:MM[:SS][Z|+00:00]" (a space may replace the 'T').
// Throws Error{kParseError} on anything else, including non-UTC offsets.
Timestamp ParseIso8601(std::string_view text);

// "YYYY-MM-DDTHH:MM:SSZ"
std::string FormatIso8601(Timestamp t);

Timestamp MakeTimestamp(int year, unsigned month, unsigned day, int hour = 0, int minute = 0);

int YearOf(Timestamp t);
Timestamp StartOfYear(int year);
// 0 = Monday ... 6 = Sunday
int DayOfWeek(Timestamp t);
int HourOfDay(Timestamp t);

}  // namespace powerarb

#endif  // POWERARB_TIMESTAMP_HPP
