#include "powerarb/timestamp.hpp"

#include <charconv>
#include <chrono>
#include <cstdio>

#include "powerarb/error.hpp"

namespace powerarb {
namespace {

namespace chr = std::chrono;

int ParseField(std::string_view text, std::size_t pos, std::size_t len) {
  if (pos + len > text.size()) {
    throw Error(ErrorCode::kParseError, "truncated timestamp", std::string(text));
  }
  int value = 0;
  const char* first = text.data() + pos;
  auto [ptr, ec] = std::from_chars(first, first + len, value);
  if (ec != std::errc() || ptr != first + len) {
    throw Error(ErrorCode::kParseError, "malformed timestamp", std::string(text));
  }
  return value;
}

void Expect(std::string_view text, std::size_t pos, std::string_view allowed) {
  if (pos >= text.size() || allowed.find(text[pos]) == std::string_view::npos) {
    throw Error(ErrorCode::kParseError, "malformed timestamp", std::string(text));
  }
}

}  // namespace

Timestamp MakeTimestamp(int year, unsigned month, unsigned day, int hour, int minute) {
  const chr::year_month_day ymd{chr::year{year}, chr::month{month}, chr::day{day}};
  if (!ymd.ok()) {
    throw Error(ErrorCode::kParseError, "invalid calendar date");
  }
  const auto days = chr::sys_days(ymd).time_since_epoch().count();
  return static_cast<Timestamp>(days) * kSecondsPerDay + hour * kSecondsPerHour + minute * 60;
}

Timestamp ParseIso8601(std::string_view text) {
  const int year = ParseField(text, 0, 4);
  Expect(text, 4, "-");
  const int month = ParseField(text, 5, 2);
  Expect(text, 7, "-");
  const int day = ParseField(text, 8, 2);
  Expect(text, 10, "T ");
  const int hour = ParseField(text, 11, 2);
  Expect(text, 13, ":");
  const int minute = ParseField(text, 14, 2);
  std::size_t pos = 16;
  int second = 0;
  if (pos < text.size() && text[pos] == ':') {
    second = ParseField(text, pos + 1, 2);
    pos += 3;
  }
  std::string_view rest = text.substr(pos);
  if (!(rest.empty() || rest == "Z" || rest == "+00:00" || rest == "+0000")) {
    throw Error(ErrorCode::kParseError, "timestamp must be UTC", std::string(text));
  }
  if (hour > 23 || minute > 59 || second > 59) {
    throw Error(ErrorCode::kParseError, "time of day out of range", std::string(text));
  }
  return MakeTimestamp(year, static_cast<unsigned>(month), static_cast<unsigned>(day), hour,
                       minute) +
         second;
}

std::string FormatIso8601(Timestamp t) {
  const auto days = chr::floor<chr::days>(chr::sys_seconds{chr::seconds{t}});
  const chr::year_month_day ymd{days};
  const Timestamp secs = t - days.time_since_epoch().count() * kSecondsPerDay;
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<int>(secs / 3600), static_cast<int>(secs % 3600 / 60),
                static_cast<int>(secs % 60));
  return buf;
}

int YearOf(Timestamp t) {
  const auto days = chr::floor<chr::days>(chr::sys_seconds{chr::seconds{t}});
  return static_cast<int>(chr::year_month_day{days}.year());
}

Timestamp StartOfYear(int year) { return MakeTimestamp(year, 1, 1); }

int DayOfWeek(Timestamp t) {
  const auto days = chr::floor<chr::days>(chr::sys_seconds{chr::seconds{t}});
  const chr::weekday wd{days};
  return static_cast<int>(wd.iso_encoding()) - 1;
}

int HourOfDay(Timestamp t) {
  Timestamp secs = t % kSecondsPerDay;
  if (secs < 0) secs += kSecondsPerDay;
  return static_cast<int>(secs / kSecondsPerHour);
}

}  // namespace powerarb
