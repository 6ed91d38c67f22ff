#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace lodlog {

// Calendar instant with the originating zone offset retained so records
// serialize back in the zone the log was written in.
struct Timestamp {
  std::int64_t epoch_ms = 0;    // UTC milliseconds since 1970-01-01
  int offset_minutes = 0;       // zone offset the source carried (0 when absent)

  friend bool operator==(const Timestamp&, const Timestamp&) = default;
  auto operator<=>(const Timestamp&) const = default;
};

// CLF timestamp: "15/Mar/2010:00:00:01 +0100". Missing offset means UTC.
std::optional<Timestamp> parse_clf_time(std::string_view s);

// ISO-8601: "2010-03-15T00:00:01Z", "2010-03-15T00:00:01.250+01:00",
// "+0100" offsets and naked (UTC) timestamps also accepted.
std::optional<Timestamp> parse_iso_time(std::string_view s);

// Canonical ISO-8601 rendering: local time in the stored offset,
// fractional seconds only when nonzero, "Z" for UTC.
std::string format_iso(const Timestamp& ts);

} // namespace lodlog
