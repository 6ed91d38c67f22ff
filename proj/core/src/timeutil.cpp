#include "lodlog/timeutil.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cstdio>

namespace lodlog {

namespace {

bool is_digit(char c) { return c >= '0' && c <= '9'; }

bool take_int(std::string_view s, std::size_t& pos, int digits, int& out) {
  if (pos + static_cast<std::size_t>(digits) > s.size()) return false;
  int v = 0;
  for (int i = 0; i < digits; ++i) {
    char c = s[pos + static_cast<std::size_t>(i)];
    if (!is_digit(c)) return false;
    v = v * 10 + (c - '0');
  }
  pos += static_cast<std::size_t>(digits);
  out = v;
  return true;
}

// Days since 1970-01-01 for a proleptic Gregorian date (Hinnant's algorithm).
std::int64_t days_from_civil(int y, int m, int d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = static_cast<unsigned>((153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1);
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, int& y, int& m, int& d) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t yy = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
  m = static_cast<int>(mp + (mp < 10 ? 3 : -9));
  y = static_cast<int>(yy + (m <= 2));
}

int month_from_abbrev(std::string_view s) {
  static constexpr std::array<std::string_view, 12> names = {
      "jan", "feb", "mar", "apr", "may", "jun",
      "jul", "aug", "sep", "oct", "nov", "dec"};
  if (s.size() != 3) return 0;
  std::string lower;
  for (char c : s) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  for (std::size_t i = 0; i < names.size(); ++i)
    if (lower == names[i]) return static_cast<int>(i) + 1;
  return 0;
}

// "+0100", "-05:30", "Z"; returns false on malformed input.
bool parse_offset(std::string_view s, std::size_t& pos, int& offset_minutes) {
  if (pos >= s.size()) return false;
  char c = s[pos];
  if (c == 'Z' || c == 'z') {
    ++pos;
    offset_minutes = 0;
    return true;
  }
  if (c != '+' && c != '-') return false;
  int sign = c == '+' ? 1 : -1;
  ++pos;
  int hh = 0, mm = 0;
  if (!take_int(s, pos, 2, hh)) return false;
  if (pos < s.size() && s[pos] == ':') ++pos;
  if (!take_int(s, pos, 2, mm)) return false;
  offset_minutes = sign * (hh * 60 + mm);
  return true;
}

std::optional<Timestamp> compose(int y, int mo, int d, int h, int mi, int sec,
                                 int ms, int offset_minutes) {
  if (mo < 1 || mo > 12 || d < 1 || d > 31 || h > 23 || mi > 59 || sec > 60) return std::nullopt;
  std::int64_t days = days_from_civil(y, mo, d);
  std::int64_t local_s = days * 86400 + h * 3600 + mi * 60 + sec;
  std::int64_t utc_ms = (local_s - static_cast<std::int64_t>(offset_minutes) * 60) * 1000 + ms;
  return Timestamp{utc_ms, offset_minutes};
}

} // namespace

std::optional<Timestamp> parse_clf_time(std::string_view s) {
  // dd/Mon/yyyy:HH:MM:SS [+-]HHMM
  std::size_t pos = 0;
  int d = 0, y = 0, h = 0, mi = 0, sec = 0;
  if (!take_int(s, pos, 2, d)) return std::nullopt;
  if (pos >= s.size() || s[pos] != '/') return std::nullopt;
  ++pos;
  if (pos + 3 > s.size()) return std::nullopt;
  int mo = month_from_abbrev(s.substr(pos, 3));
  if (mo == 0) return std::nullopt;
  pos += 3;
  if (pos >= s.size() || s[pos] != '/') return std::nullopt;
  ++pos;
  if (!take_int(s, pos, 4, y)) return std::nullopt;
  if (pos >= s.size() || s[pos] != ':') return std::nullopt;
  ++pos;
  if (!take_int(s, pos, 2, h)) return std::nullopt;
  if (pos >= s.size() || s[pos] != ':') return std::nullopt;
  ++pos;
  if (!take_int(s, pos, 2, mi)) return std::nullopt;
  if (pos >= s.size() || s[pos] != ':') return std::nullopt;
  ++pos;
  if (!take_int(s, pos, 2, sec)) return std::nullopt;
  int offset = 0;
  while (pos < s.size() && s[pos] == ' ') ++pos;
  if (pos < s.size()) {
    if (!parse_offset(s, pos, offset)) return std::nullopt;
  }
  if (pos != s.size()) return std::nullopt;
  return compose(y, mo, d, h, mi, sec, 0, offset);
}

std::optional<Timestamp> parse_iso_time(std::string_view s) {
  std::size_t pos = 0;
  int y = 0, mo = 0, d = 0, h = 0, mi = 0, sec = 0, ms = 0;
  if (!take_int(s, pos, 4, y)) return std::nullopt;
  if (pos >= s.size() || s[pos] != '-') return std::nullopt;
  ++pos;
  if (!take_int(s, pos, 2, mo)) return std::nullopt;
  if (pos >= s.size() || s[pos] != '-') return std::nullopt;
  ++pos;
  if (!take_int(s, pos, 2, d)) return std::nullopt;
  if (pos >= s.size() || (s[pos] != 'T' && s[pos] != 't' && s[pos] != ' ')) return std::nullopt;
  ++pos;
  if (!take_int(s, pos, 2, h)) return std::nullopt;
  if (pos >= s.size() || s[pos] != ':') return std::nullopt;
  ++pos;
  if (!take_int(s, pos, 2, mi)) return std::nullopt;
  if (pos >= s.size() || s[pos] != ':') return std::nullopt;
  ++pos;
  if (!take_int(s, pos, 2, sec)) return std::nullopt;
  if (pos < s.size() && s[pos] == '.') {
    ++pos;
    int scale = 100;
    if (pos >= s.size() || !is_digit(s[pos])) return std::nullopt;
    while (pos < s.size() && is_digit(s[pos])) {
      ms += (s[pos] - '0') * scale;
      scale /= 10;
      ++pos;
    }
  }
  int offset = 0;
  if (pos < s.size()) {
    if (!parse_offset(s, pos, offset)) return std::nullopt;
  }
  if (pos != s.size()) return std::nullopt;
  return compose(y, mo, d, h, mi, sec, ms, offset);
}

std::string format_iso(const Timestamp& ts) {
  std::int64_t local_ms = ts.epoch_ms + static_cast<std::int64_t>(ts.offset_minutes) * 60000;
  std::int64_t days = local_ms / 86400000;
  std::int64_t rem = local_ms % 86400000;
  if (rem < 0) {
    rem += 86400000;
    --days;
  }
  int y, mo, d;
  civil_from_days(days, y, mo, d);
  int h = static_cast<int>(rem / 3600000);
  int mi = static_cast<int>((rem / 60000) % 60);
  int sec = static_cast<int>((rem / 1000) % 60);
  int ms = static_cast<int>(rem % 1000);

  char buf[48];
  int n = std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02d", y, mo, d, h, mi, sec);
  std::string out(buf, static_cast<std::size_t>(n));
  if (ms != 0) {
    std::snprintf(buf, sizeof(buf), ".%03d", ms);
    out += buf;
  }
  if (ts.offset_minutes == 0) {
    out += 'Z';
  } else {
    int off = ts.offset_minutes;
    char sign = off < 0 ? '-' : '+';
    if (off < 0) off = -off;
    std::snprintf(buf, sizeof(buf), "%c%02d:%02d", sign, off / 60, off % 60);
    out += buf;
  }
  return out;
}

} // namespace lodlog
