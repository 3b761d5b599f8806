#include "churnforge/dates.hpp"

#include <cstdio>
#include <stdexcept>

namespace churnforge {

// Howard Hinnant's days_from_civil algorithm.
Date make_date(int y, int m, int d) {
  y -= m <= 2;
  const int era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return static_cast<Date>(era * 146097 + static_cast<int>(doe) - 719468);
}

void civil_from_date(Date z, int& year, int& month, int& day) {
  int zz = z + 719468;
  const int era = (zz >= 0 ? zz : zz - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(zz - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const int y = static_cast<int>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  day = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
  month = static_cast<int>(mp + (mp < 10 ? 3 : -9));
  year = y + (month <= 2);
}

Date parse_date(const std::string& s) {
  int y = 0, m = 0, d = 0;
  char tail = 0;
  if (s.size() != 10 ||
      std::sscanf(s.c_str(), "%4d-%2d-%2d%c", &y, &m, &d, &tail) != 3 ||
      m < 1 || m > 12 || d < 1 || d > 31) {
    throw std::invalid_argument("bad date: '" + s + "' (expected YYYY-MM-DD)");
  }
  // Round-trip through the civil calendar to reject days that overflow the
  // month (e.g. Feb 29 in a non-leap year).
  const Date dt = make_date(y, m, d);
  int ry, rm, rd;
  civil_from_date(dt, ry, rm, rd);
  if (ry != y || rm != m || rd != d) {
    throw std::invalid_argument("bad date: '" + s + "' (no such day)");
  }
  return dt;
}

std::string format_date(Date dt) {
  int y, m, d;
  civil_from_date(dt, y, m, d);
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", y, m, d);
  return buf;
}

}  // namespace churnforge
