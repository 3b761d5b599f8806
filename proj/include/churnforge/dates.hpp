#pragma once

#include <cstdint>
#include <string>

namespace churnforge {

// Calendar day as days since 1970-01-01 (UTC). All dataset timestamps are
// daily-granular, so a plain day count is the working representation.
using Date = std::int32_t;

// Civil <-> day-count conversions (Gregorian, proleptic).
Date make_date(int year, int month, int day);
void civil_from_date(Date d, int& year, int& month, int& day);

// Parses "YYYY-MM-DD". Throws std::invalid_argument on malformed input.
Date parse_date(const std::string& s);
std::string format_date(Date d);

}  // namespace churnforge
