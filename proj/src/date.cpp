#include "droptrace/date.hpp"

#include <cstdio>

namespace droptrace {

Date Date::parse(const std::string& iso) {
  int y = 0;
  unsigned m = 0, d = 0;
  if (std::sscanf(iso.c_str(), "%d-%u-%u", &y, &m, &d) != 3)
    throw std::invalid_argument("bad date: " + iso);
  return Date(y, m, d);
}

std::string Date::str() const {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", year(), month(), day_of_month());
  return buf;
}

}  // namespace droptrace
