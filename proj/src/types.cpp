#include "streamgov/types.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <unordered_set>

#include "streamgov/error.hpp"

namespace streamgov {
namespace {

constexpr std::array<std::string_view, kStateCount> kStateNames{"ACT", "NT", "NSW", "QLD", "SA", "TAS", "VIC", "WA"};

bool parse_int(std::string_view text, int& out) {
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, out);
  return ec == std::errc{} && ptr == end;
}

}  // namespace

std::optional<Date> parse_iso_date(std::string_view text) {
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
  int y = 0, m = 0, d = 0;
  if (!parse_int(text.substr(0, 4), y) || !parse_int(text.substr(5, 2), m) || !parse_int(text.substr(8, 2), d)) {
    return std::nullopt;
  }
  const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(m)},
                                        std::chrono::day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) return std::nullopt;
  return Date{ymd};
}

std::string format_iso_date(Date date) {
  const std::chrono::year_month_day ymd{date};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                static_cast<unsigned>(ymd.day()));
  return buf;
}

std::optional<State> parse_state(std::string_view text) {
  for (std::size_t i = 0; i < kStateNames.size(); ++i) {
    if (kStateNames[i] == text) return static_cast<State>(i);
  }
  return std::nullopt;
}

std::string_view to_string(State state) { return kStateNames[static_cast<std::size_t>(state)]; }

Collection::Collection(std::vector<StationSeries> stations, Date start_date)
    : stations_(std::move(stations)), start_date_(start_date) {
  if (stations_.empty()) throw DataError("collection must contain at least one station");
  days_ = stations_.front().flow.size();
  if (days_ == 0) throw DataError("collection series are empty");

  std::unordered_set<std::string> ids;
  for (const auto& s : stations_) {
    const auto& id = s.meta.station_id;
    if (!ids.insert(id).second) throw DataError("duplicate station id '" + id + "'");
    if (!(s.meta.latitude >= -90.0 && s.meta.latitude <= 90.0) ||
        !(s.meta.longitude >= -180.0 && s.meta.longitude <= 180.0)) {
      throw DataError("station '" + id + "': coordinates out of range");
    }
    if (s.flow.size() != days_) {
      throw DataError("station '" + id + "': series length " + std::to_string(s.flow.size()) + " differs from " +
                      std::to_string(days_));
    }
    for (std::size_t t = 0; t < s.flow.size(); ++t) {
      if (!std::isfinite(s.flow[t]) || s.flow[t] < 0.0) {
        throw DataError("station '" + id + "': invalid flow value at day " + std::to_string(t));
      }
    }
  }
}

Date Collection::end_date() const noexcept { return start_date_ + std::chrono::days{static_cast<long>(days_) - 1}; }

std::vector<std::string> Collection::station_ids() const {
  std::vector<std::string> ids;
  ids.reserve(stations_.size());
  for (const auto& s : stations_) ids.push_back(s.meta.station_id);
  return ids;
}

bool operator==(const Collection& a, const Collection& b) {
  if (a.start_date_ != b.start_date_ || a.days_ != b.days_ || a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto& x = a.stations_[i];
    const auto& y = b.stations_[i];
    if (x.meta.station_id != y.meta.station_id || x.meta.name != y.meta.name || x.meta.latitude != y.meta.latitude ||
        x.meta.longitude != y.meta.longitude || x.meta.state != y.meta.state || x.flow != y.flow) {
      return false;
    }
  }
  return true;
}

}  // namespace streamgov
