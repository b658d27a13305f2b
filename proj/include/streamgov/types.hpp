/**
 * @file types.hpp
 * @brief Core domain types: station metadata, daily series and the station collection.
 */
#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace streamgov {

/// Dense row-major-agnostic matrix used for distance, affinity and correlation matrices.
using Matrix = Eigen::MatrixXd;

/// Calendar day.
using Date = std::chrono::sys_days;

/// Parses `YYYY-MM-DD`. Returns nullopt for anything that is not a valid calendar date.
std::optional<Date> parse_iso_date(std::string_view text);

std::string format_iso_date(Date date);

/**
 * @brief Australian state or territory a station belongs to.
 */
enum class State : std::uint8_t { ACT, NT, NSW, QLD, SA, TAS, VIC, WA };

inline constexpr std::size_t kStateCount = 8;

std::optional<State> parse_state(std::string_view text);
std::string_view to_string(State state);

/**
 * @brief Identifying metadata for one gauging station.
 */
struct StationMeta {
  std::string station_id{};
  std::string name{};
  double latitude{};   ///< degrees, [-90, 90]
  double longitude{};  ///< degrees, [-180, 180]
  State state{State::NSW};
};

/**
 * @brief One station's daily streamflow (ML/day).
 */
struct StationSeries {
  StationMeta meta{};
  std::vector<double> flow{};
};

/**
 * @brief Ordered, immutable set of stations sharing one daily time axis.
 *
 * Index order defines the row/column order of every matrix computed downstream.
 * Construction validates that all series have the same length, that flow values are
 * finite and non-negative, that coordinates are in range and that ids are unique.
 */
class Collection {
 public:
  Collection(std::vector<StationSeries> stations, Date start_date);

  [[nodiscard]] std::size_t size() const noexcept { return stations_.size(); }
  [[nodiscard]] std::size_t days() const noexcept { return days_; }
  [[nodiscard]] Date start_date() const noexcept { return start_date_; }
  [[nodiscard]] Date end_date() const noexcept;

  [[nodiscard]] const StationSeries& operator[](std::size_t i) const { return stations_[i]; }
  [[nodiscard]] std::span<const StationSeries> stations() const noexcept { return stations_; }
  [[nodiscard]] std::span<const double> flow(std::size_t i) const noexcept { return stations_[i].flow; }

  [[nodiscard]] std::vector<std::string> station_ids() const;

  friend bool operator==(const Collection& a, const Collection& b);

 private:
  std::vector<StationSeries> stations_;
  std::size_t days_{0};
  Date start_date_{};
};

}  // namespace streamgov
