/**
 * @file ingest.hpp
 * @brief Loading, validating and detrending a station collection from disk.
 *
 * On-disk layout of a collection directory:
 *
 *     stations.csv        station_id,name,latitude,longitude,state
 *     flows/<id>.csv      date,flow   (ISO-8601 dates, one row per day, NA marks a gap)
 */
#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <span>
#include <string_view>
#include <vector>

#include "streamgov/error.hpp"
#include "streamgov/types.hpp"

namespace streamgov::ingest {

inline constexpr std::string_view kMetadataFile = "stations.csv";
inline constexpr std::string_view kFlowDirectory = "flows";

/// Longest interior gap the linear policy will interpolate.
inline constexpr std::size_t kMaxInterpolatedGap = 7;

enum class GapPolicy { Reject, Linear };

/// Unresolvable gap; index is zero-based within the series passed to fill_gaps.
class GapError : public DataError {
 public:
  GapError(const std::string& what, std::size_t index) : DataError(what), index_(index) {}
  [[nodiscard]] std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

struct IngestConfig {
  /// Inclusive range. When unset, the range of the first station (by id) is used and every
  /// other station must match it exactly.
  std::optional<Date> start_date{};
  std::optional<Date> end_date{};
  GapPolicy gap_policy{GapPolicy::Reject};
};

/// Reads a collection directory. Stations are ordered by ascending station_id.
/// Throws DataError on missing metadata, invalid values (with station and line) or range mismatch.
Collection load_collection(const std::filesystem::path& dir, const IngestConfig& config = {});

/// Writes the layout load_collection reads. Values use 17 significant digits, so a reload is exact.
void write_collection(const Collection& collection, const std::filesystem::path& dir);

/**
 * @brief Resolves NaN gap markers.
 *
 * Reject: any gap throws. Linear: interior runs of at most kMaxInterpolatedGap samples are
 * interpolated between their neighbours; boundary gaps and longer runs throw GapError.
 */
std::vector<double> fill_gaps(std::span<const double> raw, GapPolicy policy);

/// Subtracts the arithmetic mean.
std::vector<double> detrend(std::span<const double> x);

}  // namespace streamgov::ingest
