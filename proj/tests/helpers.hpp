#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <unistd.h>

#include "streamgov/random.hpp"
#include "streamgov/types.hpp"

namespace testutil {

inline streamgov::Date day(int y, unsigned m, unsigned d) {
  return std::chrono::year{y} / std::chrono::month{m} / std::chrono::day{d};
}

/// Collection from raw series; stations are S00, S01, ... spread over NSW.
inline streamgov::Collection make_collection(const std::vector<std::vector<double>>& series,
                                             streamgov::Date start = day(2000, 1, 1)) {
  std::vector<streamgov::StationSeries> stations;
  for (std::size_t i = 0; i < series.size(); ++i) {
    streamgov::StationSeries s;
    s.meta.station_id = "S" + std::string(i < 10 ? "0" : "") + std::to_string(i);
    s.meta.name = "Station " + std::to_string(i);
    s.meta.latitude = -33.0 - 0.1 * static_cast<double>(i);
    s.meta.longitude = 150.0 + 0.1 * static_cast<double>(i);
    s.meta.state = streamgov::State::NSW;
    s.flow = series[i];
    stations.push_back(std::move(s));
  }
  return streamgov::Collection(std::move(stations), start);
}

inline std::vector<double> uniform_vector(streamgov::CounterRng& rng, std::size_t n, double lo, double hi) {
  std::vector<double> v(n);
  for (auto& x : v) x = lo + (hi - lo) * rng.uniform();
  return v;
}

inline std::vector<double> normal_vector(streamgov::CounterRng& rng, std::size_t n) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.normal();
  return v;
}

/// Fresh empty directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::uint64_t counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("streamgov_test_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  [[nodiscard]] const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace testutil
