/**
 * @file config.hpp
 * @brief Run configuration: a `key = value` file, `#` starts a comment.
 *
 * Every key is optional except `data` (required by all subcommands but `synth`). Unknown
 * keys are rejected so typos fail fast. See README.md for the full key list.
 */
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "streamgov/alignment.hpp"
#include "streamgov/ingest.hpp"
#include "streamgov/spectral.hpp"
#include "streamgov/synth.hpp"
#include "streamgov/temporal.hpp"

namespace streamgov {

struct RunConfig {
  std::filesystem::path data{};
  std::filesystem::path out{"out"};
  std::optional<std::size_t> threads{};

  ingest::IngestConfig ingest{};

  temporal::Linkage linkage{temporal::Linkage::Average};
  std::size_t cluster_count{4};

  spectral::WelchGrid welch_grid{spectral::WelchGrid::defaults()};
  std::optional<spectral::WelchParams> spectral_params{};  ///< unset: chosen by optimize_welch_params

  alignment::AlignmentOptions alignment{};

  std::size_t rolling_window{365};
  std::size_t rolling_stride{7};
  std::size_t psd_window_length{1460};
  std::size_t psd_window_stride{365};
  spectral::WelchParams psd_params{365, 0.5};

  std::size_t kmeans_k_min{1};
  std::size_t kmeans_k_max{10};
  std::uint64_t kmeans_seed{42};
  std::size_t kmeans_restarts{10};

  synth::SynthSpec synth{};
  double synth_zero_fraction{0.75};
  bool synth_offsets_given{false};

  std::set<std::string> explicit_keys{};  ///< keys present in the file
  std::string source_text{};              ///< raw file content, hashed into the manifest

  [[nodiscard]] bool given(std::string_view key) const { return explicit_keys.contains(std::string(key)); }
};

/// Parses and validates everything that does not depend on the data. Throws ConfigError.
RunConfig parse_config(std::string_view text);

RunConfig load_config(const std::filesystem::path& path);

/// Pipeline stages whose data-dependent settings resolve_against checks.
enum Stage : unsigned {
  kStageClustering = 1U << 0,  ///< temporal and spectral dendrogram cuts
  kStageSpectral = 1U << 1,    ///< Welch grid and spectral parameters
  kStageEvolve = 1U << 2,      ///< rolling windows
  kStageSpatial = 1U << 3,     ///< K-means range
  kStageAll = (1U << 4) - 1,
};

/**
 * @brief Checks data-dependent preconditions of the selected stages before any computation.
 *
 * Defaults that cannot apply to a small collection (Welch segment lengths longer than the
 * series, k_max above the station count, cluster_count above n) are narrowed; explicitly
 * configured values that violate a precondition throw ConfigError.
 */
void resolve_against(RunConfig& config, const Collection& collection, unsigned stages = kStageAll);

}  // namespace streamgov
