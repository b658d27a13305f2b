/**
 * @file synth.hpp
 * @brief Deterministic synthetic streamflow collections with known offsets and labels.
 */
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string_view>
#include <vector>

#include "streamgov/types.hpp"

namespace streamgov::synth {

enum class Template {
  AnnualPulse,  ///< one sharp pulse per 365 days over a low seasonal baseline; year-to-year amplitudes vary
  Sinusoid,     ///< A (1 + sin(2 pi t / period))
  WhiteNoise,   ///< constant level, all variation comes from the noise term
  TwoBlock,     ///< first half of the stations follow one annual-pulse regime, second half another
};

std::string_view to_string(Template t);
std::optional<Template> parse_template(std::string_view text);

struct SynthSpec {
  std::size_t stations{20};
  std::size_t days{3650};
  Template shape{Template::AnnualPulse};
  std::vector<std::size_t> offsets{};  ///< circular delay per station, 0..365; empty means all zero
  double noise_std{0.0};               ///< Gaussian noise std as a fraction of each station's template maximum
  std::uint64_t seed{1};
  double period{365.0};                ///< sinusoid period in days
  Date start_date{std::chrono::year{2000} / 1 / 1};
};

struct SynthResult {
  Collection collection;
  std::vector<std::size_t> offsets;  ///< planted delays
  std::vector<std::size_t> labels;   ///< block label (all 0 except for TwoBlock)
};

/**
 * @brief Offsets drawn from a zero-inflated distribution: 0 with probability `zero_fraction`,
 *        otherwise uniform on 1..365.
 */
std::vector<std::size_t> sample_offsets(std::size_t stations, double zero_fraction, std::uint64_t seed);

/// Throws std::invalid_argument for an invalid spec (offset > 365, wrong offset count, noise < 0, n < 1, T < 2).
SynthResult generate(const SynthSpec& spec);

/// Writes the ingest layout plus truth.json with the planted offsets and labels.
void write_synthetic(const SynthSpec& spec, const SynthResult& result, const std::filesystem::path& dir);

}  // namespace streamgov::synth
