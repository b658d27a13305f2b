#include "streamgov/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <stdexcept>

#include <json.hpp>

#include "streamgov/ingest.hpp"
#include "streamgov/io.hpp"
#include "streamgov/random.hpp"

namespace streamgov::synth {
namespace {

constexpr std::size_t kMaxDelay = 365;

// Stream ids for derive_seed.
constexpr std::uint64_t kTemplateStream = 1;
constexpr std::uint64_t kNoiseStream = 2;
constexpr std::uint64_t kSiteStream = 3;
constexpr std::uint64_t kOffsetStream = 4;

struct PulseRegime {
  double peak_day;   ///< day of year of the pulse peak
  double recession;  ///< e-folding time of the falling limb, days
  double phase;      ///< baseline seasonal phase
};

std::vector<double> annual_pulse(std::size_t days, std::uint64_t seed, const PulseRegime& regime) {
  CounterRng rng(seed);
  std::vector<double> x(days);
  for (std::size_t t = 0; t < days; ++t) {
    x[t] = 0.5 + 0.2 * std::sin(2.0 * std::numbers::pi * static_cast<double>(t) / 365.0 + regime.phase);
  }
  const long years = static_cast<long>(days / 365) + 2;
  for (long y = -1; y < years; ++y) {
    const double amplitude = std::exp(std::log(10.0) + 0.8 * rng.normal());
    const double jitter = static_cast<double>(rng.below(61)) - 30.0;
    const double peak = static_cast<double>(y) * 365.0 + regime.peak_day + jitter;
    for (std::size_t t = 0; t < days; ++t) {
      const double d = static_cast<double>(t) - peak;
      if (d >= -3.0 && d < 0.0) {
        x[t] += amplitude * (d + 4.0) / 4.0;
      } else if (d >= 0.0) {
        x[t] += amplitude * std::exp(-d / regime.recession);
      }
    }
  }
  return x;
}

std::vector<double> base_template(const SynthSpec& spec, std::size_t block) {
  const std::uint64_t seed = derive_seed(spec.seed, kTemplateStream, block);
  switch (spec.shape) {
    case Template::AnnualPulse:
      return annual_pulse(spec.days, seed, PulseRegime{150.0, 12.0, 1.0});
    case Template::TwoBlock:
      return block == 0 ? annual_pulse(spec.days, seed, PulseRegime{150.0, 12.0, 1.0})
                        : annual_pulse(spec.days, seed, PulseRegime{330.0, 40.0, 4.0});
    case Template::Sinusoid: {
      std::vector<double> x(spec.days);
      for (std::size_t t = 0; t < spec.days; ++t) {
        x[t] = 5.0 * (1.0 + std::sin(2.0 * std::numbers::pi * static_cast<double>(t) / spec.period));
      }
      return x;
    }
    case Template::WhiteNoise:
      return std::vector<double>(spec.days, 10.0);
  }
  return {};
}

struct Site {
  double latitude, longitude;
  State state;
};

// Three well-separated groups of sites: Perth, Sydney and Darwin surroundings.
constexpr std::array<Site, 3> kSites{{{-31.95, 115.86, State::WA}, {-33.87, 151.21, State::NSW},
                                      {-12.46, 130.84, State::NT}}};

}  // namespace

std::string_view to_string(Template t) {
  switch (t) {
    case Template::AnnualPulse:
      return "annual_pulse";
    case Template::Sinusoid:
      return "sinusoid";
    case Template::WhiteNoise:
      return "white_noise";
    case Template::TwoBlock:
      return "two_block";
  }
  return "annual_pulse";
}

std::optional<Template> parse_template(std::string_view text) {
  for (auto t : {Template::AnnualPulse, Template::Sinusoid, Template::WhiteNoise, Template::TwoBlock}) {
    if (to_string(t) == text) return t;
  }
  return std::nullopt;
}

std::vector<std::size_t> sample_offsets(std::size_t stations, double zero_fraction, std::uint64_t seed) {
  CounterRng rng(derive_seed(seed, kOffsetStream));
  std::vector<std::size_t> out(stations);
  for (auto& phi : out) {
    const double u = rng.uniform();
    const auto shift = static_cast<std::size_t>(rng.below(kMaxDelay)) + 1;
    phi = u < zero_fraction ? 0 : shift;
  }
  return out;
}

SynthResult generate(const SynthSpec& spec) {
  if (spec.stations < 1) throw std::invalid_argument("synth: need at least one station");
  if (spec.days < 2) throw std::invalid_argument("synth: need at least two days");
  if (!(spec.noise_std >= 0.0)) throw std::invalid_argument("synth: noise_std must be non-negative");
  if (!(spec.period > 0.0)) throw std::invalid_argument("synth: period must be positive");
  std::vector<std::size_t> offsets = spec.offsets.empty() ? std::vector<std::size_t>(spec.stations, 0) : spec.offsets;
  if (offsets.size() != spec.stations) throw std::invalid_argument("synth: one offset per station required");
  for (auto phi : offsets) {
    if (phi > kMaxDelay) throw std::invalid_argument("synth: offsets must lie in 0..365");
  }

  std::vector<std::size_t> labels(spec.stations, 0);
  if (spec.shape == Template::TwoBlock) {
    for (std::size_t i = spec.stations / 2; i < spec.stations; ++i) labels[i] = 1;
  }
  const std::array<std::vector<double>, 2> templates{
      base_template(spec, 0), spec.shape == Template::TwoBlock ? base_template(spec, 1) : std::vector<double>{}};

  std::vector<StationSeries> stations(spec.stations);
  for (std::size_t i = 0; i < spec.stations; ++i) {
    const auto& tmpl = templates[labels[i]];
    const double amplitude = *std::max_element(tmpl.begin(), tmpl.end());
    CounterRng noise(derive_seed(spec.seed, kNoiseStream, i));
    auto& flow = stations[i].flow;
    flow.resize(spec.days);
    for (std::size_t t = 0; t < spec.days; ++t) {
      const std::size_t src = (t + spec.days - offsets[i] % spec.days) % spec.days;
      double v = tmpl[src];
      if (spec.noise_std > 0.0) v += spec.noise_std * amplitude * noise.normal();
      flow[t] = std::max(0.0, v);
    }

    CounterRng site_rng(derive_seed(spec.seed, kSiteStream, i));
    const Site& site = kSites[i % kSites.size()];
    char id[32];
    std::snprintf(id, sizeof id, "SYN%04zu", i + 1);
    auto& meta = stations[i].meta;
    meta.station_id = id;
    meta.name = "Synthetic station " + std::to_string(i + 1);
    meta.latitude = site.latitude + 0.5 * (site_rng.uniform() - 0.5);
    meta.longitude = site.longitude + 0.5 * (site_rng.uniform() - 0.5);
    meta.state = site.state;
  }
  return SynthResult{Collection(std::move(stations), spec.start_date), std::move(offsets), std::move(labels)};
}

void write_synthetic(const SynthSpec& spec, const SynthResult& result, const std::filesystem::path& dir) {
  ingest::write_collection(result.collection, dir);
  nlohmann::ordered_json truth;
  truth["template"] = to_string(spec.shape);
  truth["seed"] = spec.seed;
  truth["noise_std"] = spec.noise_std;
  truth["stations"] = result.collection.station_ids();
  truth["offsets"] = result.offsets;
  truth["labels"] = result.labels;
  io::write_text_file(dir / "truth.json", truth.dump(2) + "\n");
}

}  // namespace streamgov::synth
