#include "streamgov/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <map>

#include "streamgov/error.hpp"
#include "streamgov/io.hpp"

namespace streamgov {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_list(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const auto comma = s.find(',', pos);
    out.push_back(trim(s.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos)));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

std::uint64_t to_u64(std::string_view key, std::string_view v) {
  std::uint64_t out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc{} || ptr != v.data() + v.size()) {
    throw ConfigError("'" + std::string(key) + "': expected a non-negative integer, got '" + std::string(v) + "'");
  }
  return out;
}

std::size_t to_size(std::string_view key, std::string_view v) { return static_cast<std::size_t>(to_u64(key, v)); }

double to_double(std::string_view key, std::string_view v) {
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc{} || ptr != v.data() + v.size() || !std::isfinite(out)) {
    throw ConfigError("'" + std::string(key) + "': expected a number, got '" + std::string(v) + "'");
  }
  return out;
}

Date to_date(std::string_view key, std::string_view v) {
  auto d = parse_iso_date(v);
  if (!d) throw ConfigError("'" + std::string(key) + "': expected YYYY-MM-DD, got '" + std::string(v) + "'");
  return *d;
}

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

using Setter = std::function<void(RunConfig&, std::string_view key, std::string_view value)>;

const std::map<std::string, Setter, std::less<>>& setters() {
  static const std::map<std::string, Setter, std::less<>> table{
      {"data", [](RunConfig& c, auto, auto v) { c.data = std::string(v); }},
      {"out", [](RunConfig& c, auto, auto v) { c.out = std::string(v); }},
      {"threads", [](RunConfig& c, auto k, auto v) { c.threads = to_size(k, v); }},
      {"start_date", [](RunConfig& c, auto k, auto v) { c.ingest.start_date = to_date(k, v); }},
      {"end_date", [](RunConfig& c, auto k, auto v) { c.ingest.end_date = to_date(k, v); }},
      {"gap_policy",
       [](RunConfig& c, auto k, auto v) {
         if (v == "reject") {
           c.ingest.gap_policy = ingest::GapPolicy::Reject;
         } else if (v == "linear") {
           c.ingest.gap_policy = ingest::GapPolicy::Linear;
         } else {
           throw ConfigError("'" + std::string(k) + "': expected reject or linear");
         }
       }},
      {"linkage",
       [](RunConfig& c, auto k, auto v) {
         for (auto l : {temporal::Linkage::Average, temporal::Linkage::Single, temporal::Linkage::Complete}) {
           if (temporal::to_string(l) == v) {
             c.linkage = l;
             return;
           }
         }
         throw ConfigError("'" + std::string(k) + "': expected average, single or complete");
       }},
      {"cluster_count", [](RunConfig& c, auto k, auto v) { c.cluster_count = to_size(k, v); }},
      {"welch_segment_lengths",
       [](RunConfig& c, auto k, auto v) {
         c.welch_grid.segment_lengths.clear();
         for (auto item : split_list(v)) c.welch_grid.segment_lengths.push_back(to_size(k, item));
       }},
      {"welch_overlaps",
       [](RunConfig& c, auto k, auto v) {
         c.welch_grid.overlaps.clear();
         for (auto item : split_list(v)) c.welch_grid.overlaps.push_back(to_double(k, item));
       }},
      {"spectral_segment_length",
       [](RunConfig& c, auto k, auto v) {
         if (!c.spectral_params) c.spectral_params = spectral::WelchParams{0, 0.0};
         c.spectral_params->segment_length = to_size(k, v);
       }},
      {"spectral_overlap",
       [](RunConfig& c, auto k, auto v) {
         if (!c.spectral_params) c.spectral_params = spectral::WelchParams{0, 0.0};
         c.spectral_params->overlap = to_double(k, v);
       }},
      {"align_max_iters", [](RunConfig& c, auto k, auto v) { c.alignment.max_iters = to_size(k, v); }},
      {"align_tol", [](RunConfig& c, auto k, auto v) { c.alignment.tol = to_double(k, v); }},
      {"align_loss",
       [](RunConfig& c, auto k, auto v) {
         if (v == "normalized") {
           c.alignment.mode = alignment::LossMode::Normalized;
         } else if (v == "raw") {
           c.alignment.mode = alignment::LossMode::Raw;
         } else {
           throw ConfigError("'" + std::string(k) + "': expected normalized or raw");
         }
       }},
      {"rolling_window", [](RunConfig& c, auto k, auto v) { c.rolling_window = to_size(k, v); }},
      {"rolling_stride", [](RunConfig& c, auto k, auto v) { c.rolling_stride = to_size(k, v); }},
      {"psd_window_length", [](RunConfig& c, auto k, auto v) { c.psd_window_length = to_size(k, v); }},
      {"psd_window_stride", [](RunConfig& c, auto k, auto v) { c.psd_window_stride = to_size(k, v); }},
      {"psd_segment_length", [](RunConfig& c, auto k, auto v) { c.psd_params.segment_length = to_size(k, v); }},
      {"psd_overlap", [](RunConfig& c, auto k, auto v) { c.psd_params.overlap = to_double(k, v); }},
      {"kmeans_k_min", [](RunConfig& c, auto k, auto v) { c.kmeans_k_min = to_size(k, v); }},
      {"kmeans_k_max", [](RunConfig& c, auto k, auto v) { c.kmeans_k_max = to_size(k, v); }},
      {"kmeans_seed", [](RunConfig& c, auto k, auto v) { c.kmeans_seed = to_u64(k, v); }},
      {"kmeans_restarts", [](RunConfig& c, auto k, auto v) { c.kmeans_restarts = to_size(k, v); }},
      {"synth_template",
       [](RunConfig& c, auto k, auto v) {
         auto t = synth::parse_template(v);
         if (!t) throw ConfigError("'" + std::string(k) + "': expected annual_pulse, sinusoid, white_noise or two_block");
         c.synth.shape = *t;
       }},
      {"synth_stations", [](RunConfig& c, auto k, auto v) { c.synth.stations = to_size(k, v); }},
      {"synth_days", [](RunConfig& c, auto k, auto v) { c.synth.days = to_size(k, v); }},
      {"synth_noise_std", [](RunConfig& c, auto k, auto v) { c.synth.noise_std = to_double(k, v); }},
      {"synth_seed", [](RunConfig& c, auto k, auto v) { c.synth.seed = to_u64(k, v); }},
      {"synth_period", [](RunConfig& c, auto k, auto v) { c.synth.period = to_double(k, v); }},
      {"synth_start_date", [](RunConfig& c, auto k, auto v) { c.synth.start_date = to_date(k, v); }},
      {"synth_zero_fraction", [](RunConfig& c, auto k, auto v) { c.synth_zero_fraction = to_double(k, v); }},
      {"synth_offsets",
       [](RunConfig& c, auto k, auto v) {
         c.synth.offsets.clear();
         for (auto item : split_list(v)) c.synth.offsets.push_back(to_size(k, item));
         c.synth_offsets_given = true;
       }},
  };
  return table;
}

void validate(const RunConfig& c) {
  if (c.ingest.start_date && c.ingest.end_date) {
    require(*c.ingest.start_date <= *c.ingest.end_date, "start_date must not follow end_date");
  }
  require(c.cluster_count >= 1, "cluster_count must be at least 1");

  require(!c.welch_grid.segment_lengths.empty() && !c.welch_grid.overlaps.empty(), "Welch grid must not be empty");
  auto check_welch = [](const spectral::WelchParams& p, const std::string& what) {
    require(p.segment_length >= 2, what + ": segment length must be at least 2");
    require(p.overlap >= 0.0 && p.overlap <= 0.95, what + ": overlap must lie in [0, 0.95]");
    require(p.step() >= 1, what + ": step rounds to zero");
  };
  for (auto s : c.welch_grid.segment_lengths) {
    for (double o : c.welch_grid.overlaps) check_welch({s, o}, "welch grid");
  }
  if (c.spectral_params) {
    require(c.spectral_params->segment_length > 0, "spectral_overlap given without spectral_segment_length");
    check_welch(*c.spectral_params, "spectral parameters");
  }

  require(c.alignment.max_iters >= 1, "align_max_iters must be at least 1");
  require(c.alignment.tol >= 0.0, "align_tol must be non-negative");

  require(c.rolling_window >= 2, "rolling_window must be at least 2");
  require(c.rolling_stride >= 1, "rolling_stride must be at least 1");
  require(c.psd_window_stride >= 1, "psd_window_stride must be at least 1");
  check_welch(c.psd_params, "rolling PSD");
  require(c.psd_params.segment_length <= c.psd_window_length, "psd_segment_length exceeds psd_window_length");

  require(c.kmeans_k_min >= 1, "kmeans_k_min must be at least 1");
  require(c.kmeans_k_max >= c.kmeans_k_min + 2, "k range must contain at least 3 values");
  require(c.kmeans_restarts >= 1, "kmeans_restarts must be at least 1");

  require(c.synth.stations >= 2, "synth_stations must be at least 2");
  require(c.synth.days >= 2, "synth_days must be at least 2");
  require(c.synth.noise_std >= 0.0, "synth_noise_std must be non-negative");
  require(c.synth.period > 0.0, "synth_period must be positive");
  require(c.synth_zero_fraction >= 0.0 && c.synth_zero_fraction <= 1.0, "synth_zero_fraction must lie in [0, 1]");
  if (c.synth_offsets_given) {
    require(c.synth.offsets.size() == c.synth.stations, "synth_offsets needs one value per station");
    for (auto phi : c.synth.offsets) require(phi <= alignment::kMaxOffset, "synth_offsets must lie in 0..365");
  }
}

}  // namespace

RunConfig parse_config(std::string_view text) {
  RunConfig c;
  c.source_text = std::string(text);
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    }
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    const auto it = setters().find(key);
    if (it == setters().end()) throw ConfigError("line " + std::to_string(line_no) + ": unknown key '" + std::string(key) + "'");
    if (!c.explicit_keys.insert(std::string(key)).second) {
      throw ConfigError("line " + std::to_string(line_no) + ": duplicate key '" + std::string(key) + "'");
    }
    it->second(c, key, value);
  }
  validate(c);
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::string text;
  try {
    text = io::read_text_file(path);
  } catch (const DataError& e) {
    throw ConfigError(e.what());
  }
  return parse_config(text);
}

void resolve_against(RunConfig& c, const Collection& collection, unsigned stages) {
  const std::size_t days = collection.days();
  const std::size_t n = collection.size();

  if (stages & kStageSpectral) {
    auto& lengths = c.welch_grid.segment_lengths;
    if (c.given("welch_segment_lengths")) {
      for (auto s : lengths) {
        require(s <= days, "welch_segment_lengths: " + std::to_string(s) + " exceeds series length " + std::to_string(days));
      }
    } else {
      lengths.erase(std::remove_if(lengths.begin(), lengths.end(), [days](std::size_t s) { return s > days; }),
                    lengths.end());
      require(!lengths.empty(), "no default Welch segment length fits a series of " + std::to_string(days) + " days");
    }
    if (c.spectral_params) {
      require(c.spectral_params->segment_length <= days, "spectral_segment_length exceeds series length");
    }
  }

  if (stages & kStageEvolve) {
    require(c.rolling_window <= days, "rolling_window exceeds series length");
    require(c.psd_window_length <= days, "psd_window_length exceeds series length");
  }

  if (stages & kStageClustering) {
    if (!c.given("cluster_count")) c.cluster_count = std::min(c.cluster_count, n);
    require(c.cluster_count <= n, "cluster_count exceeds the number of stations");
  }

  if (stages & kStageSpatial) {
    if (!c.given("kmeans_k_max")) c.kmeans_k_max = std::min(c.kmeans_k_max, n);
    require(c.kmeans_k_max <= n, "kmeans_k_max exceeds the number of stations");
    require(c.kmeans_k_max >= c.kmeans_k_min + 2, "k range must contain at least 3 values for " + std::to_string(n) +
                                                       " stations");
  }
}

}  // namespace streamgov
