#include "streamgov/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <string>

#include "streamgov/io.hpp"
#include "streamgov/parallel.hpp"

namespace streamgov::ingest {
namespace fs = std::filesystem;

namespace {

struct RawSeries {
  Date first_date{};
  std::vector<double> values;  // NaN marks a gap
};

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    pos = end + 1;
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  return lines;
}

bool parse_double(std::string_view text, double& out) {
  while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
  while (!text.empty() && text.back() == ' ') text.remove_suffix(1);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, out);
  return !text.empty() && ec == std::errc{} && ptr == end;
}

std::string where(const std::string& id, std::size_t line) {
  return "station '" + id + "', line " + std::to_string(line);
}

std::vector<StationMeta> read_metadata(const fs::path& file) {
  const auto text = io::read_text_file(file);
  const auto lines = split_lines(text);
  if (lines.empty()) throw DataError(file.string() + ": empty metadata table");

  const auto header = io::split_csv_line(lines[0]);
  auto column = [&](std::string_view name) {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw DataError(file.string() + ": missing column '" + std::string(name) + "'");
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t c_id = column("station_id"), c_name = column("name"), c_lat = column("latitude"),
                    c_lon = column("longitude"), c_state = column("state");

  std::vector<StationMeta> out;
  for (std::size_t ln = 1; ln < lines.size(); ++ln) {
    if (lines[ln].empty()) continue;
    const auto f = io::split_csv_line(lines[ln]);
    const auto ctx = file.string() + ", line " + std::to_string(ln + 1);
    if (f.size() != header.size()) throw DataError(ctx + ": expected " + std::to_string(header.size()) + " fields");
    StationMeta m;
    m.station_id = f[c_id];
    m.name = f[c_name];
    if (m.station_id.empty()) throw DataError(ctx + ": empty station_id");
    if (!parse_double(f[c_lat], m.latitude) || m.latitude < -90.0 || m.latitude > 90.0) {
      throw DataError(ctx + ": invalid latitude '" + f[c_lat] + "'");
    }
    if (!parse_double(f[c_lon], m.longitude) || m.longitude < -180.0 || m.longitude > 180.0) {
      throw DataError(ctx + ": invalid longitude '" + f[c_lon] + "'");
    }
    auto state = parse_state(f[c_state]);
    if (!state) throw DataError(ctx + ": unknown state '" + f[c_state] + "'");
    m.state = *state;
    out.push_back(std::move(m));
  }
  return out;
}

RawSeries read_flow_file(const fs::path& file, const std::string& id) {
  const auto text = io::read_text_file(file);
  const auto lines = split_lines(text);
  if (lines.empty()) throw DataError("station '" + id + "': empty flow file");
  const auto header = io::split_csv_line(lines[0]);
  if (header.size() != 2 || header[0] != "date" || header[1] != "flow") {
    throw DataError(where(id, 1) + ": expected header 'date,flow'");
  }

  RawSeries raw;
  raw.values.reserve(lines.size() - 1);
  for (std::size_t ln = 1; ln < lines.size(); ++ln) {
    const auto f = io::split_csv_line(lines[ln]);
    if (f.size() != 2) throw DataError(where(id, ln + 1) + ": expected 2 fields");
    const auto date = parse_iso_date(f[0]);
    if (!date) throw DataError(where(id, ln + 1) + ": invalid date '" + f[0] + "'");
    if (ln == 1) {
      raw.first_date = *date;
    } else if (*date != raw.first_date + std::chrono::days{static_cast<long>(ln - 1)}) {
      throw DataError(where(id, ln + 1) + ": dates must be consecutive days");
    }
    double v = 0.0;
    if (f[1] == "NA") {
      v = std::numeric_limits<double>::quiet_NaN();
    } else if (!parse_double(f[1], v) || !std::isfinite(v)) {
      throw DataError(where(id, ln + 1) + ": non-numeric flow value '" + f[1] + "'");
    } else if (v < 0.0) {
      throw DataError(where(id, ln + 1) + ": negative flow value '" + f[1] + "'");
    }
    raw.values.push_back(v);
  }
  return raw;
}

}  // namespace

std::vector<double> fill_gaps(std::span<const double> raw, GapPolicy policy) {
  std::vector<double> out(raw.begin(), raw.end());
  std::size_t i = 0;
  while (i < out.size()) {
    if (!std::isnan(out[i])) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < out.size() && std::isnan(out[j])) ++j;
    const std::size_t len = j - i;
    if (policy == GapPolicy::Reject) throw GapError("gap of " + std::to_string(len) + " day(s)", i);
    if (i == 0 || j == out.size()) throw GapError("gap at series boundary", i);
    if (len > kMaxInterpolatedGap) {
      throw GapError("gap of " + std::to_string(len) + " days exceeds limit of " +
                         std::to_string(kMaxInterpolatedGap),
                     i);
    }
    const double left = out[i - 1];
    const double right = out[j];
    const double span = static_cast<double>(len + 1);
    for (std::size_t k = i; k < j; ++k) {
      const double frac = static_cast<double>(k - i + 1) / span;
      out[k] = left + (right - left) * frac;
    }
    i = j;
  }
  return out;
}

std::vector<double> detrend(std::span<const double> x) {
  if (x.empty()) return {};
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
  std::vector<double> out(x.size());
  std::transform(x.begin(), x.end(), out.begin(), [mean](double v) { return v - mean; });
  return out;
}

Collection load_collection(const fs::path& dir, const IngestConfig& config) {
  if (!fs::is_directory(dir)) throw DataError("'" + dir.string() + "' is not a directory");
  const auto metas = read_metadata(dir / kMetadataFile);

  std::map<std::string, StationMeta> by_id;
  for (const auto& m : metas) {
    if (!by_id.emplace(m.station_id, m).second) throw DataError("duplicate station id '" + m.station_id + "'");
  }

  const fs::path flow_dir = dir / kFlowDirectory;
  if (!fs::is_directory(flow_dir)) throw DataError("missing flow directory '" + flow_dir.string() + "'");
  std::map<std::string, fs::path> files;
  for (const auto& entry : fs::directory_iterator(flow_dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".csv") continue;
    const auto id = entry.path().stem().string();
    if (!by_id.contains(id)) throw DataError("flow file '" + entry.path().filename().string() + "' has no metadata");
    files.emplace(id, entry.path());
  }
  for (const auto& [id, meta] : by_id) {
    if (!files.contains(id)) throw DataError("station '" + id + "' has no flow file");
  }
  if (files.size() < 2) throw DataError("a collection needs at least 2 stations");

  // std::map iteration is ascending by id, which fixes the station order.
  std::vector<std::string> ids;
  for (const auto& [id, path] : files) ids.push_back(id);

  std::vector<RawSeries> raws(ids.size());
  parallel_for(ids.size(), [&](std::size_t i) { raws[i] = read_flow_file(files.at(ids[i]), ids[i]); });

  Date start = config.start_date.value_or(raws.front().first_date);
  Date end = config.end_date.value_or(raws.front().first_date +
                                      std::chrono::days{static_cast<long>(raws.front().values.size()) - 1});
  if (end < start) throw DataError("end date precedes start date");
  const auto days = static_cast<std::size_t>((end - start).count()) + 1;
  const bool explicit_range = config.start_date || config.end_date;

  std::vector<StationSeries> stations(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const auto& raw = raws[i];
    const Date raw_end = raw.first_date + std::chrono::days{static_cast<long>(raw.values.size()) - 1};
    const bool mismatch = explicit_range ? (raw.first_date > start || raw_end < end)
                                         : (raw.first_date != start || raw_end != end);
    if (mismatch) {
      throw DataError("station '" + ids[i] + "': covers " + format_iso_date(raw.first_date) + ".." +
                      format_iso_date(raw_end) + ", expected " + format_iso_date(start) + ".." +
                      format_iso_date(end));
    }
    const auto offset = static_cast<std::size_t>((start - raw.first_date).count());
    std::span<const double> window(raw.values.data() + offset, days);
    try {
      stations[i].flow = fill_gaps(window, config.gap_policy);
    } catch (const GapError& e) {
      throw DataError(where(ids[i], offset + e.index() + 2) + ": " + e.what());
    }
    stations[i].meta = by_id.at(ids[i]);
  }
  return Collection(std::move(stations), start);
}

void write_collection(const Collection& collection, const fs::path& dir) {
  std::string meta = "station_id,name,latitude,longitude,state\n";
  for (const auto& s : collection.stations()) {
    meta += io::csv_field(s.meta.station_id) + ',' + io::csv_field(s.meta.name) + ',' +
            io::format_double(s.meta.latitude) + ',' + io::format_double(s.meta.longitude) + ',' +
            std::string(to_string(s.meta.state)) + '\n';
  }
  io::write_text_file(dir / kMetadataFile, meta);

  fs::create_directories(dir / kFlowDirectory);
  for (const auto& s : collection.stations()) {
    std::string body = "date,flow\n";
    body.reserve(body.size() + s.flow.size() * 32);
    Date d = collection.start_date();
    for (double v : s.flow) {
      body += format_iso_date(d);
      body += ',';
      body += io::format_double(v);
      body += '\n';
      d += std::chrono::days{1};
    }
    io::write_text_file(dir / kFlowDirectory / (s.meta.station_id + ".csv"), body);
  }
}

}  // namespace streamgov::ingest
