#include "streamgov/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <exception>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fft.hpp"
#include "streamgov/alignment.hpp"
#include "streamgov/config.hpp"
#include "streamgov/error.hpp"
#include "streamgov/evolution.hpp"
#include "streamgov/ingest.hpp"
#include "streamgov/io.hpp"
#include "streamgov/parallel.hpp"
#include "streamgov/spatial.hpp"
#include "streamgov/spectral.hpp"
#include "streamgov/synth.hpp"
#include "streamgov/temporal.hpp"

#ifndef STREAMGOV_VERSION
#define STREAMGOV_VERSION "0.0.0"
#endif

namespace streamgov::cli {
namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

const std::vector<std::string> kSubcommands{"ingest-check", "temporal", "spectral", "optimize-welch", "align",
                                            "evolve",       "spatial",  "synth",    "all"};

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

void log(const std::string& message) { std::cerr << "streamgov: " << message << '\n'; }

/// Writes files under the output directory and remembers their relative paths.
class Outputs {
 public:
  explicit Outputs(fs::path root) : root_(std::move(root)) {}

  void text(const fs::path& relative, std::string_view content) {
    io::write_text_file(root_ / relative, content);
    written_.insert(relative.generic_string());
  }
  void json_file(const fs::path& relative, const json& value) { text(relative, value.dump(2) + "\n"); }
  void matrix(const fs::path& relative, std::span<const std::string> labels, const Matrix& m) {
    io::write_labeled_matrix(root_ / relative, labels, m);
    written_.insert(relative.generic_string());
  }
  [[nodiscard]] const std::set<std::string>& written() const { return written_; }
  [[nodiscard]] const fs::path& root() const { return root_; }

 private:
  fs::path root_;
  std::set<std::string> written_;
};

class Pipeline {
 public:
  Pipeline(RunConfig config, Outputs& out, unsigned stages)
      : config_(std::move(config)), out_(out), stages_(stages) {}

  void ingest_check() {
    const auto& c = collection();
    json summary;
    summary["stations"] = c.size();
    summary["days"] = c.days();
    summary["start_date"] = format_iso_date(c.start_date());
    summary["end_date"] = format_iso_date(c.end_date());
    summary["station_ids"] = c.station_ids();
    out_.json_file("ingest_summary.json", summary);
  }

  void temporal() {
    const auto& c = collection();
    const auto trajectories = temporal::normalize_l1(c);
    const auto affinity = temporal::to_affinity(temporal::temporal_distance(trajectories), temporal::Domain::Temporal);
    write_affinity("temporal", affinity);
  }

  const spectral::WelchOptimization& optimize_welch() {
    if (!optimization_) {
      optimization_ = spectral::optimize_welch_params(collection(), config_.welch_grid);
      json report;
      json grid = json::array();
      for (const auto& p : optimization_->grid) grid.push_back({{"S", p.segment_length}, {"omega", p.overlap}});
      report["grid"] = grid;
      report["deviance"] = optimization_->deviance;
      report["selected"] = {{"S", optimization_->selected.segment_length}, {"omega", optimization_->selected.overlap}};
      out_.json_file("welch_optimization.json", report);
    }
    return *optimization_;
  }

  void spectral() {
    const auto params = config_.spectral_params ? *config_.spectral_params : optimize_welch().selected;
    const auto& c = collection();
    const auto analysis = spectral::spectral_affinity(c, params);
    for (std::size_t i = 0; i < c.size(); ++i) {
      out_.text(fs::path("spectra") / (c[i].meta.station_id + ".csv"), spectrum_csv(analysis.spectra[i]));
    }
    write_affinity("spectral", analysis.affinity);
  }

  const alignment::GoverningProcess& align() {
    if (!process_) {
      const auto& c = collection();
      process_ = alignment::estimate_governing_process(c, config_.alignment);
      if (!process_->converged) log("alignment stopped at max_iters without converging");

      std::string g = "t,g\n";
      for (std::size_t t = 0; t < process_->g.size(); ++t) {
        g += std::to_string(t + 1) + ',' + io::format_double(process_->g[t]) + '\n';
      }
      out_.text("governing.csv", g);

      std::string offsets = "station_id,phi\n";
      for (std::size_t i = 0; i < c.size(); ++i) {
        offsets += io::csv_field(c[i].meta.station_id) + ',' + std::to_string(process_->offsets[i]) + '\n';
      }
      out_.text("offsets.csv", offsets);

      std::string states = "state,stations,nonzero_offsets,percent_nonzero,median_nonzero_offset\n";
      for (const auto& row : alignment::summarize_offsets(*process_, c).rows) {
        states += std::string(to_string(row.state)) + ',' + std::to_string(row.stations) + ',' +
                  std::to_string(row.nonzero) + ',' + io::format_double(row.percent_nonzero) + ',' +
                  (row.median_nonzero ? io::format_double(*row.median_nonzero) : std::string("n/a")) + '\n';
      }
      out_.text("offsets_by_state.csv", states);

      std::string loss = "iteration,loss\n";
      for (std::size_t k = 0; k < process_->loss_history.size(); ++k) {
        loss += std::to_string(k + 1) + ',' + io::format_double(process_->loss_history[k]) + '\n';
      }
      out_.text("loss_history.csv", loss);
    }
    return *process_;
  }

  void evolve() {
    const auto& c = collection();
    const auto initial = rolling(c, "");

    const auto& process = align_quiet();
    const auto view = evolution::aligned_view(c, process.offsets);
    if (view.days() < config_.rolling_window) {
      throw DataError("aligned collection (" + std::to_string(view.days()) + " days) is shorter than rolling_window");
    }
    const auto aligned = rolling(view, "aligned_");

    json variance;
    variance["initial"] = initial.coeff_variance;
    variance["aligned"] = aligned.coeff_variance;
    variance["rolling_window"] = config_.rolling_window;
    variance["rolling_stride"] = config_.rolling_stride;
    out_.json_file("coeff_variance.json", variance);

    const auto spectrogram = evolution::rolling_psd(process.g, config_.psd_window_length, config_.psd_window_stride,
                                                    config_.psd_params);
    std::string csv = "window_start,frequency,power\n";
    for (std::size_t k = 0; k < spectrogram.window_starts.size(); ++k) {
      const auto& s = spectrogram.spectra[k];
      const auto start = std::to_string(spectrogram.window_starts[k] + 1);
      for (std::size_t j = 0; j < s.values.size(); ++j) {
        csv += start + ',' + io::format_double(s.frequencies[j]) + ',' + io::format_double(s.values[j]) + '\n';
      }
    }
    out_.text("spectrogram.csv", csv);
  }

  void spatial() {
    const auto& c = collection();
    const auto points = spatial::station_points(c);
    const auto ids = c.station_ids();
    const auto geo = spatial::geodesic_distance_matrix(points);
    out_.matrix("geo_distances.csv", ids, geo);

    const auto elbow = spatial::elbow_select(points, config_.kmeans_k_min, config_.kmeans_k_max, config_.kmeans_seed,
                                             config_.kmeans_restarts);
    std::string curve = "k,inertia\n";
    for (std::size_t j = 0; j < elbow.ks.size(); ++j) {
      curve += std::to_string(elbow.ks[j]) + ',' + io::format_double(elbow.inertia[j]) + '\n';
    }
    out_.text("elbow.csv", curve);

    const auto& fit = elbow.fits[elbow.selected_k - config_.kmeans_k_min];
    std::string clusters = "station_id,label,lat,lon\n";
    for (std::size_t i = 0; i < c.size(); ++i) {
      clusters += io::csv_field(ids[i]) + ',' + std::to_string(fit.labels[i]) + ',' +
                  io::format_double(points[i].latitude) + ',' + io::format_double(points[i].longitude) + '\n';
    }
    out_.text("clusters.csv", clusters);

    const auto between = spatial::cluster_distances(geo, fit.labels, fit.k);
    std::string dist = "label_a,label_b,mean_km\n";
    for (Eigen::Index a = 0; a < between.rows(); ++a) {
      for (Eigen::Index b = a; b < between.cols(); ++b) {
        dist += std::to_string(a) + ',' + std::to_string(b) + ',' + io::format_double(between(a, b)) + '\n';
      }
    }
    out_.text("cluster_distances.csv", dist);
  }

  void synth() {
    auto spec = config_.synth;
    if (!config_.synth_offsets_given) {
      spec.offsets = synth::sample_offsets(spec.stations, config_.synth_zero_fraction, spec.seed);
    }
    const auto result = synth::generate(spec);
    synth::write_synthetic(spec, result, out_.root());
    extra_.push_back(std::string(ingest::kMetadataFile));
    extra_.push_back("truth.json");
    for (const auto& s : result.collection.stations()) {
      extra_.push_back((fs::path(ingest::kFlowDirectory) / (s.meta.station_id + ".csv")).generic_string());
    }
  }

  /// Files written by other code on the pipeline's behalf (the synthetic dataset).
  [[nodiscard]] const std::vector<std::string>& extra_outputs() const { return extra_; }

  void all() {
    ingest_check();
    temporal();
    optimize_welch();
    spectral();
    align();
    evolve();
    spatial();
  }

 private:
  const Collection& collection() {
    if (!collection_) {
      if (config_.data.empty()) throw ConfigError("'data' must name the collection directory");
      collection_.emplace(ingest::load_collection(config_.data, config_.ingest));
      resolve_against(config_, *collection_, stages_);
    }
    return *collection_;
  }

  const alignment::GoverningProcess& align_quiet() {
    if (!process_) process_ = alignment::estimate_governing_process(collection(), config_.alignment);
    return *process_;
  }

  evolution::RollingEigenSeries rolling(const Collection& c, const std::string& prefix) {
    const auto series = evolution::rolling_eigen_series(c, config_.rolling_window, config_.rolling_stride);
    if (series.degenerate_windows > 0) {
      log(std::to_string(series.degenerate_windows) + " " + (prefix.empty() ? "initial" : "aligned") +
          " window(s) contained a constant station; its correlations were set to 0");
    }
    std::string lambda = "t,lambda1_norm\n";
    for (std::size_t k = 0; k < series.times.size(); ++k) {
      lambda += std::to_string(series.times[k]) + ',' + io::format_double(series.lambda1_norm[k]) + '\n';
    }
    out_.text(prefix + "lambda1.csv", lambda);

    std::string vec = "t";
    for (const auto& id : c.station_ids()) vec += ',' + io::csv_field(id);
    vec += '\n';
    for (std::size_t k = 0; k < series.times.size(); ++k) {
      vec += std::to_string(series.times[k]);
      for (double v : series.eigvec1_abs[k]) vec += ',' + io::format_double(v);
      vec += '\n';
    }
    out_.text(prefix + "eigvec1.csv", vec);
    return series;
  }

  void write_affinity(const std::string& prefix, const temporal::AffinityMatrix& affinity) {
    const auto& c = collection();
    const auto ids = c.station_ids();
    out_.matrix(prefix + "_affinity.csv", ids, affinity.values);
    json sidecar;
    sidecar["domain"] = temporal::to_string(affinity.domain);
    sidecar["nu"] = affinity.norm;
    out_.json_file(prefix + "_affinity.json", sidecar);

    const auto dendrogram = temporal::hierarchical_cluster(affinity, config_.linkage);
    std::string linkage = "step,cluster_a,cluster_b,height,size\n";
    for (std::size_t s = 0; s < dendrogram.merges.size(); ++s) {
      const auto& m = dendrogram.merges[s];
      linkage += std::to_string(s + 1) + ',' + std::to_string(m.cluster_a) + ',' + std::to_string(m.cluster_b) + ',' +
                 io::format_double(m.height) + ',' + std::to_string(m.size) + '\n';
    }
    out_.text(prefix + "_linkage.csv", linkage);

    const auto labels = temporal::cut_dendrogram(dendrogram, config_.cluster_count);
    std::string clusters = "station_id,label\n";
    for (std::size_t i = 0; i < c.size(); ++i) clusters += io::csv_field(ids[i]) + ',' + std::to_string(labels[i]) + '\n';
    out_.text(prefix + "_clusters.csv", clusters);
  }

  static std::string spectrum_csv(const spectral::PowerSpectrum& s) {
    std::string csv = "frequency,power\n";
    for (std::size_t j = 0; j < s.values.size(); ++j) {
      csv += io::format_double(s.frequencies[j]) + ',' + io::format_double(s.values[j]) + '\n';
    }
    return csv;
  }

  RunConfig config_;
  Outputs& out_;
  unsigned stages_;
  std::optional<Collection> collection_;
  std::optional<spectral::WelchOptimization> optimization_;
  std::optional<alignment::GoverningProcess> process_;
  std::vector<std::string> extra_;
};

std::string utc_timestamp(std::chrono::system_clock::time_point tp) {
  const std::time_t t = std::chrono::system_clock::to_time_t(tp);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

unsigned stages_for(const std::string& subcommand) {
  if (subcommand == "temporal") return kStageClustering;
  if (subcommand == "spectral") return kStageClustering | kStageSpectral;
  if (subcommand == "optimize-welch") return kStageSpectral;
  if (subcommand == "evolve") return kStageEvolve;
  if (subcommand == "spatial") return kStageSpatial;
  if (subcommand == "all") return kStageAll;
  return 0;
}

int execute(const std::string& subcommand, const fs::path& config_path, const std::optional<fs::path>& out_override,
            const std::optional<std::size_t>& threads_override) {
  const auto started = std::chrono::system_clock::now();
  const auto steady_start = std::chrono::steady_clock::now();

  RunConfig config = load_config(config_path);
  if (out_override) config.out = *out_override;
  const auto threads = threads_override ? threads_override : config.threads;
  set_thread_count(threads.value_or(0));

  // Relative data/out paths in the file resolve against the config file's directory.
  const fs::path base = config_path.has_parent_path() ? config_path.parent_path() : fs::path(".");
  if (!config.data.empty() && config.data.is_relative()) config.data = base / config.data;
  if (!out_override && config.out.is_relative()) config.out = base / config.out;

  if (!config.data.empty() && subcommand != "synth") {
    std::error_code ec;
    if (fs::exists(config.out, ec) && fs::equivalent(config.out, config.data, ec)) {
      throw ConfigError("output directory must differ from the data directory");
    }
  }

  fs::create_directories(config.out);
  Outputs out(config.out);
  const std::string config_hash = hex64(fnv1a(config.source_text));
  Pipeline pipeline(std::move(config), out, stages_for(subcommand));

  if (subcommand == "ingest-check") {
    pipeline.ingest_check();
  } else if (subcommand == "temporal") {
    pipeline.temporal();
  } else if (subcommand == "spectral") {
    pipeline.spectral();
  } else if (subcommand == "optimize-welch") {
    pipeline.optimize_welch();
  } else if (subcommand == "align") {
    pipeline.align();
  } else if (subcommand == "evolve") {
    pipeline.evolve();
  } else if (subcommand == "spatial") {
    pipeline.spatial();
  } else if (subcommand == "synth") {
    pipeline.synth();
  } else {
    pipeline.all();
  }

  std::vector<std::string> outputs(out.written().begin(), out.written().end());
  for (const auto& f : pipeline.extra_outputs()) outputs.push_back(f);
  std::sort(outputs.begin(), outputs.end());

  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - steady_start).count();
  json manifest;
  manifest["subcommand"] = subcommand;
  manifest["config_hash"] = "fnv1a64:" + config_hash;
  manifest["versions"] = {{"streamgov", STREAMGOV_VERSION},
                          {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                                        "." + std::to_string(EIGEN_MINOR_VERSION)},
                          {"fftw", detail::fft_library_version()}};
  manifest["outputs"] = outputs;
  manifest["started_at"] = utc_timestamp(started);
  manifest["wall_time_s"] = wall;
  out.json_file("manifest.json", manifest);
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{"streamgov: temporal, spectral, alignment, evolution and spatial analysis of daily streamflow"};
  app.set_version_flag("--version", std::string("streamgov ") + STREAMGOV_VERSION);
  app.require_subcommand(1, 1);

  std::string config_path;
  std::string out_dir;
  std::size_t threads = 0;
  const std::map<std::string, std::string> help{
      {"ingest-check", "load and validate the collection"},
      {"temporal", "trajectory affinity matrix and hierarchical clustering"},
      {"spectral", "Welch spectra and spectral affinity matrix"},
      {"optimize-welch", "Whittle-deviance grid search for Welch parameters"},
      {"align", "governing process and per-station offsets"},
      {"evolve", "rolling correlation eigen diagnostics and rolling PSD"},
      {"spatial", "geodesic distances and K-means with elbow selection"},
      {"synth", "write a synthetic collection with known offsets"},
      {"all", "run the full pipeline"},
  };
  for (const auto& name : kSubcommands) {
    auto* sub = app.add_subcommand(name, help.at(name));
    sub->add_option("--config", config_path, "key = value configuration file")->required();
    sub->add_option("--out", out_dir, "output directory (overrides 'out' in the config)");
    sub->add_option("--threads", threads, "worker threads, 0 = all available");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  std::string subcommand;
  for (const auto* sub : app.get_subcommands()) subcommand = sub->get_name();

  std::optional<fs::path> out_override;
  if (!out_dir.empty()) out_override = out_dir;
  std::optional<std::size_t> threads_override;
  for (const auto* sub : app.get_subcommands()) {
    if (sub->count("--threads") > 0) threads_override = threads;
  }

  try {
    return execute(subcommand, config_path, out_override, threads_override);
  } catch (const ConfigError& e) {
    log("configuration error: " + std::string(e.what()));
    return kExitConfig;
  } catch (const DataError& e) {
    log("data error: " + std::string(e.what()));
    return kExitData;
  } catch (const std::exception& e) {
    log("internal error: " + std::string(e.what()));
    return kExitInternal;
  }
}

}  // namespace streamgov::cli
