#include <doctest.h>

#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "helpers.hpp"
#include "streamgov/cli.hpp"
#include "streamgov/config.hpp"
#include "streamgov/error.hpp"
#include "streamgov/io.hpp"

using namespace streamgov;
namespace fs = std::filesystem;

namespace {

int run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "streamgov");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  return cli::run(static_cast<int>(argv.size()), argv.data());
}

void write_file(const fs::path& p, const std::string& text) {
  fs::create_directories(p.parent_path());
  std::ofstream(p) << text;
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) out[fs::relative(e.path(), dir).string()] = io::read_text_file(e.path());
  }
  return out;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::vector<std::vector<std::string>> rows;
  std::ifstream in(p);
  for (std::string line; std::getline(in, line);) rows.push_back(io::split_csv_line(line));
  return rows;
}

}  // namespace

TEST_CASE("parse_config defaults") {
  auto c = parse_config("");
  CHECK(c.out == "out");
  CHECK(c.linkage == temporal::Linkage::Average);
  CHECK(c.welch_grid.segment_lengths == spectral::WelchGrid::defaults().segment_lengths);
  CHECK_FALSE(c.spectral_params.has_value());
  CHECK(c.alignment.max_iters == 50);
  CHECK(c.alignment.tol == 1e-8);
  CHECK(c.alignment.mode == alignment::LossMode::Normalized);
  CHECK(c.rolling_window == 365);
  CHECK(c.rolling_stride == 7);
  CHECK(c.kmeans_k_min == 1);
  CHECK(c.kmeans_k_max == 10);
  CHECK_FALSE(c.threads.has_value());
}

TEST_CASE("parse_config reads every kind of value") {
  auto c = parse_config(
      "# comment line\n"
      "data = some/dir   # trailing comment\n"
      "threads = 3\n"
      "start_date = 1990-01-01\n"
      "end_date = 1999-12-31\n"
      "gap_policy = linear\n"
      "linkage = complete\n"
      "welch_segment_lengths = 64, 128\n"
      "welch_overlaps = 0, 0.5\n"
      "spectral_segment_length = 128\n"
      "spectral_overlap = 0.25\n"
      "align_loss = raw\n"
      "align_max_iters = 9\n"
      "kmeans_k_max = 6\n"
      "synth_template = two_block\n"
      "synth_stations = 3\n"
      "synth_offsets = 0, 4, 9\n");
  CHECK(c.data == "some/dir");
  CHECK(c.threads == 3u);
  CHECK(format_iso_date(*c.ingest.start_date) == "1990-01-01");
  CHECK(c.ingest.gap_policy == ingest::GapPolicy::Linear);
  CHECK(c.linkage == temporal::Linkage::Complete);
  CHECK(c.welch_grid.segment_lengths == std::vector<std::size_t>{64, 128});
  CHECK(c.welch_grid.overlaps == std::vector<double>{0.0, 0.5});
  REQUIRE(c.spectral_params.has_value());
  CHECK(*c.spectral_params == spectral::WelchParams{128, 0.25});
  CHECK(c.alignment.mode == alignment::LossMode::Raw);
  CHECK(c.alignment.max_iters == 9);
  CHECK(c.synth.shape == synth::Template::TwoBlock);
  CHECK(c.synth.offsets == std::vector<std::size_t>{0, 4, 9});
  CHECK(c.given("kmeans_k_max"));
  CHECK_FALSE(c.given("kmeans_k_min"));
}

TEST_CASE("parse_config rejects bad input") {
  CHECK_THROWS_AS(parse_config("nonsense_key = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("threads = 1\nthreads = 2\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("just a line\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("threads = -1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("align_tol = abc\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("start_date = 2020-13-01\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("start_date = 2000-01-02\nend_date = 2000-01-01\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("linkage = ward\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("welch_overlaps = 0.99\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("kmeans_k_min = 3\nkmeans_k_max = 4\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("synth_stations = 3\nsynth_offsets = 0, 400, 2\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("synth_stations = 3\nsynth_offsets = 0, 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("psd_window_length = 100\npsd_segment_length = 200\n"), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/streamgov.conf"), ConfigError);
}

TEST_CASE("resolve_against narrows defaults but not explicit values") {
  auto c = testutil::make_collection(std::vector<std::vector<double>>(4, std::vector<double>(2000, 1.0)));
  auto cfg = parse_config("");
  resolve_against(cfg, c);
  CHECK(cfg.welch_grid.segment_lengths == std::vector<std::size_t>{250, 750, 1250, 1875});
  CHECK(cfg.kmeans_k_max == 4);
  CHECK(cfg.cluster_count == 4);

  auto explicit_cfg = parse_config("welch_segment_lengths = 250, 2500\n");
  CHECK_THROWS_AS(resolve_against(explicit_cfg, c), ConfigError);
  auto k_cfg = parse_config("kmeans_k_max = 8\n");
  CHECK_THROWS_AS(resolve_against(k_cfg, c), ConfigError);
  auto window_cfg = parse_config("rolling_window = 3000\n");
  CHECK_THROWS_AS(resolve_against(window_cfg, c), ConfigError);
}

TEST_CASE("cli argument handling") {
  CHECK(run_cli({"--version"}) == cli::kExitOk);
  CHECK(run_cli({}) == cli::kExitConfig);
  CHECK(run_cli({"temporal"}) == cli::kExitConfig);
  CHECK(run_cli({"frobnicate", "--config", "x"}) == cli::kExitConfig);
  CHECK(run_cli({"temporal", "--config", "/nonexistent/streamgov.conf"}) == cli::kExitConfig);

  testutil::TempDir tmp("cli_args");
  write_file(tmp.path() / "bad.conf", "data = missing_dir\n");
  CHECK(run_cli({"temporal", "--config", (tmp.path() / "bad.conf").string()}) == cli::kExitData);
  write_file(tmp.path() / "typo.conf", "dta = x\n");
  CHECK(run_cli({"temporal", "--config", (tmp.path() / "typo.conf").string()}) == cli::kExitConfig);
}

TEST_CASE("temporal on a three-station toy directory") {
  testutil::TempDir tmp("cli_toy");
  auto c = testutil::make_collection({{1, 2, 3, 4, 5, 6}, {6, 5, 4, 3, 2, 1}, {1, 1, 1, 1, 1, 2}});
  ingest::write_collection(c, tmp.path() / "data");
  write_file(tmp.path() / "run.conf", "data = data\nout = results\n");
  REQUIRE(run_cli({"temporal", "--config", (tmp.path() / "run.conf").string()}) == cli::kExitOk);
  auto rows = read_csv(tmp.path() / "results" / "temporal_affinity.csv");
  REQUIRE(rows.size() == 4);
  CHECK(rows[0] == std::vector<std::string>{"S00", "S01", "S02"});
  for (std::size_t i = 1; i <= 3; ++i) {
    REQUIRE(rows[i].size() == 3);
    CHECK(std::stod(rows[i][i - 1]) == 1.0);
    CHECK(rows[i][0] == rows[1][i - 1]);
  }
  auto sidecar = nlohmann::json::parse(io::read_text_file(tmp.path() / "results" / "temporal_affinity.json"));
  CHECK(sidecar["domain"] == "temporal");
  CHECK(sidecar["nu"].get<double>() >= 0.0);
  auto manifest = nlohmann::json::parse(io::read_text_file(tmp.path() / "results" / "manifest.json"));
  CHECK(manifest["subcommand"] == "temporal");
  CHECK(manifest.contains("config_hash"));
  CHECK(manifest.contains("versions"));
  CHECK(manifest.contains("started_at"));
  CHECK(manifest.contains("wall_time_s"));
}

TEST_CASE("synth then align recovers the planted offsets") {
  testutil::TempDir tmp("cli_align");
  write_file(tmp.path() / "run.conf",
             "data = syn\nout = out\nsynth_stations = 12\nsynth_days = 2000\nsynth_noise_std = 0.01\nsynth_seed = 4\n");
  const auto conf = (tmp.path() / "run.conf").string();
  REQUIRE(run_cli({"synth", "--config", conf, "--out", (tmp.path() / "syn").string()}) == cli::kExitOk);
  REQUIRE(run_cli({"align", "--config", conf}) == cli::kExitOk);
  auto truth = nlohmann::json::parse(io::read_text_file(tmp.path() / "syn" / "truth.json"));
  auto planted = truth["offsets"].get<std::vector<std::size_t>>();
  auto rows = read_csv(tmp.path() / "out" / "offsets.csv");
  REQUIRE(rows.size() == planted.size() + 1);
  for (std::size_t i = 0; i < planted.size(); ++i) CHECK(std::stoul(rows[i + 1][1]) == planted[i]);
  CHECK(fs::exists(tmp.path() / "out" / "governing.csv"));
  CHECK(fs::exists(tmp.path() / "out" / "offsets_by_state.csv"));
  CHECK(fs::exists(tmp.path() / "out" / "loss_history.csv"));
}

TEST_CASE("all writes every documented artefact and leaves the input untouched") {
  testutil::TempDir tmp("cli_all");
  write_file(tmp.path() / "run.conf",
             "data = syn\nsynth_stations = 9\nsynth_days = 1600\nsynth_noise_std = 0.02\n"
             "welch_segment_lengths = 250, 730\nwelch_overlaps = 0, 0.5\nkmeans_k_max = 5\n"
             "psd_window_length = 730\n");
  const auto conf = (tmp.path() / "run.conf").string();
  REQUIRE(run_cli({"synth", "--config", conf, "--out", (tmp.path() / "syn").string()}) == cli::kExitOk);
  const auto before = snapshot(tmp.path() / "syn");
  const auto out = tmp.path() / "all";
  REQUIRE(run_cli({"all", "--config", conf, "--out", out.string(), "--threads", "2"}) == cli::kExitOk);
  CHECK(snapshot(tmp.path() / "syn") == before);
  for (const char* f : {"ingest_summary.json", "temporal_affinity.csv", "temporal_affinity.json", "temporal_linkage.csv",
                        "temporal_clusters.csv", "welch_optimization.json", "spectral_affinity.csv", "spectral_affinity.json",
                        "spectral_linkage.csv", "spectral_clusters.csv", "governing.csv", "offsets.csv",
                        "offsets_by_state.csv", "loss_history.csv", "lambda1.csv", "eigvec1.csv", "aligned_lambda1.csv",
                        "aligned_eigvec1.csv", "coeff_variance.json", "spectrogram.csv", "geo_distances.csv", "elbow.csv",
                        "clusters.csv", "cluster_distances.csv", "manifest.json"}) {
    CHECK_MESSAGE(fs::exists(out / f), f);
  }
  CHECK(fs::exists(out / "spectra" / "SYN0001.csv"));
  auto manifest = nlohmann::json::parse(io::read_text_file(out / "manifest.json"));
  auto outputs = manifest["outputs"].get<std::vector<std::string>>();
  CHECK(std::is_sorted(outputs.begin(), outputs.end()));
  CHECK(std::find(outputs.begin(), outputs.end(), "offsets.csv") != outputs.end());
  auto welch = nlohmann::json::parse(io::read_text_file(out / "welch_optimization.json"));
  CHECK(welch["grid"].size() == 4);
}
