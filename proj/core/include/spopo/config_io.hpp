#pragma once

// Configuration files, tabular and binary outputs, and run manifests.
// Configs are JSON with strict key checking: an unrecognized key anywhere
// is an error naming its dotted path. All text output uses C-locale
// formatting with '.' as the decimal separator.

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "spopo/comb.hpp"
#include "spopo/ensemble.hpp"
#include "spopo/field_profile.hpp"

namespace spopo {

struct PumpConfig {
  std::string kind = "monochromatic";  // monochromatic | gaussian | sech2 | file
  double width = 1.0;
  std::string file;  // CSV amplitudes for kind == "file"
};

struct MismatchConfig {
  std::string kind = "perfect";  // perfect | quadratic | file
  double u = 0.0;
  double v = 0.0;
  double w = 0.0;
  std::string file;  // CSV matrix for kind == "file"
};

struct ModelConfig {
  int n_side = 0;
  OpoParams params;
  PumpConfig pump;
  MismatchConfig mismatch;
};

struct SpectrumCmdConfig {
  std::string quadrature = "dark_y";  // dark_y | dark_x | supermode_y | supermode_x
  int supermode_index = 0;
  double omega_max = -1.0;  // < 0 selects 10 * gamma
  int n_omega = 201;
};

struct MonteCarloCmdConfig {
  int n_trajectories = 10000;
  double t_max = -1.0;       // < 0 selects 5 / gamma
  double dt = -1.0;          // < 0 selects 1e-3 / gamma
  int save_stride = 10;
  std::uint64_t seed = 12345;
  std::string stepper = "euler_maruyama";  // euler_maruyama | midpoint
  std::string noise = "reduced";           // reduced | verbatim
  bool analyze_phase = true;
  double fit_t_min = -1.0;   // < 0 selects 1 / gamma
  bool analyze_homodyne = false;
  double transient = -1.0;   // < 0 selects 5 / gamma
  double window_time = -1.0; // < 0 selects 8 / gamma
  int corr_decimate = 1;
  double omega_max = -1.0;   // < 0 selects 10 * gamma
  int n_omega = 21;
  bool dump_trajectories = true;
};

struct SweepCmdConfig {
  std::vector<double> sigmas;
};

struct FieldCmdConfig {
  std::string geometry = "ring";  // ring | fabry_perot
  double theta = 0.0;
  // Sample axes; axes left empty in the config get defaults at parse time
  // (16 radii up to 3 waists, 32 azimuths, z = 0, t = 0).
  FieldGrid grid;
  FieldScales scales;
};

struct RunConfig {
  ModelConfig model;
  SpectrumCmdConfig spectrum;
  MonteCarloCmdConfig montecarlo;
  SweepCmdConfig sweep;
  FieldCmdConfig field;
  std::string snapshot;  // normalized JSON echo for the manifest
};

// Parses and validates. Unknown keys, wrong types, missing required keys
// and out-of-range values all throw std::invalid_argument with the key
// path in the message.
RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::string& path);

// Instantiates the comb model (loads pump or mismatch CSV files when the
// config references them; relative paths resolve against base_dir).
CombModel build_model(const ModelConfig& config,
                      const std::string& base_dir = ".");

// Shortest round-trip decimal formatting, always C locale.
std::string format_double(double value);

// Writes content to a temporary file in the target directory and renames
// it into place.
void write_text_file_atomic(const std::string& path,
                            const std::string& content);

// RFC 4180 style CSV with one header row. Cells that are not plain
// numbers are quoted as needed.
void write_csv(const std::string& path,
               const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);
std::vector<std::string> numeric_row(const std::vector<double>& values);

// Reads every numeric cell of a CSV file (no header expected).
// read_csv_matrix requires a rectangular layout.
std::vector<double> read_csv_values(const std::string& path);
Eigen::MatrixXd read_csv_matrix(const std::string& path);

// FNV-1a 64-bit over the file bytes, as a 16-digit hex string. Used to
// mark outputs for reproducibility comparisons (not a cryptographic
// integrity check).
std::string fnv1a64_file_hex(const std::string& path);

// Writes <out_dir>/manifest.json describing a finished run: tool name and
// version, subcommand, seed, threads, wall time, the config snapshot and
// one {file, bytes, fnv1a64} entry per output (paths relative to out_dir).
void write_manifest(const std::string& out_dir, const std::string& subcommand,
                    const std::string& config_snapshot, std::uint64_t seed,
                    int threads, double wall_seconds,
                    const std::vector<std::string>& output_files);

// Fixed-record binary trajectory dump. Layout (little endian):
//   magic "SPPT", u32 version = 1, u32 n_components (= 4M),
//   u64 n_trajectories, u64 n_saves, u32 save_stride, u32 reserved,
//   f64 dt, f64 t0, u64 seed,
// then per trajectory: u32 valid_saves, u32 reserved, and n_saves * 4M
// complex values as (re, im) f64 pairs in state layout order. Columns past
// valid_saves are zero.
class TrajectoryDumpWriter {
 public:
  TrajectoryDumpWriter(const std::string& path, int n_components,
                       int n_trajectories, int n_saves, int save_stride,
                       double dt, double t0, std::uint64_t seed);
  ~TrajectoryDumpWriter();
  TrajectoryDumpWriter(const TrajectoryDumpWriter&) = delete;
  TrajectoryDumpWriter& operator=(const TrajectoryDumpWriter&) = delete;

  // Thread-safe; records are placed by trajectory index, so write order
  // does not affect the file content.
  void write_record(const TrajectoryRecord& record);
  void close();

 private:
  struct Impl;
  Impl* impl_ = nullptr;
};

struct TrajectoryDump {
  int n_components = 0;
  int save_stride = 0;
  double dt = 0.0;
  double t0 = 0.0;
  std::uint64_t seed = 0;
  std::vector<int> valid_saves;            // per trajectory
  std::vector<Eigen::MatrixXcd> states;    // per trajectory, 4M x n_saves
};

TrajectoryDump read_trajectory_dump(const std::string& path);

// Flattens a dump to CSV rows (trajectory, save, t, component, re, im).
void export_trajectory_csv(const std::string& dump_path,
                           const std::string& csv_path);

}  // namespace spopo
