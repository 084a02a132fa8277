#include "spopo/config_io.hpp"

#include <json.hpp>

#include <array>
#include <charconv>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <stdexcept>

namespace fs = std::filesystem;
using nlohmann::json;

namespace spopo {

namespace {

constexpr double kPi = 3.14159265358979323846;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw std::invalid_argument("config key " + path + ": " + what);
}

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

void check_keys(const json& obj, const std::string& path,
                std::initializer_list<const char*> allowed) {
  for (const auto& item : obj.items()) {
    bool known = false;
    for (const char* key : allowed) {
      if (item.key() == key) {
        known = true;
        break;
      }
    }
    if (!known) {
      throw std::invalid_argument("unknown configuration key " +
                                  join(path, item.key()));
    }
  }
}

double get_number(const json& obj, const std::string& path,
                  const std::string& key, double fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number()) fail(join(path, key), "expected a number");
  return v.get<double>();
}

int get_integer(const json& obj, const std::string& path,
                const std::string& key, int fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number_integer()) fail(join(path, key), "expected an integer");
  return v.get<int>();
}

std::uint64_t get_seed(const json& obj, const std::string& path,
                       const std::string& key, std::uint64_t fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number_integer() ||
      (v.is_number_integer() && !v.is_number_unsigned() &&
       v.get<std::int64_t>() < 0)) {
    fail(join(path, key), "expected a nonnegative integer");
  }
  return v.get<std::uint64_t>();
}

bool get_flag(const json& obj, const std::string& path, const std::string& key,
              bool fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_boolean()) fail(join(path, key), "expected a boolean");
  return v.get<bool>();
}

std::string get_text(const json& obj, const std::string& path,
                     const std::string& key, const std::string& fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_string()) fail(join(path, key), "expected a string");
  return v.get<std::string>();
}

Eigen::VectorXd get_axis(const json& obj, const std::string& path,
                         const std::string& key) {
  if (!obj.contains(key)) return Eigen::VectorXd();
  const json& v = obj.at(key);
  if (!v.is_array()) fail(join(path, key), "expected an array of numbers");
  Eigen::VectorXd out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) {
      fail(join(path, key), "expected an array of numbers");
    }
    out[static_cast<Eigen::Index>(i)] = v[i].get<double>();
  }
  return out;
}

void expect_one_of(const std::string& value, const std::string& path,
                   std::initializer_list<const char*> allowed) {
  for (const char* candidate : allowed) {
    if (value == candidate) return;
  }
  std::string list;
  for (const char* candidate : allowed) {
    if (!list.empty()) list += ", ";
    list += candidate;
  }
  fail(path, "\"" + value + "\" is not one of: " + list);
}

void parse_model(const json& obj, ModelConfig& out) {
  check_keys(obj, "model",
             {"n_side", "gamma", "kappa", "sigma", "pump", "mismatch"});
  out.n_side = get_integer(obj, "model", "n_side", 0);
  if (out.n_side < 0) fail("model.n_side", "must be nonnegative");
  out.params.gamma = get_number(obj, "model", "gamma", 1.0);
  out.params.kappa = get_number(obj, "model", "kappa", 1.0);
  out.params.sigma = get_number(obj, "model", "sigma", 0.0);
  if (!(out.params.gamma > 0.0) || !std::isfinite(out.params.gamma)) {
    fail("model.gamma", "must be a positive finite number");
  }
  if (!(out.params.kappa >= 0.0) || !std::isfinite(out.params.kappa)) {
    fail("model.kappa", "must be a nonnegative finite number");
  }
  if (!(out.params.sigma >= 0.0) || !std::isfinite(out.params.sigma)) {
    fail("model.sigma", "must be a nonnegative finite number");
  }

  if (obj.contains("pump")) {
    const json& pump = obj.at("pump");
    if (!pump.is_object()) fail("model.pump", "expected an object");
    check_keys(pump, "model.pump", {"kind", "width", "file"});
    out.pump.kind = get_text(pump, "model.pump", "kind", "monochromatic");
    expect_one_of(out.pump.kind, "model.pump.kind",
                  {"monochromatic", "gaussian", "sech2", "file"});
    out.pump.width = get_number(pump, "model.pump", "width", 1.0);
    out.pump.file = get_text(pump, "model.pump", "file", "");
    if ((out.pump.kind == "gaussian" || out.pump.kind == "sech2") &&
        !(out.pump.width > 0.0)) {
      fail("model.pump.width", "must be positive");
    }
    if (out.pump.kind == "file" && out.pump.file.empty()) {
      fail("model.pump.file", "required when kind is \"file\"");
    }
  }

  if (obj.contains("mismatch")) {
    const json& mm = obj.at("mismatch");
    if (!mm.is_object()) fail("model.mismatch", "expected an object");
    check_keys(mm, "model.mismatch", {"kind", "u", "v", "w", "file"});
    out.mismatch.kind = get_text(mm, "model.mismatch", "kind", "perfect");
    expect_one_of(out.mismatch.kind, "model.mismatch.kind",
                  {"perfect", "quadratic", "file"});
    out.mismatch.u = get_number(mm, "model.mismatch", "u", 0.0);
    out.mismatch.v = get_number(mm, "model.mismatch", "v", 0.0);
    out.mismatch.w = get_number(mm, "model.mismatch", "w", 0.0);
    out.mismatch.file = get_text(mm, "model.mismatch", "file", "");
    if (out.mismatch.kind == "file" && out.mismatch.file.empty()) {
      fail("model.mismatch.file", "required when kind is \"file\"");
    }
  }
}

void parse_spectrum(const json& obj, SpectrumCmdConfig& out) {
  check_keys(obj, "spectrum",
             {"quadrature", "supermode_index", "omega_max", "n_omega"});
  out.quadrature = get_text(obj, "spectrum", "quadrature", "dark_y");
  expect_one_of(out.quadrature, "spectrum.quadrature",
                {"dark_y", "dark_x", "supermode_y", "supermode_x"});
  out.supermode_index = get_integer(obj, "spectrum", "supermode_index", 0);
  if (out.supermode_index < 0) {
    fail("spectrum.supermode_index", "must be nonnegative");
  }
  out.omega_max = get_number(obj, "spectrum", "omega_max", -1.0);
  out.n_omega = get_integer(obj, "spectrum", "n_omega", 201);
  if (out.n_omega < 1) fail("spectrum.n_omega", "must be at least 1");
}

void parse_montecarlo(const json& obj, MonteCarloCmdConfig& out) {
  check_keys(obj, "montecarlo",
             {"n_trajectories", "t_max", "dt", "save_stride", "seed",
              "stepper", "noise", "analyze_phase", "fit_t_min",
              "analyze_homodyne", "transient", "window_time", "corr_decimate",
              "omega_max", "n_omega", "dump_trajectories"});
  out.n_trajectories =
      get_integer(obj, "montecarlo", "n_trajectories", 10000);
  if (out.n_trajectories < 1) {
    fail("montecarlo.n_trajectories", "must be at least 1");
  }
  out.t_max = get_number(obj, "montecarlo", "t_max", -1.0);
  out.dt = get_number(obj, "montecarlo", "dt", -1.0);
  out.save_stride = get_integer(obj, "montecarlo", "save_stride", 10);
  if (out.save_stride < 1) fail("montecarlo.save_stride", "must be at least 1");
  out.seed = get_seed(obj, "montecarlo", "seed", 12345);
  out.stepper = get_text(obj, "montecarlo", "stepper", "euler_maruyama");
  expect_one_of(out.stepper, "montecarlo.stepper",
                {"euler_maruyama", "midpoint"});
  out.noise = get_text(obj, "montecarlo", "noise", "reduced");
  expect_one_of(out.noise, "montecarlo.noise", {"reduced", "verbatim"});
  out.analyze_phase = get_flag(obj, "montecarlo", "analyze_phase", true);
  out.fit_t_min = get_number(obj, "montecarlo", "fit_t_min", -1.0);
  out.analyze_homodyne =
      get_flag(obj, "montecarlo", "analyze_homodyne", false);
  out.transient = get_number(obj, "montecarlo", "transient", -1.0);
  out.window_time = get_number(obj, "montecarlo", "window_time", -1.0);
  out.corr_decimate = get_integer(obj, "montecarlo", "corr_decimate", 1);
  if (out.corr_decimate < 1) {
    fail("montecarlo.corr_decimate", "must be at least 1");
  }
  out.omega_max = get_number(obj, "montecarlo", "omega_max", -1.0);
  out.n_omega = get_integer(obj, "montecarlo", "n_omega", 21);
  if (out.n_omega < 1) fail("montecarlo.n_omega", "must be at least 1");
  out.dump_trajectories =
      get_flag(obj, "montecarlo", "dump_trajectories", true);
}

void parse_sweep(const json& obj, SweepCmdConfig& out) {
  check_keys(obj, "sweep", {"sigmas"});
  if (!obj.contains("sigmas")) return;
  const json& sigmas = obj.at("sigmas");
  if (!sigmas.is_array()) fail("sweep.sigmas", "expected an array of numbers");
  for (const json& v : sigmas) {
    if (!v.is_number()) fail("sweep.sigmas", "expected an array of numbers");
    const double sigma = v.get<double>();
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
      fail("sweep.sigmas", "entries must be nonnegative finite numbers");
    }
    out.sigmas.push_back(sigma);
  }
}

void parse_field(const json& obj, FieldCmdConfig& out) {
  check_keys(obj, "field", {"geometry", "theta", "grid", "scales"});
  out.geometry = get_text(obj, "field", "geometry", "ring");
  expect_one_of(out.geometry, "field.geometry", {"ring", "fabry_perot"});
  out.theta = get_number(obj, "field", "theta", 0.0);

  if (obj.contains("scales")) {
    const json& scales = obj.at("scales");
    if (!scales.is_object()) fail("field.scales", "expected an object");
    check_keys(scales, "field.scales",
               {"waist", "omega0", "comb_spacing", "k0", "dk",
                "cavity_length"});
    out.scales.waist = get_number(scales, "field.scales", "waist", 1.0);
    out.scales.omega0 = get_number(scales, "field.scales", "omega0", 1.0);
    out.scales.comb_spacing =
        get_number(scales, "field.scales", "comb_spacing", 0.05);
    out.scales.k0 = get_number(scales, "field.scales", "k0", 1.0);
    out.scales.dk = get_number(scales, "field.scales", "dk", 0.05);
    out.scales.cavity_length = get_number(scales, "field.scales",
                                          "cavity_length",
                                          2.0 * kPi / 0.05);
    if (!(out.scales.waist > 0.0)) fail("field.scales.waist", "must be positive");
  }

  if (obj.contains("grid")) {
    const json& grid = obj.at("grid");
    if (!grid.is_object()) fail("field.grid", "expected an object");
    check_keys(grid, "field.grid", {"r", "phi", "z", "t"});
    out.grid.r = get_axis(grid, "field.grid", "r");
    out.grid.phi = get_axis(grid, "field.grid", "phi");
    out.grid.z = get_axis(grid, "field.grid", "z");
    out.grid.t = get_axis(grid, "field.grid", "t");
  }

  // Unset axes get display-friendly defaults.
  if (out.grid.r.size() == 0) {
    out.grid.r.resize(16);
    for (int i = 0; i < 16; ++i) {
      out.grid.r[i] = 3.0 * out.scales.waist * (i + 1) / 16.0;
    }
  }
  if (out.grid.phi.size() == 0) {
    out.grid.phi.resize(32);
    for (int i = 0; i < 32; ++i) out.grid.phi[i] = 2.0 * kPi * i / 32.0;
  }
  if (out.grid.z.size() == 0) out.grid.z = Eigen::VectorXd::Zero(1);
  if (out.grid.t.size() == 0) out.grid.t = Eigen::VectorXd::Zero(1);
}

}  // namespace

RunConfig parse_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config is not valid JSON: ") +
                                e.what());
  }
  if (!root.is_object()) {
    throw std::invalid_argument("config root must be a JSON object");
  }
  check_keys(root, "", {"model", "spectrum", "montecarlo", "sweep", "field"});
  if (!root.contains("model")) {
    throw std::invalid_argument("config key model: required");
  }
  if (!root.at("model").is_object()) {
    throw std::invalid_argument("config key model: expected an object");
  }

  RunConfig cfg;
  parse_model(root.at("model"), cfg.model);
  if (root.contains("spectrum")) {
    if (!root.at("spectrum").is_object()) {
      throw std::invalid_argument("config key spectrum: expected an object");
    }
    parse_spectrum(root.at("spectrum"), cfg.spectrum);
  }
  if (root.contains("montecarlo")) {
    if (!root.at("montecarlo").is_object()) {
      throw std::invalid_argument("config key montecarlo: expected an object");
    }
    parse_montecarlo(root.at("montecarlo"), cfg.montecarlo);
  }
  if (root.contains("sweep")) {
    if (!root.at("sweep").is_object()) {
      throw std::invalid_argument("config key sweep: expected an object");
    }
    parse_sweep(root.at("sweep"), cfg.sweep);
  }
  {
    // Field defaults (grid axes) apply even without a field section.
    json field = root.contains("field") ? root.at("field") : json::object();
    if (!field.is_object()) {
      throw std::invalid_argument("config key field: expected an object");
    }
    parse_field(field, cfg.field);
  }
  cfg.snapshot = root.dump();
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open config file: " + path);
  }
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

CombModel build_model(const ModelConfig& config, const std::string& base_dir) {
  const auto resolve = [&](const std::string& file) {
    const fs::path p(file);
    return p.is_absolute() ? p.string() : (fs::path(base_dir) / p).string();
  };

  PumpSpectrum pump;
  if (config.pump.kind == "file") {
    const std::vector<double> values =
        read_csv_values(resolve(config.pump.file));
    pump = build_pump_spectrum(
        config.n_side,
        Eigen::Map<const Eigen::VectorXd>(values.data(), values.size()));
  } else if (config.pump.kind == "monochromatic") {
    pump = build_pump_spectrum(config.n_side, PumpKind::monochromatic);
  } else if (config.pump.kind == "gaussian") {
    pump = build_pump_spectrum(config.n_side, PumpKind::gaussian,
                               config.pump.width);
  } else {
    pump = build_pump_spectrum(config.n_side, PumpKind::sech2,
                               config.pump.width);
  }

  Eigen::MatrixXd mismatch;
  if (config.mismatch.kind == "file") {
    mismatch = build_mismatch(config.n_side,
                              read_csv_matrix(resolve(config.mismatch.file)));
  } else if (config.mismatch.kind == "perfect") {
    mismatch = build_mismatch(config.n_side, MismatchKind::perfect);
  } else {
    mismatch =
        build_mismatch(config.n_side, MismatchKind::quadratic,
                       config.mismatch.u, config.mismatch.v,
                       config.mismatch.w);
  }
  return make_comb_model(pump, mismatch);
}

std::string format_double(double value) {
  std::array<char, 64> buf;
  const auto result =
      std::to_chars(buf.data(), buf.data() + buf.size(), value);
  if (result.ec != std::errc()) {
    throw std::runtime_error("number formatting failed");
  }
  return std::string(buf.data(), result.ptr);
}

void write_text_file_atomic(const std::string& path,
                            const std::string& content) {
  const fs::path target(path);
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw std::runtime_error("cannot open for writing: " + tmp.string());
    }
    out << content;
    out.flush();
    if (!out.good()) {
      throw std::runtime_error("write failed: " + tmp.string());
    }
  }
  fs::rename(tmp, target);
}

namespace {

std::string escape_cell(const std::string& cell) {
  if (cell.find_first_of(",\"\n") == std::string::npos) return cell;
  std::string out = "\"";
  for (char c : cell) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace

void write_csv(const std::string& path,
               const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
  std::string text;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i > 0) text += ',';
    text += escape_cell(header[i]);
  }
  text += '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i > 0) text += ',';
      text += escape_cell(row[i]);
    }
    text += '\n';
  }
  write_text_file_atomic(path, text);
}

std::vector<std::string> numeric_row(const std::vector<double>& values) {
  std::vector<std::string> out;
  out.reserve(values.size());
  for (double v : values) out.push_back(format_double(v));
  return out;
}

namespace {

bool parse_cell(const std::string& raw, double& value) {
  std::size_t begin = 0;
  std::size_t end = raw.size();
  while (begin < end && std::isspace(static_cast<unsigned char>(raw[begin]))) {
    ++begin;
  }
  while (end > begin &&
         std::isspace(static_cast<unsigned char>(raw[end - 1]))) {
    --end;
  }
  if (begin == end) return false;
  const char* first = raw.data() + begin;
  const char* last = raw.data() + end;
  const auto result = std::from_chars(first, last, value);
  return result.ec == std::errc() && result.ptr == last;
}

std::vector<std::vector<double>> read_csv_rows(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open CSV file: " + path);
  }
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      double value = 0.0;
      if (parse_cell(cell, value)) row.push_back(value);
    }
    if (!row.empty()) rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

std::vector<double> read_csv_values(const std::string& path) {
  std::vector<double> out;
  for (const auto& row : read_csv_rows(path)) {
    out.insert(out.end(), row.begin(), row.end());
  }
  return out;
}

Eigen::MatrixXd read_csv_matrix(const std::string& path) {
  const std::vector<std::vector<double>> rows = read_csv_rows(path);
  if (rows.empty()) {
    throw std::runtime_error("CSV file holds no numeric rows: " + path);
  }
  const std::size_t n_cols = rows.front().size();
  for (const auto& row : rows) {
    if (row.size() != n_cols) {
      throw std::runtime_error("CSV rows are not rectangular: " + path);
    }
  }
  Eigen::MatrixXd m(rows.size(), n_cols);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < n_cols; ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          rows[i][j];
    }
  }
  return m;
}

std::string fnv1a64_file_hex(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open file for hashing: " + path);
  }
  std::uint64_t hash = 14695981039346656037ULL;
  std::array<char, 65536> buf;
  while (in) {
    in.read(buf.data(), buf.size());
    const std::streamsize got = in.gcount();
    for (std::streamsize i = 0; i < got; ++i) {
      hash ^= static_cast<unsigned char>(buf[i]);
      hash *= 1099511628211ULL;
    }
  }
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << hash;
  return out.str();
}

void write_manifest(const std::string& out_dir, const std::string& subcommand,
                    const std::string& config_snapshot, std::uint64_t seed,
                    int threads, double wall_seconds,
                    const std::vector<std::string>& output_files) {
  json manifest;
  manifest["tool"] = "spopo";
  manifest["version"] = "0.1.0";
  manifest["command"] = subcommand;
  manifest["seed"] = seed;
  manifest["threads"] = threads;
  manifest["wall_seconds"] = wall_seconds;
  try {
    manifest["config"] = json::parse(config_snapshot);
  } catch (const json::parse_error&) {
    manifest["config"] = config_snapshot;
  }
  json outputs = json::array();
  for (const std::string& file : output_files) {
    const fs::path path = fs::path(out_dir) / file;
    json entry;
    entry["path"] = file;
    entry["bytes"] = static_cast<std::uint64_t>(fs::file_size(path));
    entry["fnv1a64"] = fnv1a64_file_hex(path.string());
    outputs.push_back(entry);
  }
  manifest["outputs"] = outputs;
  write_text_file_atomic((fs::path(out_dir) / "manifest.json").string(),
                         manifest.dump(2) + "\n");
}

namespace {

void write_u32(std::ostream& out, std::uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}
void write_u64(std::ostream& out, std::uint64_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}
void write_f64(std::ostream& out, double v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}
std::uint32_t read_u32(std::istream& in) {
  std::uint32_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  return v;
}
std::uint64_t read_u64(std::istream& in) {
  std::uint64_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  return v;
}
double read_f64(std::istream& in) {
  double v = 0.0;
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  return v;
}

constexpr std::streamoff kDumpHeaderBytes = 60;

}  // namespace

struct TrajectoryDumpWriter::Impl {
  std::fstream file;
  std::mutex mutex;
  int n_components = 0;
  int n_trajectories = 0;
  int n_saves = 0;
  std::streamoff record_bytes = 0;
  bool closed = false;
};

TrajectoryDumpWriter::TrajectoryDumpWriter(const std::string& path,
                                           int n_components,
                                           int n_trajectories, int n_saves,
                                           int save_stride, double dt,
                                           double t0, std::uint64_t seed)
    : impl_(new Impl) {
  if (n_components <= 0 || n_trajectories <= 0 || n_saves <= 0) {
    delete impl_;
    impl_ = nullptr;
    throw std::invalid_argument("dump dimensions must be positive");
  }
  impl_->n_components = n_components;
  impl_->n_trajectories = n_trajectories;
  impl_->n_saves = n_saves;
  impl_->record_bytes =
      8 + static_cast<std::streamoff>(n_saves) * n_components * 16;
  impl_->file.open(path, std::ios::binary | std::ios::in | std::ios::out |
                             std::ios::trunc);
  if (!impl_->file) {
    delete impl_;
    impl_ = nullptr;
    throw std::runtime_error("cannot open trajectory dump: " + path);
  }
  impl_->file.write("SPPT", 4);
  write_u32(impl_->file, 1u);
  write_u32(impl_->file, static_cast<std::uint32_t>(n_components));
  write_u64(impl_->file, static_cast<std::uint64_t>(n_trajectories));
  write_u64(impl_->file, static_cast<std::uint64_t>(n_saves));
  write_u32(impl_->file, static_cast<std::uint32_t>(save_stride));
  write_u32(impl_->file, 0u);
  write_f64(impl_->file, dt);
  write_f64(impl_->file, t0);
  write_u64(impl_->file, seed);
  // Pre-extend to the final size so unwritten records read back as zeros.
  impl_->file.seekp(kDumpHeaderBytes +
                    impl_->record_bytes * n_trajectories - 1);
  impl_->file.put('\0');
  impl_->file.flush();
}

TrajectoryDumpWriter::~TrajectoryDumpWriter() {
  try {
    close();
  } catch (...) {
    // destructor must not throw
  }
  delete impl_;
}

void TrajectoryDumpWriter::write_record(const TrajectoryRecord& record) {
  if (!impl_ || impl_->closed) {
    throw std::logic_error("trajectory dump is closed");
  }
  if (record.trajectory_index < 0 ||
      record.trajectory_index >= impl_->n_trajectories ||
      record.states == nullptr ||
      record.states->rows() != impl_->n_components ||
      record.states->cols() != impl_->n_saves) {
    throw std::invalid_argument("trajectory record does not fit the dump");
  }
  const int valid =
      std::min(std::max(record.valid_saves, 0), impl_->n_saves);
  std::vector<double> buf(
      static_cast<std::size_t>(impl_->n_saves) * impl_->n_components * 2,
      0.0);
  for (int s = 0; s < valid; ++s) {
    for (int c = 0; c < impl_->n_components; ++c) {
      const std::complex<double> v = (*record.states)(c, s);
      const std::size_t base =
          2 * (static_cast<std::size_t>(s) * impl_->n_components + c);
      buf[base] = v.real();
      buf[base + 1] = v.imag();
    }
  }
  std::lock_guard<std::mutex> lock(impl_->mutex);
  impl_->file.seekp(kDumpHeaderBytes +
                    impl_->record_bytes * record.trajectory_index);
  write_u32(impl_->file, static_cast<std::uint32_t>(valid));
  write_u32(impl_->file, 0u);
  impl_->file.write(reinterpret_cast<const char*>(buf.data()),
                    static_cast<std::streamsize>(buf.size() *
                                                 sizeof(double)));
  if (!impl_->file.good()) {
    throw std::runtime_error("trajectory dump write failed");
  }
}

void TrajectoryDumpWriter::close() {
  if (!impl_ || impl_->closed) return;
  impl_->file.flush();
  if (!impl_->file.good()) {
    throw std::runtime_error("trajectory dump flush failed");
  }
  impl_->file.close();
  impl_->closed = true;
}

TrajectoryDump read_trajectory_dump(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open trajectory dump: " + path);
  }
  char magic[4] = {};
  in.read(magic, 4);
  if (std::string(magic, 4) != "SPPT") {
    throw std::runtime_error("not a trajectory dump: " + path);
  }
  const std::uint32_t version = read_u32(in);
  if (version != 1u) {
    throw std::runtime_error("unsupported trajectory dump version");
  }
  TrajectoryDump dump;
  dump.n_components = static_cast<int>(read_u32(in));
  const std::uint64_t n_traj = read_u64(in);
  const std::uint64_t n_saves = read_u64(in);
  dump.save_stride = static_cast<int>(read_u32(in));
  read_u32(in);  // reserved
  dump.dt = read_f64(in);
  dump.t0 = read_f64(in);
  dump.seed = read_u64(in);
  if (!in.good()) {
    throw std::runtime_error("trajectory dump header is truncated");
  }
  dump.valid_saves.resize(n_traj);
  dump.states.reserve(n_traj);
  for (std::uint64_t i = 0; i < n_traj; ++i) {
    dump.valid_saves[i] = static_cast<int>(read_u32(in));
    read_u32(in);  // reserved
    Eigen::MatrixXcd m(dump.n_components,
                       static_cast<Eigen::Index>(n_saves));
    in.read(reinterpret_cast<char*>(m.data()),
            static_cast<std::streamsize>(sizeof(std::complex<double>) *
                                         m.size()));
    if (!in.good()) {
      throw std::runtime_error("trajectory dump record is truncated");
    }
    dump.states.push_back(std::move(m));
  }
  return dump;
}

void export_trajectory_csv(const std::string& dump_path,
                           const std::string& csv_path) {
  const TrajectoryDump dump = read_trajectory_dump(dump_path);
  std::vector<std::vector<std::string>> rows;
  for (std::size_t i = 0; i < dump.states.size(); ++i) {
    for (int s = 0; s < dump.valid_saves[i]; ++s) {
      const double t = dump.t0 + static_cast<double>(s) * dump.save_stride *
                                     dump.dt;
      for (int c = 0; c < dump.n_components; ++c) {
        const std::complex<double> v = dump.states[i](c, s);
        rows.push_back({std::to_string(i), std::to_string(s),
                        format_double(t), std::to_string(c),
                        format_double(v.real()), format_double(v.imag())});
      }
    }
  }
  write_csv(csv_path, {"trajectory", "save", "t", "component", "re", "im"},
            rows);
}

}  // namespace spopo
