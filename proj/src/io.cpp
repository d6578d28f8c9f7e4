#include "qme/io.hpp"

#include <json.hpp>

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace qme {

using ordered_json = nlohmann::ordered_json;

namespace {

ordered_json complex_to_json(const Cplx& z) {
  return ordered_json::array({z.real(), z.imag()});
}

Cplx complex_from_json(const ordered_json& j) {
  if (!j.is_array() || j.size() != 2)
    throw std::runtime_error("expected a [re, im] pair");
  return {j[0].get<double>(), j[1].get<double>()};
}

ordered_json mat_to_json(const Mat& m) {
  ordered_json rows = ordered_json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    ordered_json row = ordered_json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(complex_to_json(m(i, j)));
    rows.push_back(std::move(row));
  }
  return rows;
}

Mat mat_from_json(const ordered_json& j, Index rows, Index cols, const char* what) {
  if (!j.is_array() || static_cast<Index>(j.size()) != rows)
    throw std::runtime_error(std::string(what) + ": row count mismatch");
  Mat m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    const auto& row = j[i];
    if (!row.is_array() || static_cast<Index>(row.size()) != cols)
      throw std::runtime_error(std::string(what) + ": column count mismatch");
    for (Index c = 0; c < cols; ++c) m(i, c) = complex_from_json(row[c]);
  }
  return m;
}

ordered_json trajectories_to_json(const std::vector<Trajectory>& trajs) {
  ordered_json out = ordered_json::array();
  for (const Trajectory& traj : trajs) {
    ordered_json states = ordered_json::array();
    for (const Mat& s : traj) states.push_back(mat_to_json(s));
    out.push_back(std::move(states));
  }
  return out;
}

std::vector<Trajectory> trajectories_from_json(const ordered_json& j, Index d, Index T,
                                               const char* what) {
  std::vector<Trajectory> out;
  if (!j.is_array()) throw std::runtime_error(std::string(what) + ": not an array");
  for (const auto& states : j) {
    if (!states.is_array() || static_cast<Index>(states.size()) != T)
      throw std::runtime_error(std::string(what) + ": trajectory length mismatch");
    Trajectory traj;
    traj.reserve(T);
    for (const auto& s : states) traj.push_back(mat_from_json(s, d, d, what));
    out.push_back(std::move(traj));
  }
  return out;
}

ordered_json model_spec_to_json(const ModelSpec& spec, std::uint64_t seed) {
  ordered_json j;
  j["kind"] = spec.kind;
  j["seed"] = seed;
  j["d"] = spec.d;
  j["d_env"] = spec.d_env;
  j["a_unit"] = spec.a_unit;
  j["a_diss"] = spec.a_diss;
  ordered_json jc;
  jc["gamma"] = spec.jc.gamma;
  jc["g"] = spec.jc.g;
  jc["alpha"] = complex_to_json(spec.jc.alpha);
  jc["n_levels"] = spec.jc.n_levels;
  j["jc"] = std::move(jc);
  ordered_json sb;
  sb["gamma"] = spec.sb.gamma;
  sb["g"] = spec.sb.g;
  sb["delta"] = spec.sb.delta;
  sb["omega0"] = spec.sb.omega0;
  sb["n_levels"] = spec.sb.n_levels;
  j["sb"] = std::move(sb);
  return j;
}

ModelSpec model_spec_from_json(const ordered_json& j, std::uint64_t& seed) {
  ModelSpec spec;
  spec.kind = j.at("kind").get<std::string>();
  seed = j.at("seed").get<std::uint64_t>();
  spec.d = j.at("d").get<Index>();
  spec.d_env = j.at("d_env").get<Index>();
  spec.a_unit = j.at("a_unit").get<double>();
  spec.a_diss = j.at("a_diss").get<double>();
  const auto& jc = j.at("jc");
  spec.jc.gamma = jc.at("gamma").get<double>();
  spec.jc.g = jc.at("g").get<double>();
  spec.jc.alpha = complex_from_json(jc.at("alpha"));
  spec.jc.n_levels = jc.at("n_levels").get<Index>();
  const auto& sb = j.at("sb");
  spec.sb.gamma = sb.at("gamma").get<double>();
  spec.sb.g = sb.at("g").get<double>();
  spec.sb.delta = sb.at("delta").get<double>();
  spec.sb.omega0 = sb.at("omega0").get<double>();
  spec.sb.n_levels = sb.at("n_levels").get<Index>();
  return spec;
}

ordered_json parse_file(const std::string& path, const char* expected_format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  ordered_json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw std::runtime_error("'" + path + "' is not valid JSON: " + e.what());
  }
  if (j.value("format", "") != expected_format)
    throw std::runtime_error("'" + path + "' is not a " + expected_format + " file");
  return j;
}

}  // namespace

void write_text_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
    out << content;
    if (!out) throw std::runtime_error("write failed for '" + tmp.string() + "'");
  }
  fs::rename(tmp, target);
}

void save_dataset(const std::string& path, const TrajectoryDataset& ds,
                  const std::string& clean_reference,
                  const std::vector<Trajectory>* clean_twin) {
  if (ds.trajectories.empty()) throw std::invalid_argument("save_dataset: no trajectories");
  const Index T = static_cast<Index>(ds.trajectories[0].size());
  ordered_json j;
  j["format"] = "qmembed.dataset";
  j["format_version"] = kDatasetFormatVersion;
  j["model"] = model_spec_to_json(ds.model, ds.seed);
  j["d"] = ds.d;
  j["tau"] = ds.tau;
  j["L"] = static_cast<Index>(ds.trajectories.size());
  j["T"] = T;
  j["noise_sigma"] = ds.noise_sigma;
  if (!clean_reference.empty()) j["clean_reference"] = clean_reference;
  if (clean_twin) {
    if (clean_twin->size() != ds.trajectories.size())
      throw std::invalid_argument("save_dataset: clean twin shape mismatch");
    j["clean_trajectories"] = trajectories_to_json(*clean_twin);
  }
  j["trajectories"] = trajectories_to_json(ds.trajectories);
  write_text_atomic(path, j.dump(1) + "\n");
}

DatasetFile load_dataset(const std::string& path) {
  const ordered_json j = parse_file(path, "qmembed.dataset");
  if (j.at("format_version").get<int>() != kDatasetFormatVersion)
    throw std::runtime_error("'" + path + "': unsupported dataset format version");
  DatasetFile out;
  out.data.model = model_spec_from_json(j.at("model"), out.data.seed);
  out.data.d = j.at("d").get<Index>();
  out.data.tau = j.at("tau").get<double>();
  out.data.noise_sigma = j.at("noise_sigma").get<double>();
  const Index L = j.at("L").get<Index>();
  const Index T = j.at("T").get<Index>();
  out.data.trajectories =
      trajectories_from_json(j.at("trajectories"), out.data.d, T, "trajectories");
  if (static_cast<Index>(out.data.trajectories.size()) != L)
    throw std::runtime_error("'" + path + "': declared L does not match the data");
  if (j.contains("clean_reference"))
    out.clean_reference = j.at("clean_reference").get<std::string>();
  if (j.contains("clean_trajectories")) {
    out.clean_trajectories = trajectories_from_json(j.at("clean_trajectories"), out.data.d,
                                                    T, "clean_trajectories");
    if (out.clean_trajectories.size() != out.data.trajectories.size())
      throw std::runtime_error("'" + path + "': clean twin shape mismatch");
  }
  return out;
}

void save_model(const std::string& path, const EmbeddingModel& model,
                const TrainingInfo* training) {
  ordered_json j;
  j["format"] = "qmembed.model";
  j["format_version"] = kModelFormatVersion;
  j["r"] = model.r;
  j["K"] = model.K;
  j["d"] = model.d;
  ordered_json eigs = ordered_json::array();
  for (Index i = 0; i < model.eigenvalues.size(); ++i)
    eigs.push_back(complex_to_json(model.eigenvalues(i)));
  j["eigenvalues"] = std::move(eigs);
  j["decoder"] = mat_to_json(model.decoder);
  j["encoder"] = mat_to_json(model.encoder);
  ordered_json svals = ordered_json::array();
  for (Index i = 0; i < model.singular_values.size(); ++i)
    svals.push_back(model.singular_values(i));
  j["singular_values"] = std::move(svals);
  ordered_json thr;
  thr["sigma"] = model.threshold.sigma;
  thr["floor"] = model.threshold.floor;
  j["threshold"] = std::move(thr);
  j["project"] = model.project;
  if (training) {
    ordered_json t;
    t["path"] = training->path;
    t["fingerprint"] = training->fingerprint;
    t["model"] = model_spec_to_json(training->model, training->seed);
    t["tau"] = training->tau;
    t["noise_sigma"] = training->noise_sigma;
    t["L"] = training->L;
    t["T"] = training->T;
    j["training"] = std::move(t);
  }
  write_text_atomic(path, j.dump(1) + "\n");
}

ModelRecord load_model(const std::string& path) {
  const ordered_json j = parse_file(path, "qmembed.model");
  if (j.at("format_version").get<int>() != kModelFormatVersion)
    throw std::runtime_error("'" + path + "': unsupported model format version");
  ModelRecord out;
  EmbeddingModel& m = out.model;
  m.r = j.at("r").get<Index>();
  m.K = j.at("K").get<Index>();
  m.d = j.at("d").get<Index>();
  if (m.r < 1 || m.K < 1 || m.d < 2)
    throw std::runtime_error("'" + path + "': invalid model dimensions");
  const Index width = m.K * m.d * m.d;
  const auto& eigs = j.at("eigenvalues");
  if (static_cast<Index>(eigs.size()) != m.r)
    throw std::runtime_error("'" + path + "': eigenvalue count differs from r");
  m.eigenvalues.resize(m.r);
  for (Index i = 0; i < m.r; ++i) m.eigenvalues(i) = complex_from_json(eigs[i]);
  for (Index i = 1; i < m.r; ++i)
    if (std::abs(m.eigenvalues(i)) > std::abs(m.eigenvalues(i - 1)) + 1e-12)
      throw std::runtime_error("'" + path + "': eigenvalues not sorted by modulus");
  m.decoder = mat_from_json(j.at("decoder"), width, m.r, "decoder");
  m.encoder = mat_from_json(j.at("encoder"), m.r, width, "encoder");
  const auto& svals = j.at("singular_values");
  m.singular_values.resize(static_cast<Index>(svals.size()));
  for (Index i = 0; i < m.singular_values.size(); ++i)
    m.singular_values(i) = svals[i].get<double>();
  m.threshold.sigma = j.at("threshold").at("sigma").get<double>();
  m.threshold.floor = j.at("threshold").at("floor").get<double>();
  m.project = j.at("project").get<bool>();

  const double identity_dev =
      (m.encoder * m.decoder - Mat::Identity(m.r, m.r)).cwiseAbs().maxCoeff();
  if (identity_dev > 1e-8)
    throw std::runtime_error("'" + path + "': encoder*decoder deviates from identity by " +
                             std::to_string(identity_dev));

  if (j.contains("training")) {
    const auto& t = j.at("training");
    out.has_training = true;
    out.training.path = t.at("path").get<std::string>();
    out.training.fingerprint = t.at("fingerprint").get<std::string>();
    out.training.model = model_spec_from_json(t.at("model"), out.training.seed);
    out.training.tau = t.at("tau").get<double>();
    out.training.noise_sigma = t.at("noise_sigma").get<double>();
    out.training.L = t.at("L").get<Index>();
    out.training.T = t.at("T").get<Index>();
  }
  return out;
}

std::string file_fingerprint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::uint64_t hash = 14695981039346656037ull;
  char buf[1 << 16];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    const std::streamsize got = in.gcount();
    for (std::streamsize i = 0; i < got; ++i) {
      hash ^= static_cast<unsigned char>(buf[i]);
      hash *= 1099511628211ull;
    }
    if (got < static_cast<std::streamsize>(sizeof(buf))) break;
  }
  char out[32];
  std::snprintf(out, sizeof(out), "fnv1a64:%016llx", static_cast<unsigned long long>(hash));
  return out;
}

std::string csv_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

namespace {

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
  std::ostringstream out;
  for (size_t i = 0; i < header.size(); ++i)
    out << (i ? "," : "") << csv_escape(header[i]);
  out << "\n";
  for (const auto& row : rows) {
    if (row.size() != header.size())
      throw std::invalid_argument("write_csv: row width differs from header");
    for (size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << csv_escape(row[i]);
    out << "\n";
  }
  write_text_atomic(path, out.str());
}

void write_finite_env_csv(const std::string& path, const FiniteEnvSweep& sweep) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& c : sweep.cells)
    rows.push_back({std::to_string(c.d_env), csv_num(c.sigma), std::to_string(c.T),
                    std::to_string(c.seed), std::to_string(c.r),
                    std::to_string(c.d_env_eff), std::to_string(c.natural),
                    csv_num(c.spectrum_max), csv_num(c.spectrum_mean),
                    std::to_string(c.unmatched_ref), csv_num(c.d_pred_clean),
                    csv_num(c.runtime_s), c.error.empty() ? "ok" : c.error});
  write_csv(path,
            {"d_env", "sigma", "T", "seed", "r", "d_env_eff", "natural_rank",
             "spectrum_max", "spectrum_mean", "unmatched_ref", "d_pred_clean", "runtime_s",
             "status"},
            rows);
}

void write_memory_depth_csv(const std::string& path, const MemoryDepthSweep& sweep) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& c : sweep.cells)
    rows.push_back({std::to_string(c.K), csv_num(c.sigma), std::to_string(c.seed),
                    std::to_string(c.r), csv_num(c.d_pred_clean), csv_num(c.d_pred_noisy),
                    csv_num(c.runtime_s), c.error.empty() ? "ok" : c.error});
  write_csv(path,
            {"K", "sigma", "seed", "r", "d_pred_clean", "d_pred_noisy", "runtime_s",
             "status"},
            rows);
}

void write_spin_boson_csv(const std::string& path, const SpinBosonSweep& sweep) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& c : sweep.cells)
    rows.push_back({csv_num(c.gamma), std::to_string(c.K), std::to_string(c.seed),
                    std::to_string(c.r), csv_num(c.d_pred_clean), csv_num(c.runtime_s),
                    c.error.empty() ? "ok" : c.error});
  write_csv(path, {"gamma", "K", "seed", "r", "d_pred_clean", "runtime_s", "status"}, rows);
}

}  // namespace qme
