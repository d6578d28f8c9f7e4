#pragma once

#include "qme/analysis.hpp"
#include "qme/embedding.hpp"
#include "qme/models.hpp"

#include <string>
#include <vector>

namespace qme {

inline constexpr int kDatasetFormatVersion = 1;
inline constexpr int kModelFormatVersion = 1;

// On-disk dataset: trajectories plus generation metadata. A noisy file may
// point at its clean twin by path (clean_reference) or embed the clean
// trajectories inline (used for held-out test files, which ship as one file).
struct DatasetFile {
  TrajectoryDataset data;
  std::string clean_reference;
  std::vector<Trajectory> clean_trajectories;
};

void save_dataset(const std::string& path, const TrajectoryDataset& ds,
                  const std::string& clean_reference = {},
                  const std::vector<Trajectory>* clean_twin = nullptr);
DatasetFile load_dataset(const std::string& path);

// Provenance block stored inside a model file so `spectrum` and reports can
// rebuild the exact generator without the dataset file at hand.
struct TrainingInfo {
  std::string path;
  std::string fingerprint;
  ModelSpec model;
  std::uint64_t seed = 0;
  double tau = 0.0;
  double noise_sigma = 0.0;
  Index L = 0;
  Index T = 0;
};

struct ModelRecord {
  EmbeddingModel model;
  bool has_training = false;
  TrainingInfo training;
};

void save_model(const std::string& path, const EmbeddingModel& model,
                const TrainingInfo* training = nullptr);
// Validates shapes, eigenvalue ordering and E*D = identity within 1e-8.
ModelRecord load_model(const std::string& path);

// "fnv1a64:" + 16 hex digits over the raw file bytes.
std::string file_fingerprint(const std::string& path);

// Write-then-rename; interrupted runs never leave a partial file behind.
void write_text_atomic(const std::string& path, const std::string& content);

std::string csv_num(double v);
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

void write_finite_env_csv(const std::string& path, const FiniteEnvSweep& sweep);
void write_memory_depth_csv(const std::string& path, const MemoryDepthSweep& sweep);
void write_spin_boson_csv(const std::string& path, const SpinBosonSweep& sweep);

}  // namespace qme
