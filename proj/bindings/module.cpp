#include "qme/analysis.hpp"
#include "qme/embedding.hpp"
#include "qme/io.hpp"
#include "qme/models.hpp"
#include "qme/qcore.hpp"

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>

namespace py = pybind11;
using namespace qme;

PYBIND11_MODULE(_core, m) {
  m.doc() = "Data-driven Markovian embeddings of non-Markovian quantum dynamics";

  py::register_exception<NoSignalError>(m, "NoSignalError", PyExc_RuntimeError);
  py::register_exception<DegenerateSpectrumError>(m, "DegenerateSpectrumError",
                                                  PyExc_RuntimeError);
  py::register_exception<DegenerateStationaryError>(m, "DegenerateStationaryError",
                                                    PyExc_RuntimeError);

  py::class_<JcConfig>(m, "JcConfig")
      .def(py::init<>())
      .def_readwrite("gamma", &JcConfig::gamma)
      .def_readwrite("g", &JcConfig::g)
      .def_readwrite("alpha", &JcConfig::alpha)
      .def_readwrite("n_levels", &JcConfig::n_levels);

  py::class_<SpinBosonConfig>(m, "SpinBosonConfig")
      .def(py::init<>())
      .def_readwrite("gamma", &SpinBosonConfig::gamma)
      .def_readwrite("g", &SpinBosonConfig::g)
      .def_readwrite("delta", &SpinBosonConfig::delta)
      .def_readwrite("omega0", &SpinBosonConfig::omega0)
      .def_readwrite("n_levels", &SpinBosonConfig::n_levels);

  py::class_<ModelSpec>(m, "ModelSpec")
      .def(py::init<>())
      .def_readwrite("kind", &ModelSpec::kind)
      .def_readwrite("d", &ModelSpec::d)
      .def_readwrite("d_env", &ModelSpec::d_env)
      .def_readwrite("a_unit", &ModelSpec::a_unit)
      .def_readwrite("a_diss", &ModelSpec::a_diss)
      .def_readwrite("jc", &ModelSpec::jc)
      .def_readwrite("sb", &ModelSpec::sb);

  py::class_<TrajectoryDataset>(m, "TrajectoryDataset")
      .def(py::init<>())
      .def_readwrite("d", &TrajectoryDataset::d)
      .def_readwrite("tau", &TrajectoryDataset::tau)
      .def_readwrite("noise_sigma", &TrajectoryDataset::noise_sigma)
      .def_readwrite("seed", &TrajectoryDataset::seed)
      .def_readwrite("model", &TrajectoryDataset::model)
      .def_readwrite("trajectories", &TrajectoryDataset::trajectories);

  py::class_<GeneratedData>(m, "GeneratedData")
      .def_readwrite("train", &GeneratedData::train)
      .def_readwrite("test", &GeneratedData::test);

  m.def("generate_dataset", &generate_dataset, py::arg("model"), py::arg("L"),
        py::arg("T"), py::arg("tau"), py::arg("seed"),
        "L training trajectories plus one held-out test trajectory");

  m.def(
      "add_noise",
      [](const TrajectoryDataset& ds, double sigma, std::uint64_t seed, std::uint64_t stream) {
        Rng rng = make_rng(seed, stream);
        return add_noise(ds, sigma, rng);
      },
      py::arg("dataset"), py::arg("sigma"), py::arg("seed"), py::arg("stream") = 2,
      "Gaussian perturbation of every matrix entry, fresh rng stream per call");
  m.def(
      "add_noise",
      [](const Trajectory& traj, double sigma, std::uint64_t seed, std::uint64_t stream) {
        Rng rng = make_rng(seed, stream);
        return add_noise(traj, sigma, rng);
      },
      py::arg("trajectory"), py::arg("sigma"), py::arg("seed"), py::arg("stream") = 2);

  py::class_<ThresholdConfig>(m, "ThresholdConfig")
      .def(py::init<>())
      .def_readwrite("sigma", &ThresholdConfig::sigma)
      .def_readwrite("floor", &ThresholdConfig::floor);

  py::class_<FitOptions>(m, "FitOptions")
      .def(py::init<>())
      .def_readwrite("threshold", &FitOptions::threshold)
      .def_readwrite("project", &FitOptions::project)
      .def_readwrite("full_pinv_route", &FitOptions::full_pinv_route);

  py::class_<EmbeddingModel>(m, "EmbeddingModel")
      .def_readonly("r", &EmbeddingModel::r)
      .def_readonly("K", &EmbeddingModel::K)
      .def_readonly("d", &EmbeddingModel::d)
      .def_readonly("eigenvalues", &EmbeddingModel::eigenvalues)
      .def_readonly("decoder", &EmbeddingModel::decoder)
      .def_readonly("encoder", &EmbeddingModel::encoder)
      .def_readonly("singular_values", &EmbeddingModel::singular_values)
      .def_readonly("threshold", &EmbeddingModel::threshold)
      .def_readonly("project", &EmbeddingModel::project);

  m.def(
      "fit",
      [](const std::vector<Trajectory>& trajectories, Index K, double sigma, bool project,
         bool full_pinv_route) {
        FitOptions opts;
        opts.threshold.sigma = sigma;
        opts.project = project;
        opts.full_pinv_route = full_pinv_route;
        return fit(trajectories, K, opts);
      },
      py::arg("trajectories"), py::arg("K"), py::arg("sigma") = 0.0,
      py::arg("project") = false, py::arg("full_pinv_route") = false,
      "Reconstruct (decoder, eigenvalues, encoder) from trajectories");
  m.def(
      "fit",
      [](const TrajectoryDataset& ds, Index K, std::optional<double> sigma, bool project,
         bool full_pinv_route) {
        FitOptions opts;
        opts.threshold.sigma = sigma ? *sigma : ds.noise_sigma;
        opts.project = project;
        opts.full_pinv_route = full_pinv_route;
        return fit(ds, K, opts);
      },
      py::arg("dataset"), py::arg("K"), py::arg("sigma") = std::nullopt,
      py::arg("project") = false, py::arg("full_pinv_route") = false,
      "Threshold defaults to the dataset's recorded noise level");

  m.def("predict", &predict, py::arg("model"), py::arg("history"), py::arg("n"),
        "State n steps past the end of a length-K history");
  m.def("predict_trajectory", &predict_trajectory, py::arg("model"), py::arg("history"),
        py::arg("n_steps"), "States 1..n_steps past the end of a length-K history");

  m.def(
      "denoise",
      [](const std::vector<Trajectory>& trajectories, Index K, double sigma, Index eta,
         bool project) {
        const HankelSet hs = build_shifted_and_stack(trajectories, K);
        if (eta < 1) {
          Eigen::BDCSVD<Mat> svd(hs.h);
          ThresholdConfig cfg;
          cfg.sigma = sigma;
          eta = optimal_rank(svd.singularValues(), hs.h.rows(), hs.h.cols(), cfg);
          if (eta < 1) throw NoSignalError("denoise: no signal above noise threshold");
        }
        return denoise(hs, eta, project).trajectories;
      },
      py::arg("trajectories"), py::arg("K"), py::arg("sigma"), py::arg("eta") = 0,
      py::arg("project") = false,
      "Hard-threshold the stacked block-Hankel matrix and reassemble the states");

  m.def("threshold_coefficient", &threshold_coefficient, py::arg("beta"));
  m.def("effective_env_dim", &effective_env_dim, py::arg("r"), py::arg("d"));
  m.def("natural_rank", &natural_rank, py::arg("d"), py::arg("d_env"));

  m.def("dist_test", &dist_test, py::arg("t1"), py::arg("t2"), py::arg("K"),
        "Mean trace distance over the tail k = K..T-1");
  m.def("dist_dataset",
        py::overload_cast<const std::vector<Trajectory>&, const std::vector<Trajectory>&>(
            &dist_dataset),
        py::arg("s1"), py::arg("s2"), "Mean trace distance over all paired states");

  py::class_<SpectrumMatch>(m, "SpectrumMatch")
      .def_readonly("pairs", &SpectrumMatch::pairs)
      .def_readonly("pair_distance", &SpectrumMatch::pair_distance)
      .def_readonly("max_distance", &SpectrumMatch::max_distance)
      .def_readonly("mean_distance", &SpectrumMatch::mean_distance)
      .def_readonly("total_cost", &SpectrumMatch::total_cost)
      .def_readonly("unmatched_recovered", &SpectrumMatch::unmatched_recovered)
      .def_readonly("unmatched_reference", &SpectrumMatch::unmatched_reference);

  m.def("match_spectra", &match_spectra, py::arg("recovered"), py::arg("reference"),
        "Minimal-total-distance pairing of two eigenvalue lists");

  m.def(
      "finite_env_channel",
      [](const ModelSpec& spec, double tau, std::uint64_t seed) {
        Rng rng = make_rng(seed, 0);
        const GkslGenerator gen =
            random_gksl(spec.d, spec.d_env, spec.a_unit, spec.a_diss, rng);
        return propagator(gksl_superoperator(gen), tau);
      },
      py::arg("model"), py::arg("tau"), py::arg("seed"),
      "Exact one-step channel of the generator a dataset seed would draw");

  py::class_<DatasetFile>(m, "DatasetFile")
      .def_readwrite("data", &DatasetFile::data)
      .def_readwrite("clean_reference", &DatasetFile::clean_reference)
      .def_readwrite("clean_trajectories", &DatasetFile::clean_trajectories);

  m.def(
      "save_dataset",
      [](const std::string& path, const TrajectoryDataset& ds,
         const std::string& clean_reference,
         const std::optional<std::vector<Trajectory>>& clean_twin) {
        save_dataset(path, ds, clean_reference, clean_twin ? &*clean_twin : nullptr);
      },
      py::arg("path"), py::arg("dataset"), py::arg("clean_reference") = std::string(),
      py::arg("clean_twin") = std::nullopt);
  m.def("load_dataset", &load_dataset, py::arg("path"));

  py::class_<TrainingInfo>(m, "TrainingInfo")
      .def(py::init<>())
      .def_readwrite("path", &TrainingInfo::path)
      .def_readwrite("fingerprint", &TrainingInfo::fingerprint)
      .def_readwrite("model", &TrainingInfo::model)
      .def_readwrite("seed", &TrainingInfo::seed)
      .def_readwrite("tau", &TrainingInfo::tau)
      .def_readwrite("noise_sigma", &TrainingInfo::noise_sigma)
      .def_readwrite("L", &TrainingInfo::L)
      .def_readwrite("T", &TrainingInfo::T);

  py::class_<ModelRecord>(m, "ModelRecord")
      .def_readonly("model", &ModelRecord::model)
      .def_readonly("has_training", &ModelRecord::has_training)
      .def_readonly("training", &ModelRecord::training);

  m.def(
      "save_model",
      [](const std::string& path, const EmbeddingModel& model,
         const std::optional<TrainingInfo>& training) {
        save_model(path, model, training ? &*training : nullptr);
      },
      py::arg("path"), py::arg("model"), py::arg("training") = std::nullopt);
  m.def("load_model", &load_model, py::arg("path"));
}
