#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "lcg/error.hpp"
#include "lcg/pipeline.hpp"

namespace py = pybind11;
using namespace lcg;

namespace {

using FloatArray = py::array_t<float, py::array::c_style | py::array::forcecast>;

EmbeddingMatrix to_matrix(const FloatArray& a) {
  if (a.ndim() != 2) throw py::value_error("expected a 2-d array");
  EmbeddingMatrix m(static_cast<std::size_t>(a.shape(0)), static_cast<std::size_t>(a.shape(1)));
  std::copy(a.data(), a.data() + a.size(), m.data.begin());
  return m;
}

py::array_t<float> to_array(const EmbeddingMatrix& m) {
  py::array_t<float> out({m.rows, m.dim});
  std::copy(m.data.begin(), m.data.end(), out.mutable_data());
  return out;
}

template <typename T>
py::array_t<T> to_array(const std::vector<T>& v) {
  py::array_t<T> out(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

py::dict record_dict(const InstructionRecord& r) {
  py::dict d;
  d["id"] = r.id;
  d["instruction"] = r.instruction;
  d["input"] = r.input;
  d["output"] = r.output;
  return d;
}

PipelineConfig config_from(const py::dict& options) {
  PipelineConfig c;
  for (auto [key, value] : options) {
    std::string text;
    if (py::isinstance<py::bool_>(value)) {
      text = value.cast<bool>() ? "true" : "false";
    } else if (py::isinstance<py::list>(value) || py::isinstance<py::tuple>(value)) {
      for (auto item : value) text += (text.empty() ? "" : ",") + py::str(item).cast<std::string>();
    } else {
      text = py::str(value).cast<std::string>();
    }
    set_config_value(c, key.cast<std::string>(), text);
  }
  return c;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Low-confidence instruction selection: clustering, coreset classifier and selection.";

  static py::exception<Error> base(m, "LcgError", PyExc_RuntimeError);
  static py::exception<ConfigError> config_error(m, "ConfigError", base.ptr());
  static py::exception<DataError> data_error(m, "DataError", base.ptr());
  static py::exception<NumericError> numeric_error(m, "NumericError", base.ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ConfigError& e) {
      py::set_error(config_error, e.what());
    } catch (const DataError& e) {
      py::set_error(data_error, e.what());
    } catch (const NumericError& e) {
      py::set_error(numeric_error, e.what());
    } catch (const Error& e) {
      py::set_error(base, e.what());
    }
  });

  py::class_<Dataset>(m, "Dataset")
      .def("__len__", &Dataset::size)
      .def("__getitem__", [](const Dataset& d, RecordId i) { return record_dict(d[i]); })
      .def_property_readonly("digest", [](const Dataset& d) { return to_hex(d.source_digest); })
      .def_property_readonly("digest_bytes", [](const Dataset& d) {
        return py::bytes(reinterpret_cast<const char*>(d.source_digest.data()), d.source_digest.size());
      });

  m.def("load_dataset", [](const std::filesystem::path& p, const std::string& format) {
    return load_dataset(p, parse_dataset_format(format));
  }, py::arg("path"), py::arg("format") = "jsonl");
  m.def("write_subset", [](const Dataset& d, std::vector<RecordId> ids, const std::filesystem::path& p) {
    write_subset(d, ids, p);
  }, py::arg("dataset"), py::arg("ids"), py::arg("path"));

  m.def("hashing_embed", [](const Dataset& d, std::size_t dim, unsigned threads) {
    return to_array(hashing_embed(d, dim, threads));
  }, py::arg("dataset"), py::arg("dim") = kDefaultEmbeddingDim, py::arg("threads") = 1);
  m.def("load_embeddings", [](const std::filesystem::path& p, const Dataset& d) {
    return to_array(load_embeddings(p, d));
  }, py::arg("path"), py::arg("dataset"));
  m.def("write_embeddings", [](const std::filesystem::path& p, const FloatArray& a, const Dataset& d) {
    write_embeddings(p, to_matrix(a), d.source_digest);
  }, py::arg("path"), py::arg("embeddings"), py::arg("dataset"));
  m.def("l2_normalize", [](const FloatArray& a) { return to_array(l2_normalize(to_matrix(a))); },
        py::arg("embeddings"));

  py::class_<ClusterModel>(m, "ClusterModel")
      .def_readonly("k", &ClusterModel::k)
      .def_readonly("dim", &ClusterModel::dim)
      .def_readonly("objective", &ClusterModel::objective)
      .def_readonly("iterations_run", &ClusterModel::iterations_run)
      .def_readonly("objective_history", &ClusterModel::objective_history)
      .def_property_readonly("centroids", [](const ClusterModel& c) {
        EmbeddingMatrix mat(c.k, c.dim);
        mat.data = c.centroids;
        return to_array(mat);
      })
      .def_property_readonly("assignment", [](const ClusterModel& c) { return to_array(c.assignment); })
      .def_property_readonly("distance", [](const ClusterModel& c) { return to_array(c.distance); })
      .def("cluster_sizes", &ClusterModel::cluster_sizes);

  m.def("kmeans", [](const FloatArray& a, std::size_t k, std::uint64_t seed, std::size_t max_iter, double tol,
                     unsigned threads) {
    return kmeans_fit(to_matrix(a), {k, seed, max_iter, tol, threads});
  }, py::arg("embeddings"), py::arg("k"), py::arg("seed") = 0, py::arg("max_iter") = 100, py::arg("tol") = 1e-6,
        py::arg("threads") = 1);
  m.def("compute_centroids", [](const FloatArray& a, const std::vector<std::uint32_t>& assignment, std::size_t k) {
    const auto x = to_matrix(a);
    EmbeddingMatrix out(k, x.dim);
    out.data = compute_centroids(x, assignment, k);
    return to_array(out);
  }, py::arg("embeddings"), py::arg("assignment"), py::arg("k"));

  py::class_<CoreSet>(m, "CoreSet")
      .def("__len__", &CoreSet::size)
      .def_readonly("num_classes", &CoreSet::num_classes)
      .def_readonly("gamma_per_cluster", &CoreSet::gamma_per_cluster)
      .def_property_readonly("ids", [](const CoreSet& c) {
        std::vector<RecordId> v;
        for (const auto& e : c.entries) v.push_back(e.id);
        return to_array(v);
      })
      .def_property_readonly("labels", [](const CoreSet& c) {
        std::vector<std::uint32_t> v;
        for (const auto& e : c.entries) v.push_back(e.pseudo_label);
        return to_array(v);
      })
      .def("remainder", [](const CoreSet& c, std::size_t n) { return to_array(remainder_ids(c, n)); });

  m.def("select_coreset", [](const ClusterModel& model, const std::string& mode, double parameter) {
    return select_coreset(model, parse_coreset_mode(mode), parameter);
  }, py::arg("model"), py::arg("mode") = "nearest_fraction", py::arg("parameter") = 0.03);

  m.def("gelu", &gelu, py::arg("x"));
  m.def("softmax", [](const std::vector<double>& z) { return softmax(z); }, py::arg("logits"));

  py::class_<MlpModel>(m, "MlpModel")
      .def_readonly("epochs_trained", &MlpModel::epochs_trained)
      .def_property_readonly("shape", [](const MlpModel& mm) {
        return py::make_tuple(mm.shape().input_dim, mm.shape().hidden, mm.shape().classes);
      })
      .def("predict", [](const MlpModel& mm, const FloatArray& a) {
        const auto x = to_matrix(a);
        py::array_t<double> out({x.rows, mm.shape().classes});
        auto* dst = out.mutable_data();
        for (std::size_t i = 0; i < x.rows; ++i) {
          const auto p = mlp_forward(mm, x.row(i));
          std::copy(p.begin(), p.end(), dst + i * p.size());
        }
        return out;
      }, py::arg("embeddings"))
      .def("save", [](const MlpModel& mm, const std::filesystem::path& p) { save_mlp(p, mm); });
  m.def("load_mlp", &load_mlp, py::arg("path"));

  py::class_<MlpTrainResult>(m, "MlpTrainResult")
      .def_readonly("model", &MlpTrainResult::model)
      .def_readonly("initial_loss", &MlpTrainResult::initial_loss)
      .def_readonly("epoch_loss", &MlpTrainResult::epoch_loss);

  m.def("train_mlp", [](const CoreSet& cs, const FloatArray& a, std::size_t k, std::size_t hidden, double lr,
                        int epochs, std::size_t batch_size, std::uint64_t seed) {
    MlpTrainOptions o;
    o.hidden = hidden;
    o.lr = lr;
    o.epochs = epochs;
    o.batch_size = batch_size;
    o.seed = seed;
    return mlp_train(cs, to_matrix(a), k, o);
  }, py::arg("coreset"), py::arg("embeddings"), py::arg("k"), py::arg("hidden") = kDefaultHidden,
        py::arg("lr") = 1e-5, py::arg("epochs") = kMaxEpochs, py::arg("batch_size") = 32, py::arg("seed") = 0);

  py::class_<NbModel>(m, "NbModel")
      .def_readonly("classes", &NbModel::classes)
      .def_readonly("vocabulary", &NbModel::vocabulary)
      .def("predict", [](const NbModel& nb, const std::string& text) { return nb_predict_text(nb, text); },
           py::arg("text"))
      .def("save", [](const NbModel& nb, const std::filesystem::path& p) { save_nb(p, nb); });
  m.def("train_nb", &nb_train, py::arg("coreset"), py::arg("dataset"), py::arg("k"), py::arg("alpha") = 1.0);

  py::class_<ScoredRecord>(m, "ScoredRecord")
      .def_readonly("id", &ScoredRecord::id)
      .def_readonly("cluster", &ScoredRecord::cluster)
      .def_readonly("confidence", &ScoredRecord::confidence)
      .def_readonly("probabilities", &ScoredRecord::probabilities);

  m.def("score_mlp", [](const MlpModel& mm, const CoreSet& cs, const FloatArray& a,
                        const std::vector<std::uint32_t>& assignment, unsigned threads) {
    const auto x = to_matrix(a);
    return score_all(mm, remainder_ids(cs, x.rows), x, assignment, threads);
  }, py::arg("model"), py::arg("coreset"), py::arg("embeddings"), py::arg("assignment"), py::arg("threads") = 1);
  m.def("score_nb", [](const NbModel& nb, const CoreSet& cs, const Dataset& d,
                       const std::vector<std::uint32_t>& assignment, unsigned threads) {
    return score_all(nb, remainder_ids(cs, d.size()), d, assignment, threads);
  }, py::arg("model"), py::arg("coreset"), py::arg("dataset"), py::arg("assignment"), py::arg("threads") = 1);

  m.def("select_gold", [](std::vector<ScoredRecord> scores, const std::string& strategy, double tau,
                          std::size_t k_per_cluster) {
    return to_array(select_gold(std::move(scores), {parse_selection_strategy(strategy), tau, k_per_cluster})
                        .selected_ids);
  }, py::arg("scores"), py::arg("strategy") = "threshold", py::arg("tau") = 0.7, py::arg("k_per_cluster") = 1);

  m.def("histogram_bin", &histogram_bin, py::arg("confidence"));
  m.def("build_histogram", [](const std::vector<double>& c) {
    const auto h = build_histogram(c);
    return std::vector<std::size_t>(h.bins.begin(), h.bins.end());
  }, py::arg("confidences"));

  m.def("config_keys", &config_keys);
  m.def("run_pipeline", [](const py::dict& options, const std::optional<LogFn>& log) {
    const auto c = config_from(options);
    validate_config(c);
    PipelineSummary s;
    {
      py::gil_scoped_release release;
      LogFn sink;
      if (log) {
        sink = [&log](std::string_view line) {
          py::gil_scoped_acquire acquire;
          (*log)(line);
        };
      }
      s = run_pipeline(c, sink);
    }
    py::dict out;
    out["records"] = s.records;
    out["clusters"] = s.clusters;
    out["kmeans_iterations"] = s.kmeans_iterations;
    out["objective"] = s.objective;
    out["coreset"] = s.coreset;
    out["scored"] = s.scored;
    out["selected"] = s.selected;
    out["subset"] = s.subset;
    return out;
  }, py::arg("config"), py::arg("log") = py::none());
}
