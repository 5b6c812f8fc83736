// Python access to the OODF format, manifests and the per-feature metrics.
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "oodsel/dataio.hpp"
#include "oodsel/error.hpp"
#include "oodsel/metrics.hpp"
#include "oodsel/parallel.hpp"

namespace py = pybind11;
using namespace oodsel;

namespace {

using F32 = py::array_t<float, py::array::c_style | py::array::forcecast>;
using U16 = py::array_t<std::uint16_t, py::array::c_style | py::array::forcecast>;

FeatureDataset make_dataset(F32 features, U16 labels, U16 domains, std::optional<unsigned> n_classes) {
  if (features.ndim() != 2) throw InvalidInput("features must be a 2-D array");
  if (labels.ndim() != 1 || domains.ndim() != 1) throw InvalidInput("labels and domains must be 1-D arrays");
  const auto dim = static_cast<std::size_t>(features.shape(1));
  std::vector<float> x(features.data(), features.data() + features.size());
  std::vector<Label> y(labels.data(), labels.data() + labels.size());
  std::vector<DomainId> e(domains.data(), domains.data() + domains.size());
  unsigned k = n_classes.value_or(0);
  if (!n_classes)
    for (Label v : y) k = std::max<unsigned>(k, v);
  return FeatureDataset(dim, k, std::move(x), std::move(y), std::move(e));
}

DivergenceKind kind_of(const std::string& name, double floor) { return DivergenceKind::parse(name, floor); }

std::vector<DomainId> domains_or_all(const FeatureDataset& ds, std::optional<std::vector<DomainId>> d) {
  if (d) return *d;
  return {ds.domain_ids().begin(), ds.domain_ids().end()};
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "OOD feature metrics and the OODF container";

  py::register_exception<RuntimeFailure>(m, "RuntimeFailure", PyExc_RuntimeError);

  py::class_<FeatureDataset>(m, "FeatureDataset")
      .def(py::init(&make_dataset), py::arg("features"), py::arg("labels"), py::arg("domains"),
           py::arg("n_classes") = py::none())
      .def_property_readonly("n_samples", &FeatureDataset::n_samples)
      .def_property_readonly("dim", &FeatureDataset::dim)
      .def_property_readonly("n_classes", &FeatureDataset::n_classes)
      .def_property_readonly("features",
                             [](const FeatureDataset& ds) {
                               auto f = ds.features();
                               return py::array_t<float>({ds.n_samples(), ds.dim()}, f.data());
                             })
      .def_property_readonly("labels",
                             [](const FeatureDataset& ds) {
                               auto s = ds.labels();
                               return py::array_t<std::uint16_t>(s.size(), s.data());
                             })
      .def_property_readonly("domains",
                             [](const FeatureDataset& ds) {
                               auto s = ds.domains();
                               return py::array_t<std::uint16_t>(s.size(), s.data());
                             })
      .def_property_readonly("domain_ids",
                             [](const FeatureDataset& ds) {
                               auto s = ds.domain_ids();
                               return std::vector<DomainId>(s.begin(), s.end());
                             })
      .def("__eq__", [](const FeatureDataset& a, const FeatureDataset& b) { return a == b; })
      .def("__repr__", [](const FeatureDataset& ds) {
        return "FeatureDataset(n=" + std::to_string(ds.n_samples()) + ", d=" + std::to_string(ds.dim()) +
               ", K=" + std::to_string(ds.n_classes()) + ")";
      });

  m.def("load_dataset", &load_dataset, py::arg("path"));
  m.def("write_dataset", &write_dataset, py::arg("dataset"), py::arg("path"));
  m.def("write_dataset_csv", &write_dataset_csv, py::arg("dataset"), py::arg("path"));
  m.def(
      "encode_oodf",
      [](const FeatureDataset& ds) {
        const auto b = encode_oodf(ds);
        return py::bytes(reinterpret_cast<const char*>(b.data()), b.size());
      },
      py::arg("dataset"));
  m.def(
      "decode_oodf",
      [](py::bytes data) {
        const std::string s = data;
        return decode_oodf({reinterpret_cast<const std::uint8_t*>(s.data()), s.size()});
      },
      py::arg("data"));

  py::class_<ManifestEntry>(m, "ManifestEntry")
      .def(py::init<>())
      .def_readwrite("model_id", &ManifestEntry::model_id)
      .def_readwrite("avail_file", &ManifestEntry::avail_file)
      .def_readwrite("all_file", &ManifestEntry::all_file)
      .def_readwrite("val_accuracy", &ManifestEntry::val_accuracy)
      .def_readwrite("metadata", &ManifestEntry::metadata);
  py::class_<ModelManifest>(m, "ModelManifest")
      .def(py::init<>())
      .def_readwrite("entries", &ModelManifest::entries);
  m.def("load_manifest", &load_manifest, py::arg("path"));
  m.def("parse_manifest", &parse_manifest, py::arg("json_text"), py::arg("base_dir") = std::filesystem::path{});
  m.def("write_manifest", &write_manifest, py::arg("manifest"), py::arg("path"));

  m.def(
      "feature_variation",
      [](const FeatureDataset& ds, std::size_t j, std::optional<std::vector<DomainId>> domains,
         const std::string& divergence, double kl_floor) {
        return feature_variation(ds, j, domains_or_all(ds, domains), kind_of(divergence, kl_floor));
      },
      py::arg("dataset"), py::arg("feature"), py::arg("domains") = py::none(), py::arg("divergence") = "tv",
      py::arg("kl_floor") = 1e-12);
  m.def(
      "feature_informativeness",
      [](const FeatureDataset& ds, std::size_t j, std::optional<std::vector<DomainId>> domains,
         const std::string& divergence, double kl_floor) {
        return feature_informativeness(ds, j, domains_or_all(ds, domains), kind_of(divergence, kl_floor));
      },
      py::arg("dataset"), py::arg("feature"), py::arg("domains") = py::none(), py::arg("divergence") = "tv",
      py::arg("kl_floor") = 1e-12);
  m.def(
      "model_variation",
      [](const FeatureDataset& ds, std::optional<std::vector<DomainId>> domains, const std::string& divergence,
         double kl_floor) {
        return model_variation(ds, domains_or_all(ds, domains), kind_of(divergence, kl_floor));
      },
      py::arg("dataset"), py::arg("domains") = py::none(), py::arg("divergence") = "tv",
      py::arg("kl_floor") = 1e-12);

  m.def("set_num_threads", &set_num_threads, py::arg("n"));
  m.def("num_threads", &num_threads);
}
