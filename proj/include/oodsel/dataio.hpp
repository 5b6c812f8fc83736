#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace oodsel {

using DomainId = std::uint16_t;
using Label = std::uint16_t;

// n x d feature matrix (row-major, stored as f32) with a 1-based class label
// and a domain id per sample. Instances are validated on construction and
// immutable afterwards.
class FeatureDataset {
 public:
  FeatureDataset(std::size_t dim, unsigned n_classes, std::vector<float> features,
                 std::vector<Label> labels, std::vector<DomainId> domains);

  std::size_t n_samples() const { return labels_.size(); }
  std::size_t dim() const { return dim_; }
  unsigned n_classes() const { return n_classes_; }

  float feature(std::size_t sample, std::size_t j) const {
    return features_[sample * dim_ + j];
  }
  std::span<const float> row(std::size_t sample) const {
    return {features_.data() + sample * dim_, dim_};
  }
  std::vector<double> column(std::size_t j) const;
  // Values of the linear feature sum_j coeffs[j] * h_j for every sample.
  std::vector<double> project(std::span<const double> coeffs) const;

  std::span<const float> features() const { return features_; }
  std::span<const Label> labels() const { return labels_; }
  std::span<const DomainId> domains() const { return domains_; }
  // Sorted distinct domain ids present in the data.
  std::span<const DomainId> domain_ids() const { return domain_ids_; }

  bool operator==(const FeatureDataset&) const = default;

 private:
  std::size_t dim_;
  unsigned n_classes_;
  std::vector<float> features_;
  std::vector<Label> labels_;
  std::vector<DomainId> domains_;
  std::vector<DomainId> domain_ids_;
};

// Available vs. full domain sets.
struct DomainSplit {
  std::vector<DomainId> avail;
  std::vector<DomainId> all;

  // Sorts and deduplicates both lists; throws unless avail is a nonempty
  // subset of all.
  static DomainSplit make(std::vector<DomainId> avail, std::vector<DomainId> all);
};

// OODF binary container (little-endian):
//   "OODF" | u32 version=1 | u64 n | u32 d | u32 K | u32 n_domains
//   | n*d f32 features (row-major) | n u16 labels (1-based) | n u16 domains
// load_dataset also accepts CSV (header f0..f{d-1},label,domain) when the file
// does not start with the OODF magic and has a .csv extension.
FeatureDataset load_dataset(const std::filesystem::path& path);
void write_dataset(const FeatureDataset& ds, const std::filesystem::path& path);

// With no explicit class count, K is the largest label present.
FeatureDataset load_dataset_csv(const std::filesystem::path& path,
                                std::optional<unsigned> n_classes = std::nullopt);
void write_dataset_csv(const FeatureDataset& ds, const std::filesystem::path& path);

// In-memory OODF encoding; write_dataset/load_dataset wrap these.
std::vector<std::uint8_t> encode_oodf(const FeatureDataset& ds);
FeatureDataset decode_oodf(std::span<const std::uint8_t> bytes);

struct ManifestEntry {
  std::string model_id;
  std::filesystem::path avail_file;
  std::optional<std::filesystem::path> all_file;
  double val_accuracy = 0.0;
  std::map<std::string, std::string> metadata;
};

struct ModelManifest {
  std::vector<ManifestEntry> entries;
};

// Accepts {"models": [...]} or a bare array of entries. feature_file is either
// {"avail": path, "all": path?} or a plain path (taken as "avail"). Relative
// paths resolve against the manifest's directory. Feature files are not opened.
ModelManifest load_manifest(const std::filesystem::path& path);
ModelManifest parse_manifest(const std::string& json_text,
                             const std::filesystem::path& base_dir = {});
void write_manifest(const ModelManifest& manifest, const std::filesystem::path& path);

}  // namespace oodsel
