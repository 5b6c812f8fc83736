#include "oodsel/dataio.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <limits>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "oodsel/error.hpp"
#include "oodsel/textio.hpp"

namespace oodsel {
namespace fs = std::filesystem;

namespace {

constexpr char kMagic[4] = {'O', 'O', 'D', 'F'};
constexpr std::uint32_t kVersion = 1;
constexpr std::size_t kHeaderBytes = 4 + 4 + 8 + 4 + 4 + 4;

template <class T>
void put_le(std::vector<std::uint8_t>& out, T value) {
  using U = std::conditional_t<sizeof(T) == 2, std::uint16_t,
                               std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>>;
  const U bits = std::bit_cast<U>(value);
  for (std::size_t i = 0; i < sizeof(T); ++i)
    out.push_back(static_cast<std::uint8_t>((bits >> (8 * i)) & 0xFFu));
}

template <class T>
T get_le(std::span<const std::uint8_t> bytes, std::size_t offset) {
  using U = std::conditional_t<sizeof(T) == 2, std::uint16_t,
                               std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>>;
  U bits = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i)
    bits |= static_cast<U>(static_cast<U>(bytes[offset + i]) << (8 * i));
  return std::bit_cast<T>(bits);
}

std::string format_float(float value) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

template <class T>
T parse_number(std::string_view text, std::size_t line, const char* what) {
  text = trim(text);
  T value{};
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size())
    throw FormatError("invalid " + std::string(what) + " '" + std::string(text) + "' at line " +
                      std::to_string(line));
  return value;
}

}  // namespace

FeatureDataset::FeatureDataset(std::size_t dim, unsigned n_classes, std::vector<float> features,
                               std::vector<Label> labels, std::vector<DomainId> domains)
    : dim_(dim),
      n_classes_(n_classes),
      features_(std::move(features)),
      labels_(std::move(labels)),
      domains_(std::move(domains)) {
  if (dim_ < 1) throw InvalidInput("dataset needs at least one feature (d >= 1)");
  if (n_classes_ < 2) throw InvalidInput("dataset needs at least two classes (K >= 2)");
  if (n_classes_ > std::numeric_limits<Label>::max())
    throw InvalidInput("class count exceeds 65535");
  if (labels_.empty()) throw InvalidInput("dataset has no samples");
  if (domains_.size() != labels_.size())
    throw InvalidInput("label and domain arrays disagree on sample count");
  if (features_.size() != labels_.size() * dim_)
    throw InvalidInput("feature matrix size does not match n_samples * d");
  for (std::size_t i = 0; i < labels_.size(); ++i)
    if (labels_[i] < 1 || labels_[i] > n_classes_)
      throw InvalidInput("label out of range at record " + std::to_string(i));
  for (std::size_t k = 0; k < features_.size(); ++k)
    if (!std::isfinite(features_[k]))
      throw InvalidInput("non-finite feature value at record " + std::to_string(k / dim_) +
                         ", feature " + std::to_string(k % dim_));
  std::set<DomainId> ids(domains_.begin(), domains_.end());
  domain_ids_.assign(ids.begin(), ids.end());
}

std::vector<double> FeatureDataset::column(std::size_t j) const {
  if (j >= dim_) throw InvalidInput("feature index " + std::to_string(j) + " out of range");
  std::vector<double> out(n_samples());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = features_[i * dim_ + j];
  return out;
}

std::vector<double> FeatureDataset::project(std::span<const double> coeffs) const {
  if (coeffs.size() != dim_)
    throw InvalidInput("direction has " + std::to_string(coeffs.size()) + " coefficients, dataset has d=" +
                       std::to_string(dim_));
  std::vector<double> out(n_samples());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const float* r = features_.data() + i * dim_;
    double acc = 0.0;
    for (std::size_t j = 0; j < dim_; ++j) acc += coeffs[j] * static_cast<double>(r[j]);
    out[i] = acc;
  }
  return out;
}

DomainSplit DomainSplit::make(std::vector<DomainId> avail, std::vector<DomainId> all) {
  auto norm = [](std::vector<DomainId>& v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  };
  norm(avail);
  norm(all);
  if (avail.empty()) throw InvalidInput("available domain set is empty");
  if (!std::includes(all.begin(), all.end(), avail.begin(), avail.end()))
    throw InvalidInput("available domains are not a subset of all domains");
  return {std::move(avail), std::move(all)};
}

std::vector<std::uint8_t> encode_oodf(const FeatureDataset& ds) {
  std::vector<std::uint8_t> out;
  const std::size_t n = ds.n_samples();
  out.reserve(kHeaderBytes + n * ds.dim() * 4 + n * 4);
  out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
  put_le<std::uint32_t>(out, kVersion);
  put_le<std::uint64_t>(out, n);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(ds.dim()));
  put_le<std::uint32_t>(out, ds.n_classes());
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(ds.domain_ids().size()));
  for (float v : ds.features()) put_le<float>(out, v);
  for (Label y : ds.labels()) put_le<std::uint16_t>(out, y);
  for (DomainId e : ds.domains()) put_le<std::uint16_t>(out, e);
  return out;
}

FeatureDataset decode_oodf(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0)
    throw FormatError("malformed header: missing OODF magic at byte offset 0");
  if (bytes.size() < kHeaderBytes)
    throw FormatError("malformed header: file ends at byte offset " + std::to_string(bytes.size()) +
                      " inside the " + std::to_string(kHeaderBytes) + "-byte header");
  const auto version = get_le<std::uint32_t>(bytes, 4);
  if (version != kVersion)
    throw FormatError("malformed header: unsupported version " + std::to_string(version) +
                      " at byte offset 4");
  const auto n = get_le<std::uint64_t>(bytes, 8);
  const auto d = get_le<std::uint32_t>(bytes, 16);
  const auto k = get_le<std::uint32_t>(bytes, 20);
  const auto n_domains = get_le<std::uint32_t>(bytes, 24);
  if (n == 0) throw FormatError("malformed header: n_samples is 0 at byte offset 8");
  if (d == 0) throw FormatError("malformed header: d is 0 at byte offset 16");
  if (k < 2 || k > std::numeric_limits<Label>::max())
    throw FormatError("malformed header: K=" + std::to_string(k) + " outside [2, 65535] at byte offset 20");
  if (n_domains == 0 || n_domains > std::numeric_limits<DomainId>::max())
    throw FormatError("malformed header: n_domains=" + std::to_string(n_domains) + " at byte offset 24");

  // Guard the size arithmetic before trusting n and d.
  const std::uint64_t payload_limit = bytes.size();
  if (n > payload_limit || static_cast<std::uint64_t>(d) * n > payload_limit)
    throw FormatError("truncated payload: header declares n=" + std::to_string(n) + ", d=" +
                      std::to_string(d) + " but the file has " + std::to_string(bytes.size()) + " bytes");
  const std::uint64_t expected = kHeaderBytes + n * d * 4 + n * 2 + n * 2;
  if (bytes.size() < expected)
    throw FormatError("truncated payload: expected " + std::to_string(expected) + " bytes, found " +
                      std::to_string(bytes.size()));
  if (bytes.size() > expected)
    throw FormatError("trailing bytes after payload at byte offset " + std::to_string(expected));

  std::vector<float> features(n * d);
  std::size_t off = kHeaderBytes;
  for (std::size_t i = 0; i < features.size(); ++i, off += 4) {
    features[i] = get_le<float>(bytes, off);
    if (!std::isfinite(features[i]))
      throw FormatError("non-finite feature value at record " + std::to_string(i / d) + ", feature " +
                        std::to_string(i % d) + " (byte offset " + std::to_string(off) + ")");
  }
  std::vector<Label> labels(n);
  for (std::size_t i = 0; i < n; ++i, off += 2) {
    labels[i] = get_le<std::uint16_t>(bytes, off);
    if (labels[i] < 1 || labels[i] > k)
      throw FormatError("label out of range at record " + std::to_string(i) + " (value " +
                        std::to_string(labels[i]) + ", K=" + std::to_string(k) + ")");
  }
  std::vector<DomainId> domains(n);
  for (std::size_t i = 0; i < n; ++i, off += 2) domains[i] = get_le<std::uint16_t>(bytes, off);

  FeatureDataset ds(d, k, std::move(features), std::move(labels), std::move(domains));
  if (ds.domain_ids().size() != n_domains)
    throw FormatError("header declares " + std::to_string(n_domains) + " domains but records contain " +
                      std::to_string(ds.domain_ids().size()));
  return ds;
}

FeatureDataset load_dataset(const fs::path& path) {
  const auto bytes = read_file_bytes(path);
  const bool has_magic = bytes.size() >= 4 && std::memcmp(bytes.data(), kMagic, 4) == 0;
  if (!has_magic && path.extension() == ".csv") return load_dataset_csv(path);
  try {
    return decode_oodf(bytes);
  } catch (const FormatError& e) {
    throw FormatError("'" + path.string() + "': " + e.what());
  }
}

void write_dataset(const FeatureDataset& ds, const fs::path& path) {
  write_file_atomic(path, std::span<const std::uint8_t>(encode_oodf(ds)));
}

FeatureDataset load_dataset_csv(const fs::path& path, std::optional<unsigned> n_classes) {
  const auto text = read_file_text(path);
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw FormatError("'" + path.string() + "': empty CSV");
  const auto header = split(trim(line), ',');
  if (header.size() < 3 || trim(header[header.size() - 2]) != "label" || trim(header.back()) != "domain")
    throw FormatError("'" + path.string() + "': CSV header must be f0..f{d-1},label,domain");
  const std::size_t d = header.size() - 2;
  for (std::size_t j = 0; j < d; ++j)
    if (trim(header[j]) != "f" + std::to_string(j))
      throw FormatError("'" + path.string() + "': CSV header column " + std::to_string(j) + " must be f" +
                        std::to_string(j));

  std::vector<float> features;
  std::vector<Label> labels;
  std::vector<DomainId> domains;
  std::size_t line_no = 1;
  unsigned max_label = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split(trim(line), ',');
    if (cells.size() != d + 2)
      throw FormatError("'" + path.string() + "': expected " + std::to_string(d + 2) + " columns at line " +
                        std::to_string(line_no));
    for (std::size_t j = 0; j < d; ++j) features.push_back(parse_number<float>(cells[j], line_no, "feature"));
    const auto y = parse_number<unsigned>(cells[d], line_no, "label");
    const auto e = parse_number<unsigned>(cells[d + 1], line_no, "domain");
    if (y > std::numeric_limits<Label>::max() || e > std::numeric_limits<DomainId>::max())
      throw FormatError("'" + path.string() + "': label/domain exceeds 65535 at line " + std::to_string(line_no));
    max_label = std::max(max_label, y);
    labels.push_back(static_cast<Label>(y));
    domains.push_back(static_cast<DomainId>(e));
  }
  try {
    return FeatureDataset(d, n_classes.value_or(max_label), std::move(features), std::move(labels),
                          std::move(domains));
  } catch (const InvalidInput& e) {
    throw FormatError("'" + path.string() + "': " + e.what());
  }
}

void write_dataset_csv(const FeatureDataset& ds, const fs::path& path) {
  std::string out;
  for (std::size_t j = 0; j < ds.dim(); ++j) out += "f" + std::to_string(j) + ",";
  out += "label,domain\n";
  for (std::size_t i = 0; i < ds.n_samples(); ++i) {
    for (float v : ds.row(i)) out += format_float(v) + ",";
    out += std::to_string(ds.labels()[i]) + "," + std::to_string(ds.domains()[i]) + "\n";
  }
  write_file_atomic(path, out);
}

ModelManifest parse_manifest(const std::string& json_text, const fs::path& base_dir) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(std::string("manifest is not valid JSON: ") + e.what());
  }
  const nlohmann::json* list = &doc;
  if (doc.is_object()) {
    if (!doc.contains("models")) throw FormatError("manifest object lacks a \"models\" array");
    list = &doc["models"];
  }
  if (!list->is_array()) throw FormatError("manifest models must be a JSON array");

  auto resolve = [&](const std::string& p) {
    fs::path path(p);
    return path.is_relative() && !base_dir.empty() ? base_dir / path : path;
  };

  ModelManifest manifest;
  std::set<std::string> seen;
  std::size_t index = 0;
  for (const auto& item : *list) {
    const auto where = "manifest entry " + std::to_string(index++);
    if (!item.is_object()) throw FormatError(where + " is not an object");
    ManifestEntry entry;
    if (!item.contains("model_id") || !item["model_id"].is_string())
      throw FormatError(where + ": model_id missing or not a string");
    entry.model_id = item["model_id"].get<std::string>();
    if (!seen.insert(entry.model_id).second)
      throw FormatError("duplicate model_id '" + entry.model_id + "'");

    if (!item.contains("feature_file")) throw FormatError(where + ": feature_file missing");
    const auto& ff = item["feature_file"];
    if (ff.is_string()) {
      entry.avail_file = resolve(ff.get<std::string>());
    } else if (ff.is_object()) {
      if (!ff.contains("avail") || !ff["avail"].is_string())
        throw FormatError(where + ": feature_file.avail missing");
      entry.avail_file = resolve(ff["avail"].get<std::string>());
      if (ff.contains("all")) {
        if (!ff["all"].is_string()) throw FormatError(where + ": feature_file.all must be a string");
        entry.all_file = resolve(ff["all"].get<std::string>());
      }
    } else {
      throw FormatError(where + ": feature_file must be a string or object");
    }

    if (!item.contains("val_accuracy") || !item["val_accuracy"].is_number())
      throw FormatError(where + ": val_accuracy missing or not a number");
    entry.val_accuracy = item["val_accuracy"].get<double>();
    if (!std::isfinite(entry.val_accuracy) || entry.val_accuracy < 0.0 || entry.val_accuracy > 1.0)
      throw FormatError("model '" + entry.model_id + "': val_accuracy " + format_double(entry.val_accuracy) +
                        " outside [0, 1]");

    if (item.contains("metadata")) {
      if (!item["metadata"].is_object()) throw FormatError(where + ": metadata must be an object");
      for (const auto& [key, value] : item["metadata"].items())
        entry.metadata[key] = value.is_string() ? value.get<std::string>() : value.dump();
    }
    manifest.entries.push_back(std::move(entry));
  }
  return manifest;
}

ModelManifest load_manifest(const fs::path& path) {
  return parse_manifest(read_file_text(path), path.parent_path());
}

void write_manifest(const ModelManifest& manifest, const fs::path& path) {
  nlohmann::json models = nlohmann::json::array();
  const auto base = path.parent_path();
  auto rel = [&](const fs::path& p) {
    return base.empty() ? p.generic_string() : p.lexically_proximate(base).generic_string();
  };
  for (const auto& e : manifest.entries) {
    nlohmann::json ff = {{"avail", rel(e.avail_file)}};
    if (e.all_file) ff["all"] = rel(*e.all_file);
    nlohmann::json meta = nlohmann::json::object();
    for (const auto& [k, v] : e.metadata) meta[k] = v;
    models.push_back({{"model_id", e.model_id},
                      {"feature_file", ff},
                      {"val_accuracy", e.val_accuracy},
                      {"metadata", meta}});
  }
  write_file_atomic(path, nlohmann::json{{"models", models}}.dump(2) + "\n");
}

}  // namespace oodsel
