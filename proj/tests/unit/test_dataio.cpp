#include <doctest.h>

#include <cstring>
#include <random>

#include "oodsel/dataio.hpp"
#include "oodsel/error.hpp"
#include "oodsel/textio.hpp"
#include "tmpdir.hpp"

using namespace oodsel;

namespace {

FeatureDataset small() {
  return FeatureDataset(2, 2, {0.5f, -1.0f, 2.0f, 3.25f, -0.125f, 7.0f, 1e-3f, -2.5f}, {1, 2, 2, 1}, {0, 0, 3, 3});
}

FeatureDataset random_dataset(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> dim(1, 6), n(1, 40), k(2, 5), doms(1, 4);
  std::normal_distribution<float> g(0.0f, 100.0f);
  const auto d = static_cast<std::size_t>(dim(rng));
  const auto rows = static_cast<std::size_t>(n(rng));
  const auto classes = static_cast<unsigned>(k(rng));
  const int nd = doms(rng);
  std::vector<float> f(rows * d);
  for (auto& v : f) v = g(rng);
  std::vector<Label> y(rows);
  std::vector<DomainId> e(rows);
  std::uniform_int_distribution<unsigned> label(1, classes);
  std::uniform_int_distribution<int> dom(0, nd - 1);
  for (std::size_t i = 0; i < rows; ++i) {
    y[i] = static_cast<Label>(label(rng));
    e[i] = static_cast<DomainId>(10 * dom(rng));
  }
  return FeatureDataset(d, classes, std::move(f), std::move(y), std::move(e));
}

std::uint32_t u32_at(const std::vector<std::uint8_t>& b, std::size_t off) {
  return static_cast<std::uint32_t>(b[off]) | static_cast<std::uint32_t>(b[off + 1]) << 8 |
         static_cast<std::uint32_t>(b[off + 2]) << 16 | static_cast<std::uint32_t>(b[off + 3]) << 24;
}

}  // namespace

TEST_CASE("dataset validation") {
  CHECK_THROWS_AS(FeatureDataset(0, 2, {}, {1}, {0}), InvalidInput);
  CHECK_THROWS_AS(FeatureDataset(1, 1, {0.0f}, {1}, {0}), InvalidInput);
  CHECK_THROWS_AS(FeatureDataset(1, 2, {}, {}, {}), InvalidInput);
  CHECK_THROWS_AS(FeatureDataset(2, 2, {0.0f}, {1}, {0}), InvalidInput);
  CHECK_THROWS_AS(FeatureDataset(1, 2, {0.0f, 1.0f}, {1, 2}, {0}), InvalidInput);
  CHECK_THROWS_WITH_AS(FeatureDataset(1, 2, {0.0f, 1.0f}, {1, 3}, {0, 0}), "label out of range at record 1",
                       InvalidInput);
  CHECK_THROWS_AS(FeatureDataset(1, 2, {0.0f, 1.0f}, {0, 1}, {0, 0}), InvalidInput);
  CHECK_THROWS_AS(FeatureDataset(1, 2, {0.0f, std::nanf("")}, {1, 2}, {0, 0}), InvalidInput);
}

TEST_CASE("dataset accessors") {
  const auto ds = small();
  CHECK(ds.n_samples() == 4);
  CHECK(ds.dim() == 2);
  CHECK(ds.feature(1, 1) == 3.25f);
  CHECK(ds.column(0) == std::vector<double>{0.5, 2.0, -0.125, 1e-3f});
  CHECK(std::vector<DomainId>(ds.domain_ids().begin(), ds.domain_ids().end()) == std::vector<DomainId>{0, 3});
  const std::vector<double> w{2.0, -1.0};
  const auto p = ds.project(w);
  CHECK(p[0] == doctest::Approx(2.0));
  CHECK(p[1] == doctest::Approx(0.75));
  CHECK_THROWS_AS(ds.column(2), InvalidInput);
  CHECK_THROWS_AS(ds.project(std::vector<double>{1.0}), InvalidInput);
}

TEST_CASE("OODF layout is little-endian with the documented header") {
  const auto bytes = encode_oodf(small());
  REQUIRE(bytes.size() == 28 + 4 * 2 * 4 + 4 * 2 + 4 * 2);
  CHECK(std::memcmp(bytes.data(), "OODF", 4) == 0);
  CHECK(u32_at(bytes, 4) == 1);
  CHECK(u32_at(bytes, 8) == 4);
  CHECK(u32_at(bytes, 12) == 0);
  CHECK(u32_at(bytes, 16) == 2);
  CHECK(u32_at(bytes, 20) == 2);
  CHECK(u32_at(bytes, 24) == 2);
  float first = 0.0f;
  const std::uint32_t raw = u32_at(bytes, 28);
  std::memcpy(&first, &raw, 4);
  CHECK(first == 0.5f);
  CHECK(bytes[28 + 32] == 1);      // first label
  CHECK(bytes[28 + 32 + 8 + 4] == 3);  // third domain id
}

TEST_CASE("OODF round trip") {
  SUBCASE("n=4, d=2, K=2") {
    const auto ds = small();
    const auto back = decode_oodf(encode_oodf(ds));
    CHECK(back == ds);
    CHECK(back.n_samples() == 4);
    CHECK(back.dim() == 2);
    CHECK(back.n_classes() == 2);
  }
  SUBCASE("single sample, single feature") {
    const FeatureDataset one(1, 2, {42.0f}, {2}, {7});
    CHECK(decode_oodf(encode_oodf(one)) == one);
  }
  SUBCASE("randomized datasets via files") {
    TempDir dir;
    std::mt19937_64 rng(11);
    for (int i = 0; i < 50; ++i) {
      const auto ds = random_dataset(rng);
      write_dataset(ds, dir / "r.oodf");
      CHECK(load_dataset(dir / "r.oodf") == ds);
      write_dataset_csv(ds, dir / "r.csv");
      CHECK(load_dataset_csv(dir / "r.csv", ds.n_classes()) == ds);
    }
  }
}

TEST_CASE("OODF decoding errors") {
  auto bytes = encode_oodf(small());
  SUBCASE("label beyond K") {
    bytes[28 + 32 + 2] = 3;  // record 1
    CHECK_THROWS_WITH_AS(decode_oodf(bytes), doctest::Contains("label out of range at record 1"), FormatError);
  }
  SUBCASE("truncated mid-feature block") {
    bytes.resize(28 + 10);
    CHECK_THROWS_WITH_AS(decode_oodf(bytes), doctest::Contains("truncated payload"), FormatError);
  }
  SUBCASE("trailing bytes") {
    bytes.push_back(0);
    CHECK_THROWS_WITH_AS(decode_oodf(bytes), doctest::Contains("trailing bytes"), FormatError);
  }
  SUBCASE("bad magic") {
    bytes[0] = 'X';
    CHECK_THROWS_WITH_AS(decode_oodf(bytes), doctest::Contains("magic"), FormatError);
  }
  SUBCASE("header cut short") {
    bytes.resize(12);
    CHECK_THROWS_WITH_AS(decode_oodf(bytes), doctest::Contains("byte offset 12"), FormatError);
  }
  SUBCASE("unsupported version") {
    bytes[4] = 2;
    CHECK_THROWS_AS(decode_oodf(bytes), FormatError);
  }
  SUBCASE("domain count mismatch") {
    bytes[24] = 3;
    CHECK_THROWS_WITH_AS(decode_oodf(bytes), doctest::Contains("declares 3 domains"), FormatError);
  }
  SUBCASE("huge n does not allocate") {
    bytes[15] = 0x7f;
    CHECK_THROWS_WITH_AS(decode_oodf(bytes), doctest::Contains("truncated payload"), FormatError);
  }
}

TEST_CASE("file I/O errors") {
  TempDir dir;
  CHECK_THROWS_AS(write_dataset(small(), ""), RuntimeFailure);
  CHECK_THROWS_AS(write_dataset(small(), dir / "missing/sub/x.oodf"), RuntimeFailure);
  CHECK_THROWS_AS(load_dataset(dir / "absent.oodf"), InvalidInput);
  write_file_atomic(dir / "bad.oodf", std::string_view("OODFxx"));
  CHECK_THROWS_WITH_AS(load_dataset(dir / "bad.oodf"), doctest::Contains("bad.oodf"), FormatError);
}

TEST_CASE("atomic writes leave no temporary files") {
  TempDir dir;
  write_file_atomic(dir / "a.txt", std::string_view("first"));
  write_file_atomic(dir / "a.txt", std::string_view("second"));
  CHECK(read_file_text(dir / "a.txt") == "second");
  std::size_t files = 0;
  for ([[maybe_unused]] const auto& entry : std::filesystem::directory_iterator(dir.path)) ++files;
  CHECK(files == 1);
}

TEST_CASE("CSV datasets") {
  TempDir dir;
  write_file_atomic(dir / "d.csv", std::string_view("f0,f1,label,domain\n1.5,2,1,0\n-3,4e-2,2,1\n\n"));
  const auto ds = load_dataset(dir / "d.csv");
  CHECK(ds.n_samples() == 2);
  CHECK(ds.n_classes() == 2);
  CHECK(ds.feature(1, 1) == 4e-2f);
  write_file_atomic(dir / "bad_header.csv", std::string_view("a,b,label,domain\n1,2,1,0\n"));
  CHECK_THROWS_AS(load_dataset(dir / "bad_header.csv"), FormatError);
  write_file_atomic(dir / "bad_cell.csv", std::string_view("f0,label,domain\nx,1,0\n"));
  CHECK_THROWS_WITH_AS(load_dataset(dir / "bad_cell.csv"), doctest::Contains("line 2"), FormatError);
  write_file_atomic(dir / "short.csv", std::string_view("f0,label,domain\n1,1\n"));
  CHECK_THROWS_AS(load_dataset(dir / "short.csv"), FormatError);
}

TEST_CASE("domain splits") {
  const auto s = DomainSplit::make({2, 1, 2}, {3, 1, 2});
  CHECK(s.avail == std::vector<DomainId>{1, 2});
  CHECK(s.all == std::vector<DomainId>{1, 2, 3});
  CHECK_THROWS_AS(DomainSplit::make({}, {1}), InvalidInput);
  CHECK_THROWS_AS(DomainSplit::make({4}, {1, 2}), InvalidInput);
}

TEST_CASE("manifest parsing") {
  const std::string two = R"({"models": [
    {"model_id": "a", "feature_file": "feats/a.oodf", "val_accuracy": 0.85},
    {"model_id": "b", "feature_file": {"avail": "/abs/b.oodf", "all": "b_all.oodf"}, "val_accuracy": 0.88,
     "metadata": {"seed": 3, "algo": "erm"}}]})";
  const auto m = parse_manifest(two, "/base");
  REQUIRE(m.entries.size() == 2);
  CHECK(m.entries[0].avail_file == std::filesystem::path("/base/feats/a.oodf"));
  CHECK(!m.entries[0].all_file);
  CHECK(m.entries[1].avail_file == std::filesystem::path("/abs/b.oodf"));
  CHECK(*m.entries[1].all_file == std::filesystem::path("/base/b_all.oodf"));
  CHECK(m.entries[1].val_accuracy == 0.88);
  CHECK(m.entries[1].metadata.at("seed") == "3");
  CHECK(m.entries[1].metadata.at("algo") == "erm");

  const auto bare = parse_manifest(R"([{"model_id": "x", "feature_file": "x.oodf", "val_accuracy": 1}])");
  CHECK(bare.entries.size() == 1);

  CHECK_THROWS_WITH_AS(parse_manifest(R"([{"model_id": "x", "feature_file": "x", "val_accuracy": 0.5},
                                          {"model_id": "x", "feature_file": "y", "val_accuracy": 0.6}])"),
                       doctest::Contains("duplicate"), FormatError);
  CHECK_THROWS_AS(parse_manifest(R"([{"model_id": "x", "feature_file": "x", "val_accuracy": 1.2}])"), FormatError);
  CHECK_THROWS_AS(parse_manifest(R"([{"model_id": "x", "val_accuracy": 0.2}])"), FormatError);
  CHECK_THROWS_AS(parse_manifest(R"({"entries": []})"), FormatError);
  CHECK_THROWS_AS(parse_manifest("{not json"), FormatError);
}

TEST_CASE("manifest round trip keeps relative paths") {
  TempDir dir;
  ModelManifest m;
  m.entries.push_back({"m1", dir / "models/m1.oodf", std::nullopt, 0.75, {{"k", "v"}}});
  m.entries.push_back({"m2", dir / "models/m2.oodf", dir / "models/m2_all.oodf", 0.5, {}});
  write_manifest(m, dir / "manifest.json");
  CHECK(read_file_text(dir / "manifest.json").find("models/m1.oodf") != std::string::npos);
  const auto back = load_manifest(dir / "manifest.json");
  REQUIRE(back.entries.size() == 2);
  CHECK(back.entries[0].avail_file.lexically_normal() == (dir / "models/m1.oodf").lexically_normal());
  CHECK(back.entries[1].all_file->lexically_normal() == (dir / "models/m2_all.oodf").lexically_normal());
  CHECK(back.entries[0].metadata == m.entries[0].metadata);
  CHECK(back.entries[1].val_accuracy == 0.5);
}

TEST_CASE("format_double round-trips") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int i = 0; i < 1000; ++i) {
    const double v = u(rng) * std::pow(10.0, static_cast<int>(rng() % 20) - 10);
    CHECK(std::stod(format_double(v)) == v);
  }
  CHECK(format_double(0.0) == "0");
  CHECK(format_double(0.25) == "0.25");
}
