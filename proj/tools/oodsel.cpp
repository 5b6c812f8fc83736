// oodsel: command-line front end for the OOD feature metrics, model selection,
// expansion analysis and synthetic generators.
//
// Exit status: 0 on success, 1 on invalid input or usage, 2 on runtime failure.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "oodsel/check.hpp"
#include "oodsel/dataio.hpp"
#include "oodsel/error.hpp"
#include "oodsel/expansion.hpp"
#include "oodsel/metrics.hpp"
#include "oodsel/parallel.hpp"
#include "oodsel/pipeline.hpp"
#include "oodsel/selection.hpp"
#include "oodsel/synthetic.hpp"
#include "oodsel/textio.hpp"

namespace fs = std::filesystem;
using namespace oodsel;

namespace {

struct MetricFlags {
  std::string divergence = "tv";
  double kl_floor = 1e-12;
  std::string bandwidth = "silverman";
  std::size_t grid_points = 512;
  double grid_padding = 3.0;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--divergence", divergence, "tv, symkl or l2")->capture_default_str();
    cmd->add_option("--kl-floor", kl_floor, "density floor applied before logs in symkl")->capture_default_str();
    cmd->add_option("--bandwidth", bandwidth, "silverman, scott or a positive number")->capture_default_str();
    cmd->add_option("--grid-points", grid_points, "KDE grid size")->capture_default_str();
    cmd->add_option("--grid-padding", grid_padding, "grid padding in bandwidths")->capture_default_str();
  }

  DivergenceKind kind() const {
    auto k = DivergenceKind::parse(divergence, kl_floor);
    k.validate();
    return k;
  }

  DensityConfig density() const {
    DensityConfig cfg;
    if (bandwidth == "silverman") {
      cfg.bandwidth = BandwidthRule::silverman();
    } else if (bandwidth == "scott") {
      cfg.bandwidth = BandwidthRule::scott();
    } else {
      double h = 0.0;
      const auto res = std::from_chars(bandwidth.data(), bandwidth.data() + bandwidth.size(), h);
      if (res.ec != std::errc{} || res.ptr != bandwidth.data() + bandwidth.size() || !(h > 0.0) ||
          !std::isfinite(h))
        throw InvalidInput("--bandwidth must be silverman, scott or a positive number, got '" + bandwidth + "'");
      cfg.bandwidth = BandwidthRule::fixed(h);
    }
    cfg.grid.points = grid_points;
    cfg.grid.padding = grid_padding;
    cfg.grid.validate();
    return cfg;
  }
};

std::vector<DomainId> parse_domain_list(const std::string& text) {
  std::vector<DomainId> out;
  for (auto cell : split(text, ',')) {
    cell = trim(cell);
    unsigned v = 0;
    const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (cell.empty() || res.ec != std::errc{} || res.ptr != cell.data() + cell.size() || v > 65535)
      throw InvalidInput("invalid domain id '" + std::string(cell) + "' in '" + text + "'");
    out.push_back(static_cast<DomainId>(v));
  }
  return out;
}

fs::path sidecar_for(const fs::path& data) {
  auto p = data;
  p.replace_extension(".json");
  return p;
}

std::optional<std::vector<DomainId>> sidecar_domains(const fs::path& sidecar, const char* key) {
  if (sidecar.empty() || !fs::exists(sidecar)) return std::nullopt;
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(read_file_text(sidecar));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("sidecar " + sidecar.string() + ": " + e.what());
  }
  if (!doc.contains(key)) return std::nullopt;
  try {
    return doc.at(key).get<std::vector<DomainId>>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("sidecar " + sidecar.string() + ": '" + key + "' must be a list of domain ids");
  }
}

// "all": every domain in the file. "avail": the sidecar's avail_domains, or
// every domain when no sidecar is found. Otherwise a comma-separated id list.
std::vector<DomainId> resolve_domains(const FeatureDataset& ds, const fs::path& data, const std::string& spec,
                                      const std::string& sidecar_flag) {
  if (spec == "all") return {ds.domain_ids().begin(), ds.domain_ids().end()};
  if (spec == "avail") {
    const fs::path sidecar = sidecar_flag.empty() ? sidecar_for(data) : fs::path(sidecar_flag);
    if (!sidecar_flag.empty() && !fs::exists(sidecar)) throw InvalidInput("sidecar not found: " + sidecar.string());
    if (auto d = sidecar_domains(sidecar, "avail_domains")) return check_domains(ds, *d);
    warn("no sidecar with avail_domains for " + data.string() + "; using every domain in the file");
    return {ds.domain_ids().begin(), ds.domain_ids().end()};
  }
  return check_domains(ds, parse_domain_list(spec));
}

std::string join_ids(const std::vector<DomainId>& ids) {
  std::string s;
  for (std::size_t i = 0; i < ids.size(); ++i) s += (i ? " " : "") + std::to_string(ids[i]);
  return s;
}

std::string domain_label(const std::string& spec, const std::vector<DomainId>& ids) {
  return spec == "avail" || spec == "all" ? spec : join_ids(ids);
}

std::string short_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

void require_positive(double v, const char* flag) {
  if (!(v > 0.0) || !std::isfinite(v)) throw InvalidInput(std::string(flag) + " must be positive");
}

// --- variation / informativeness -------------------------------------------

struct ReportArgs {
  std::string data;
  std::string domains = "avail";
  std::string sidecar;
  std::string out;
  MetricFlags metric;
};

void add_report_options(CLI::App* cmd, ReportArgs& a) {
  cmd->add_option("--data", a.data, "feature file (OODF or CSV)")->required();
  cmd->add_option("--domains", a.domains, "avail, all or a comma-separated id list")->capture_default_str();
  cmd->add_option("--sidecar", a.sidecar, "JSON with avail_domains (default: <data>.json)");
  cmd->add_option("--out", a.out, "output CSV")->required();
  a.metric.add_to(cmd);
}

int run_report(const ReportArgs& a, bool informativeness) {
  const auto kind = a.metric.kind();
  const auto cfg = a.metric.density();
  const auto ds = load_dataset(a.data);
  const auto domains = resolve_domains(ds, a.data, a.domains, a.sidecar);
  const auto report = variation_report(ds, domains, domain_label(a.domains, domains), kind, cfg);
  double mean = 0.0;
  double best = 0.0;
  std::string csv;
  if (informativeness) {
    csv = "feature_index,informativeness,divergence,domain_set\n";
    for (const auto& r : report.rows)
      csv += std::to_string(r.feature_index) + "," + format_double(r.informativeness) + "," + report.divergence +
             "," + report.domain_set + "\n";
  } else {
    csv = report.to_csv();
  }
  for (const auto& r : report.rows) {
    const double v = informativeness ? r.informativeness : r.variation;
    mean += v;
    best = std::max(best, v);
  }
  mean /= static_cast<double>(report.rows.size());
  write_file_atomic(a.out, csv);
  std::printf("%s: %zu features, domains {%s}, %s mean %s max %s -> %s\n",
              informativeness ? "informativeness" : "variation", report.rows.size(), join_ids(domains).c_str(),
              kind.name().c_str(), short_num(mean).c_str(), short_num(best).c_str(), a.out.c_str());
  return 0;
}

// --- projected ---------------------------------------------------------------

struct ProjectedArgs {
  ReportArgs base;
  std::size_t directions = 256;
  std::uint64_t seed = 7;
  std::size_t refine = 0;
  std::string json;
};

int run_projected(const ProjectedArgs& a) {
  const auto kind = a.base.metric.kind();
  const auto cfg = a.base.metric.density();
  const auto ds = load_dataset(a.base.data);
  const auto domains = resolve_domains(ds, a.base.data, a.base.domains, a.base.sidecar);
  ProjectionOptions opts;
  opts.n_directions = a.directions;
  opts.seed = a.seed;
  opts.refine_steps = a.refine;
  const auto pm = projected_metrics(ds, domains, kind, opts, cfg);
  write_file_atomic(a.base.out, pm.to_csv());
  if (!a.json.empty()) {
    auto coeffs = [](const Direction& d) { return std::vector<double>(d.coefficients().begin(), d.coefficients().end()); };
    const nlohmann::json doc = {{"divergence", kind.name()},
                                {"domains", domains},
                                {"v_sup", pm.v_sup},
                                {"v_sup_direction", coeffs(pm.v_sup_direction)},
                                {"i_inf", pm.i_inf},
                                {"i_inf_direction", coeffs(pm.i_inf_direction)},
                                {"n_directions", pm.n_directions},
                                {"seed", pm.seed},
                                {"refined", pm.refined},
                                {"note", "v_sup is a lower bound and i_inf an upper bound over sampled directions"}};
    write_file_atomic(a.json, doc.dump(2) + "\n");
  }
  std::printf("projected: %zu directions, domains {%s}, %s v_sup %s i_inf %s -> %s\n", pm.evaluations.size(),
              join_ids(domains).c_str(), kind.name().c_str(), short_num(pm.v_sup).c_str(),
              short_num(pm.i_inf).c_str(), a.base.out.c_str());
  return 0;
}

// --- select ------------------------------------------------------------------

struct SelectArgs {
  std::string manifest;
  std::string r0 = "auto";
  double acc_window = 0.1;
  std::string domains = "all";
  bool score_all = false;
  std::string out;
  MetricFlags metric;
};

int run_select(const SelectArgs& a) {
  ManifestSelectionOptions opts;
  opts.selection.acc_window = a.acc_window;
  opts.selection.divergence = a.metric.kind();
  if (a.r0 != "auto") {
    double v = 0.0;
    const auto res = std::from_chars(a.r0.data(), a.r0.data() + a.r0.size(), v);
    if (res.ec != std::errc{} || res.ptr != a.r0.data() + a.r0.size())
      throw InvalidInput("--r0 must be 'auto' or a number, got '" + a.r0 + "'");
    opts.selection.r0 = v;
  }
  opts.selection.validate();
  opts.density = a.metric.density();
  if (a.domains != "all") opts.avail_domains = parse_domain_list(a.domains);
  opts.score_all = a.score_all;
  const auto manifest = load_manifest(a.manifest);
  const auto sel = select_from_manifest(manifest, opts);
  write_file_atomic(a.out, sel.to_csv());
  const auto& top = sel.result.ranked.front();
  std::printf("select: %zu models (%zu scored), r0 %s, top %s (acc %s, V %s) -> %s\n", manifest.entries.size(),
              sel.result.ranked.size(), short_num(sel.result.r0_used).c_str(), top.model_id.c_str(),
              short_num(top.val_accuracy).c_str(), short_num(top.variation).c_str(), a.out.c_str());
  return 0;
}

// --- expansion / plot --------------------------------------------------------

struct ExpansionArgs {
  std::string cloud;
  std::string data;
  std::string avail = "avail";
  std::string all = "all";
  std::string sidecar;
  std::vector<double> deltas{0.0};
  std::size_t bins = 40;
  double x0 = 0.05;
  double y0 = 0.2;
  std::string out;
  std::string cloud_out;
  std::string svg;
  std::string json;
  MetricFlags metric;
};

void check_deltas(const std::vector<double>& deltas, std::size_t bins) {
  for (double d : deltas)
    if (!(d >= 0.0) || !std::isfinite(d)) throw InvalidInput("--delta must be >= 0");
  if (bins < 2) throw InvalidInput("--bins must be >= 2");
}

std::vector<ExpansionEstimate> estimates(const FeatureCloud& cloud, std::vector<double> deltas, std::size_t bins) {
  std::sort(deltas.begin(), deltas.end());
  deltas.erase(std::unique(deltas.begin(), deltas.end()), deltas.end());
  std::vector<ExpansionEstimate> out;
  for (double d : deltas) out.push_back(estimate_expansion(cloud, d, bins));
  return out;
}

int run_expansion(const ExpansionArgs& a) {
  check_deltas(a.deltas, a.bins);
  require_positive(a.x0, "--x0");
  require_positive(a.y0, "--y0");
  if (a.cloud.empty() == a.data.empty()) throw InvalidInput("give exactly one of --cloud or --data");
  FeatureCloud cloud;
  if (!a.cloud.empty()) {
    cloud = FeatureCloud::from_csv(read_file_text(a.cloud));
  } else {
    const auto kind = a.metric.kind();
    const auto cfg = a.metric.density();
    const auto ds = load_dataset(a.data);
    auto avail = resolve_domains(ds, a.data, a.avail, a.sidecar);
    std::vector<DomainId> all;
    if (a.all == "all") {
      const fs::path sidecar = a.sidecar.empty() ? sidecar_for(a.data) : fs::path(a.sidecar);
      auto d = sidecar_domains(sidecar, "all_domains");
      all = d ? check_domains(ds, *d) : std::vector<DomainId>(ds.domain_ids().begin(), ds.domain_ids().end());
    } else {
      all = resolve_domains(ds, a.data, a.all, a.sidecar);
    }
    cloud = cloud_from_dataset(ds, DomainSplit::make(avail, all), kind, cfg);
  }
  if (cloud.points.empty()) throw InvalidInput("the feature cloud is empty");
  const auto ests = estimates(cloud, a.deltas, a.bins);

  std::string csv = "delta,bin_lo,bin_hi,envelope\n";
  nlohmann::json verdicts = nlohmann::json::array();
  std::string summary;
  for (const auto& e : ests) {
    const auto body = e.to_csv();
    std::size_t pos = body.find('\n') + 1;
    while (pos < body.size()) {
      const auto end = body.find('\n', pos);
      csv += format_double(e.delta) + "," + body.substr(pos, end - pos) + "\n";
      pos = end + 1;
    }
    const auto v = check_learnability(cloud, e.delta, a.x0, a.y0);
    verdicts.push_back({{"delta", v.delta},
                        {"learnable", v.learnable},
                        {"envelope_at_origin", v.envelope_at_origin},
                        {"witnesses", v.witnesses},
                        {"x0", v.x0},
                        {"y0", v.y0},
                        {"points_used", e.n_points_used}});
    summary += " delta " + short_num(e.delta) + (v.learnable ? " learnable" : " unlearnable") + ";";
  }
  if (!a.cloud_out.empty()) write_file_atomic(a.cloud_out, cloud.to_csv());
  if (!a.svg.empty()) write_file_atomic(a.svg, render_cloud_svg(cloud, ests));
  if (!a.json.empty()) {
    const nlohmann::json doc = {
        {"verdicts", verdicts},
        {"note", "verdicts cover the sampled features only; they do not certify the whole feature space"}};
    write_file_atomic(a.json, doc.dump(2) + "\n");
  }
  write_file_atomic(a.out, csv);
  std::printf("expansion: %zu points;%s -> %s\n", cloud.points.size(), summary.c_str(), a.out.c_str());
  return 0;
}

struct PlotArgs {
  std::string cloud;
  std::vector<double> deltas;
  std::size_t bins = 40;
  std::string title;
  std::string out;
};

int run_plot(const PlotArgs& a) {
  check_deltas(a.deltas, a.bins);
  const auto cloud = FeatureCloud::from_csv(read_file_text(a.cloud));
  if (cloud.points.empty()) throw InvalidInput("the feature cloud is empty");
  const auto ests = estimates(cloud, a.deltas, a.bins);
  write_file_atomic(a.out, render_cloud_svg(cloud, ests, a.title));
  std::printf("plot: %zu points, %zu envelope(s) -> %s\n", cloud.points.size(), ests.size(), a.out.c_str());
  return 0;
}

// --- synth -------------------------------------------------------------------

void write_generated(const fs::path& dir, const std::string& stem, const FeatureDataset& ds,
                     const std::string& sidecar, bool csv) {
  fs::create_directories(dir);
  write_dataset(ds, dir / (stem + ".oodf"));
  write_file_atomic(dir / (stem + ".json"), sidecar);
  if (csv) write_dataset_csv(ds, dir / (stem + ".csv"));
  std::printf("synth %s: n=%zu d=%zu domains {%s} -> %s\n", stem.c_str(), ds.n_samples(), ds.dim(),
              join_ids({ds.domain_ids().begin(), ds.domain_ids().end()}).c_str(),
              (dir / (stem + ".oodf")).string().c_str());
}

int run_zoo(const ZooSpec& spec, const fs::path& dir) {
  const auto zoo = build_colored_mnist_zoo(spec);
  fs::create_directories(dir / "models");
  ModelManifest manifest;
  std::string csv = "model_id,angle_deg,val_accuracy,ood_accuracy\n";
  for (const auto& m : zoo) {
    const auto file = dir / "models" / (m.model_id + ".oodf");
    write_dataset(m.avail_features, file);
    manifest.entries.push_back({m.model_id,
                                file,
                                std::nullopt,
                                m.val_accuracy,
                                {{"angle_deg", format_double(m.angle_deg)},
                                 {"ood_accuracy", format_double(m.ood_accuracy)}}});
    csv += m.model_id + "," + format_double(m.angle_deg) + "," + format_double(m.val_accuracy) + "," +
           format_double(m.ood_accuracy) + "\n";
  }
  write_file_atomic(dir / "zoo.csv", csv);
  write_manifest(manifest, dir / "manifest.json");
  std::printf("synth zoo: %zu models -> %s\n", zoo.size(), (dir / "manifest.json").string().c_str());
  return 0;
}

int threads_from_env() {
  const char* env = std::getenv("OODSEL_THREADS");
  if (!env || !*env) return 0;
  int v = 0;
  const std::string_view s(env);
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size() || v < 0)
    throw InvalidInput("OODSEL_THREADS must be a nonnegative integer, got '" + std::string(s) + "'");
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"oodsel: feature-level OOD variation, informativeness, model selection and expansion analysis"};
  app.require_subcommand(1);
  app.fallthrough();
  std::optional<int> threads;
  app.add_option("--threads", threads, "worker threads (default: $OODSEL_THREADS, else all cores)")
      ->check(CLI::NonNegativeNumber);

  ReportArgs var_args;
  auto* variation = app.add_subcommand("variation", "per-feature variation report");
  add_report_options(variation, var_args);

  ReportArgs inf_args;
  auto* informativeness = app.add_subcommand("informativeness", "per-feature informativeness report");
  add_report_options(informativeness, inf_args);

  ProjectedArgs proj_args;
  auto* projected = app.add_subcommand("projected", "sup-variation / inf-informativeness over projections");
  add_report_options(projected, proj_args.base);
  projected->add_option("--directions", proj_args.directions, "random directions besides the axes")
      ->capture_default_str();
  projected->add_option("--seed", proj_args.seed, "direction seed")->capture_default_str();
  projected->add_option("--refine", proj_args.refine, "hill-climb steps from the best direction")
      ->capture_default_str();
  projected->add_option("--json", proj_args.json, "also write the extremal directions as JSON");

  SelectArgs sel_args;
  auto* select = app.add_subcommand("select", "rank the models of a manifest by accuracy - r0 * variation");
  select->add_option("--manifest", sel_args.manifest, "model manifest JSON")->required();
  select->add_option("--r0", sel_args.r0, "'auto' or a nonnegative number")->capture_default_str();
  select->add_option("--acc-window", sel_args.acc_window, "accuracy window for auto r0")->capture_default_str();
  select->add_option("--domains", sel_args.domains, "'all' domains of each feature file, or an id list")
      ->capture_default_str();
  select->add_flag("--score-all", sel_args.score_all, "compute variation for every model");
  select->add_option("--out", sel_args.out, "ranking CSV")->required();
  sel_args.metric.add_to(select);

  ExpansionArgs exp_args;
  auto* expansion = app.add_subcommand("expansion", "expansion envelope and learnability verdicts");
  expansion->add_option("--cloud", exp_args.cloud, "cloud CSV (feature_tag,v_avail,v_all,informativeness)");
  expansion->add_option("--data", exp_args.data, "feature file holding every domain");
  expansion->add_option("--avail", exp_args.avail, "available domains: avail (sidecar), all or an id list")
      ->capture_default_str();
  expansion->add_option("--all", exp_args.all, "full domain set: all or an id list")->capture_default_str();
  expansion->add_option("--sidecar", exp_args.sidecar, "JSON with avail_domains / all_domains");
  expansion->add_option("--delta", exp_args.deltas, "informativeness thresholds")->delimiter(',')->capture_default_str();
  expansion->add_option("--bins", exp_args.bins, "envelope bins")->capture_default_str();
  expansion->add_option("--x0", exp_args.x0, "learnability window on V_avail")->capture_default_str();
  expansion->add_option("--y0", exp_args.y0, "learnability threshold on V_all")->capture_default_str();
  expansion->add_option("--out", exp_args.out, "envelope CSV")->required();
  expansion->add_option("--cloud-out", exp_args.cloud_out, "write the cloud CSV");
  expansion->add_option("--svg", exp_args.svg, "write the scatter plot");
  expansion->add_option("--json", exp_args.json, "write the verdicts as JSON");
  exp_args.metric.add_to(expansion);

  PlotArgs plot_args;
  auto* plot = app.add_subcommand("plot", "SVG scatter of a feature cloud with envelopes");
  plot->add_option("--cloud", plot_args.cloud, "cloud CSV")->required();
  plot->add_option("--delta", plot_args.deltas, "draw the envelope for each threshold")->delimiter(',');
  plot->add_option("--bins", plot_args.bins, "envelope bins")->capture_default_str();
  plot->add_option("--title", plot_args.title, "plot title");
  plot->add_option("--out", plot_args.out, "output SVG")->required();

  auto* synth = app.add_subcommand("synth", "generate synthetic datasets with oracle sidecars");
  synth->require_subcommand(1);
  std::string synth_out;
  bool synth_csv = false;
  auto add_out = [&](CLI::App* cmd) {
    cmd->add_option("--out", synth_out, "output directory")->required();
    cmd->add_flag("--csv", synth_csv, "also write the dataset as CSV");
  };

  ColoredMnistSpec cm;
  auto* cm_cmd = synth->add_subcommand("colored-mnist", "feature-level Colored MNIST");
  cm_cmd->add_option("--e-avail", cm.e_avail, "available color-flip rates")->delimiter(',')->capture_default_str();
  cm_cmd->add_option("--e-all", cm.e_all, "all color-flip rates")->delimiter(',')->capture_default_str();
  cm_cmd->add_option("--n", cm.n_per_domain, "samples per domain")->capture_default_str();
  cm_cmd->add_option("--flip", cm.flip_prob, "label noise")->capture_default_str();
  cm_cmd->add_option("--shape-mean", cm.shape_mean, "shape feature separation")->capture_default_str();
  cm_cmd->add_option("--color-noise", cm.color_noise, "color feature noise sd")->capture_default_str();
  cm_cmd->add_option("--seed", cm.seed, "random seed")->capture_default_str();
  cm_cmd->add_flag("--exact-balance", cm.exact_balance, "equal label counts per domain");
  add_out(cm_cmd);

  GaussianLemmaSpec gl;
  auto* gl_cmd = synth->add_subcommand("gaussian-lemma", "two-feature Gaussian lower-bound family");
  gl_cmd->add_option("--t", gl.t, "variation scale")->capture_default_str();
  gl_cmd->add_option("--k", gl.k, "expansion factor")->capture_default_str();
  gl_cmd->add_option("--n", gl.n_per_domain, "samples per domain")->capture_default_str();
  gl_cmd->add_option("--seed", gl.seed, "random seed")->capture_default_str();
  gl_cmd->add_flag("--exact-balance", gl.exact_balance, "equal label counts per domain");
  add_out(gl_cmd);

  TrapSpec trap;
  std::string trap_variant = "strict";
  auto* trap_cmd = synth->add_subcommand("trap", "two-domain shift invisible to single coordinates");
  trap_cmd->add_option("--variant", trap_variant, "strict or paper")
      ->check(CLI::IsMember({"strict", "paper"}))
      ->capture_default_str();
  trap_cmd->add_option("--correlation", trap.correlation, "strict variant correlation")->capture_default_str();
  trap_cmd->add_option("--n", trap.n_per_domain, "samples per domain")->capture_default_str();
  trap_cmd->add_option("--seed", trap.seed, "random seed")->capture_default_str();
  add_out(trap_cmd);

  ZooSpec zoo;
  auto* zoo_cmd = synth->add_subcommand("zoo", "Colored MNIST model zoo with a manifest");
  zoo_cmd->add_option("--angles", zoo.angles_deg, "model mixing angles in degrees")
      ->delimiter(',')
      ->capture_default_str();
  zoo_cmd->add_option("--n", zoo.n_per_domain, "samples per domain")->capture_default_str();
  zoo_cmd->add_option("--shape-mean", zoo.shape_mean, "shape feature separation")->capture_default_str();
  zoo_cmd->add_option("--seed", zoo.seed, "random seed")->capture_default_str();
  zoo_cmd->add_option("--out", synth_out, "output directory")->required();

  std::string suite;
  std::vector<int> only;
  auto* check = app.add_subcommand("check", "run the acceptance suite");
  check->add_option("--suite", suite, "suite name")->required()->check(CLI::IsMember({"paper"}));
  check->add_option("--only", only, "criterion numbers")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    set_num_threads(threads ? *threads : threads_from_env());
    if (variation->parsed()) return run_report(var_args, false);
    if (informativeness->parsed()) return run_report(inf_args, true);
    if (projected->parsed()) return run_projected(proj_args);
    if (select->parsed()) return run_select(sel_args);
    if (expansion->parsed()) return run_expansion(exp_args);
    if (plot->parsed()) return run_plot(plot_args);
    if (cm_cmd->parsed()) {
      write_generated(synth_out, "colored-mnist", gen_colored_mnist(cm), sidecar_json(cm), synth_csv);
      return 0;
    }
    if (gl_cmd->parsed()) {
      write_generated(synth_out, "gaussian-lemma", gen_gaussian_lemma(gl), sidecar_json(gl), synth_csv);
      return 0;
    }
    if (trap_cmd->parsed()) {
      trap.variant = trap_variant == "paper" ? TrapSpec::Variant::paper : TrapSpec::Variant::strict;
      write_generated(synth_out, "trap", gen_trap(trap), sidecar_json(trap), synth_csv);
      return 0;
    }
    if (zoo_cmd->parsed()) return run_zoo(zoo, synth_out);
    if (check->parsed()) {
      CheckOptions opts;
      opts.only = only;
      for (int id : only)
        if (id < 1 || id > 8) throw InvalidInput("--only takes criterion numbers 1 to 8");
      opts.on_result = [](const CheckResult& r) {
        std::printf("%s\n", r.line().c_str());
        std::fflush(stdout);
      };
      int failed = 0;
      for (const auto& r : run_paper_suite(opts)) failed += r.passed ? 0 : 1;
      std::printf("check: %d criteria failed\n", failed);
      return failed == 0 ? 0 : 2;
    }
  } catch (const InvalidInput& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 1;
}
