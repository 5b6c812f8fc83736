#include "oodsel/expansion.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "oodsel/error.hpp"
#include "oodsel/parallel.hpp"
#include "oodsel/textio.hpp"

namespace oodsel {
namespace {

// Right-closed bin of x over [0, upper] split into n bins; ratios within 1e-9
// of an edge snap onto it.
std::size_t bin_of(double x, double upper, std::size_t n) {
  const double r = std::ceil(x * static_cast<double>(n) / upper - 1e-9);
  if (r <= 1.0) return 0;
  return std::min(static_cast<std::size_t>(r) - 1, n - 1);
}

double parse_field(std::string_view s, std::size_t line) {
  s = trim(s);
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw FormatError("invalid number '" + std::string(s) + "' at cloud CSV line " + std::to_string(line));
  return v;
}

}  // namespace

void FeatureCloud::validate() const {
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& p = points[i];
    for (double v : {p.v_avail, p.v_all, p.informativeness})
      if (!std::isfinite(v) || v < 0.0)
        throw InvalidInput("cloud point " + std::to_string(i) + " ('" + p.feature_tag +
                           "') has a negative or non-finite coordinate");
    if (p.feature_tag.find_first_of(",\n") != std::string::npos)
      throw InvalidInput("cloud tag '" + p.feature_tag + "' contains a comma or newline");
  }
}

std::string FeatureCloud::to_csv() const {
  std::string out = "feature_tag,v_avail,v_all,informativeness\n";
  for (const auto& p : points)
    out += p.feature_tag + "," + format_double(p.v_avail) + "," + format_double(p.v_all) + "," +
           format_double(p.informativeness) + "\n";
  return out;
}

FeatureCloud FeatureCloud::from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || trim(line) != "feature_tag,v_avail,v_all,informativeness")
    throw FormatError("cloud CSV header must be feature_tag,v_avail,v_all,informativeness");
  FeatureCloud cloud;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split(trim(line), ',');
    if (cells.size() != 4) throw FormatError("expected 4 columns at cloud CSV line " + std::to_string(line_no));
    cloud.points.push_back({parse_field(cells[1], line_no), parse_field(cells[2], line_no),
                            parse_field(cells[3], line_no), std::string(trim(cells[0]))});
  }
  cloud.validate();
  return cloud;
}

FeatureCloud build_cloud(const std::vector<TaggedMetrics>& avail, const std::vector<TaggedMetrics>& all) {
  std::map<std::string, const TaggedMetrics*> by_tag;
  for (const auto& m : all)
    if (!by_tag.emplace(m.tag, &m).second) throw InvalidInput("duplicate feature tag '" + m.tag + "'");
  if (avail.size() != all.size())
    throw InvalidInput("tag mismatch: " + std::to_string(avail.size()) + " available vs " +
                       std::to_string(all.size()) + " full-domain metrics");
  FeatureCloud cloud;
  for (const auto& a : avail) {
    const auto it = by_tag.find(a.tag);
    if (it == by_tag.end()) throw InvalidInput("tag mismatch: '" + a.tag + "' has no full-domain metrics");
    cloud.points.push_back({a.variation, it->second->variation, a.informativeness, a.tag});
  }
  cloud.validate();
  return cloud;
}

FeatureCloud cloud_from_dataset(const FeatureDataset& ds, const DomainSplit& split, const DivergenceKind& kind,
                                const DensityConfig& cfg) {
  kind.validate();
  const auto avail = check_domains(ds, split.avail);
  const auto all = check_domains(ds, split.all);
  FeatureCloud cloud;
  cloud.points.resize(ds.dim());
  parallel_for(ds.dim(), [&](std::size_t j) {
    const auto values = ds.column(j);
    const ConditionalDensities dens(ds, values, cfg);
    cloud.points[j] = {dens.variation(avail, kind), dens.variation(all, kind), dens.informativeness(avail, kind),
                       std::to_string(j)};
  });
  return cloud;
}

double ExpansionEstimate::at(double x) const {
  if (envelope.empty()) throw InvalidInput("empty expansion estimate");
  const double upper = bin_edges.back();
  if (x > upper) return std::max(envelope.back(), x);
  return envelope[bin_of(std::max(x, 0.0), upper, envelope.size())];
}

std::string ExpansionEstimate::to_csv() const {
  std::string out = "bin_lo,bin_hi,envelope\n";
  for (std::size_t b = 0; b < envelope.size(); ++b)
    out += format_double(bin_edges[b]) + "," + format_double(bin_edges[b + 1]) + "," + format_double(envelope[b]) +
           "\n";
  return out;
}

ExpansionEstimate estimate_expansion(const FeatureCloud& cloud, double delta, std::size_t n_bins) {
  cloud.validate();
  if (n_bins < 2) throw InvalidInput("expansion estimate needs n_bins >= 2");
  if (!(delta >= 0.0) || !std::isfinite(delta)) throw InvalidInput("delta must be finite and >= 0");

  double upper = 0.0;
  for (const auto& p : cloud.points) upper = std::max(upper, p.v_avail);
  if (!(upper > 0.0)) upper = 1e-9;

  ExpansionEstimate est;
  est.delta = delta;
  est.bin_edges.resize(n_bins + 1);
  for (std::size_t b = 0; b <= n_bins; ++b)
    est.bin_edges[b] = b == n_bins ? upper : upper * static_cast<double>(b) / static_cast<double>(n_bins);

  std::vector<double> raw(n_bins, 0.0);
  for (const auto& p : cloud.points) {
    if (p.informativeness < delta) continue;
    ++est.n_points_used;
    auto& slot = raw[bin_of(p.v_avail, upper, n_bins)];
    slot = std::max(slot, p.v_all);
  }
  if (est.n_points_used == 0)
    throw InvalidInput("delta too large: no feature has informativeness >= " + format_double(delta));

  est.envelope.resize(n_bins);
  double running = 0.0;
  for (std::size_t b = 0; b < n_bins; ++b) {
    running = std::max(running, raw[b]);
    est.envelope[b] = std::max(running, est.bin_edges[b + 1]);
  }
  return est;
}

LearnabilityVerdict check_learnability(const FeatureCloud& cloud, double delta, double x0, double y0) {
  cloud.validate();
  if (!(x0 > 0.0) || !(y0 > 0.0)) throw InvalidInput("x0 and y0 must be positive");
  LearnabilityVerdict v;
  v.delta = delta;
  v.x0 = x0;
  v.y0 = y0;
  std::vector<const CloudPoint*> violators;
  for (const auto& p : cloud.points) {
    if (p.informativeness < delta || p.v_avail > x0) continue;
    v.envelope_at_origin = std::max(v.envelope_at_origin, p.v_all);
    if (p.v_all > y0) violators.push_back(&p);
  }
  v.learnable = v.envelope_at_origin <= y0;
  std::sort(violators.begin(), violators.end(), [](const CloudPoint* a, const CloudPoint* b) {
    if (a->v_all != b->v_all) return a->v_all > b->v_all;
    return a->feature_tag < b->feature_tag;
  });
  for (std::size_t i = 0; i < violators.size() && i < 10; ++i) v.witnesses.push_back(violators[i]->feature_tag);
  return v;
}

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string xml_escape(const std::string& text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string ramp_color(double t) {
  t = std::clamp(t, 0.0, 1.0);
  const int r = static_cast<int>(std::lround(40 + 215 * t));
  const int g = static_cast<int>(std::lround(90 + 60 * (1.0 - std::abs(2 * t - 1))));
  const int b = static_cast<int>(std::lround(220 - 200 * t));
  char buf[16];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, g, b);
  return buf;
}

}  // namespace

std::string render_cloud_svg(const FeatureCloud& cloud, const std::vector<ExpansionEstimate>& envelopes,
                             const std::string& title) {
  constexpr double W = 640, H = 520, left = 70, right = 30, top = 40, bottom = 60;
  const double pw = W - left - right, ph = H - top - bottom;
  double xmax = 0.0, ymax = 0.0, imax = 0.0;
  for (const auto& p : cloud.points) {
    xmax = std::max(xmax, p.v_avail);
    ymax = std::max(ymax, p.v_all);
    imax = std::max(imax, p.informativeness);
  }
  for (const auto& e : envelopes)
    for (double v : e.envelope) ymax = std::max(ymax, v);
  xmax = xmax > 0 ? xmax * 1.05 : 1.0;
  ymax = ymax > 0 ? ymax * 1.05 : 1.0;
  auto sx = [&](double x) { return left + pw * x / xmax; };
  auto sy = [&](double y) { return top + ph * (1.0 - y / ymax); };

  std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(W) + "\" height=\"" + fmt(H) +
                  "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (!title.empty()) s += "<text x=\"" + fmt(W / 2) + "\" y=\"22\" text-anchor=\"middle\">" + xml_escape(title) + "</text>\n";
  s += "<rect x=\"" + fmt(left) + "\" y=\"" + fmt(top) + "\" width=\"" + fmt(pw) + "\" height=\"" + fmt(ph) +
       "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double xv = xmax * i / 4.0, yv = ymax * i / 4.0;
    s += "<text x=\"" + fmt(sx(xv)) + "\" y=\"" + fmt(top + ph + 18) + "\" text-anchor=\"middle\">" + fmt(xv) +
         "</text>\n";
    s += "<text x=\"" + fmt(left - 8) + "\" y=\"" + fmt(sy(yv) + 4) + "\" text-anchor=\"end\">" + fmt(yv) +
         "</text>\n";
  }
  s += "<text x=\"" + fmt(left + pw / 2) + "\" y=\"" + fmt(H - 16) + "\" text-anchor=\"middle\">V(phi, E_avail)</text>\n";
  s += "<text transform=\"translate(18," + fmt(top + ph / 2) + ") rotate(-90)\" text-anchor=\"middle\">V(phi, E_all)</text>\n";
  const double diag = std::min(xmax, ymax);
  s += "<line x1=\"" + fmt(sx(0)) + "\" y1=\"" + fmt(sy(0)) + "\" x2=\"" + fmt(sx(diag)) + "\" y2=\"" + fmt(sy(diag)) +
       "\" stroke=\"gray\" stroke-dasharray=\"6,4\"/>\n";
  for (const auto& p : cloud.points)
    s += "<circle cx=\"" + fmt(sx(p.v_avail)) + "\" cy=\"" + fmt(sy(p.v_all)) + "\" r=\"2\" fill=\"" +
         ramp_color(imax > 0 ? p.informativeness / imax : 0.0) + "\" fill-opacity=\"0.7\"/>\n";
  for (const auto& e : envelopes) {
    std::string path = "M" + fmt(sx(0)) + "," + fmt(sy(0));
    for (std::size_t b = 0; b < e.envelope.size(); ++b)
      path += " L" + fmt(sx(e.bin_edges[b])) + "," + fmt(sy(e.envelope[b])) + " L" + fmt(sx(e.bin_edges[b + 1])) +
              "," + fmt(sy(e.envelope[b]));
    s += "<path d=\"" + path + "\" fill=\"none\" stroke=\"#d62728\" stroke-width=\"2\"/>\n";
    s += "<text x=\"" + fmt(sx(e.bin_edges.back()) - 4) + "\" y=\"" + fmt(sy(e.envelope.back()) - 6) +
         "\" text-anchor=\"end\" fill=\"#d62728\">delta=" + fmt(e.delta) + "</text>\n";
  }
  s += "</svg>\n";
  return s;
}

}  // namespace oodsel
