#pragma once

// Report files written by the CLI: JSON per spec or check, a summary CSV and
// SVG decay plots. Every file carries the same provenance header. Timings are
// left out so that files do not depend on the machine or the thread count.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "rkl/checks.hpp"
#include "rkl/verify.hpp"

namespace rkl::report {

inline constexpr const char* kArtifactVersion = "1.0.0";
inline constexpr int kSchema = 1;

struct Header {
  std::string config_hash;
  std::string anchor;
};

/// FNV-1a, 64 bit, as 16 hex digits.
inline std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline nlohmann::ordered_json header_json(const Header& h) {
  return {{"schema", kSchema}, {"artifact_version", kArtifactVersion}, {"config_hash", h.config_hash},
          {"anchor", h.anchor}};
}

// JSON has no infinity; non-finite numbers become null.
inline nlohmann::ordered_json number(double x) {
  if (std::isfinite(x)) return x;
  return nullptr;
}

inline nlohmann::ordered_json to_json(const verify::RatioReport& r, const Header& h) {
  auto j = header_json(h);
  j["id"] = r.id;
  j["suite"] = r.suite;
  j["note"] = r.note;
  nlohmann::ordered_json argmax = nlohmann::ordered_json::object();
  for (std::size_t i = 0; i < r.coords.size() && i < r.argmax.size(); ++i) argmax[r.coords[i]] = r.argmax[i];
  j["sup_ratio"] = number(r.sup_ratio);
  j["sup_ratio_level0"] = number(r.sup_level0);
  j["drift"] = number(r.drift);
  j["argmax"] = argmax;
  j["samples"] = r.samples;
  j["errors"] = r.errors;
  if (!r.first_error.empty()) j["first_error"] = r.first_error;
  j["fitted_constant"] = number(r.fitted_constant);
  j["max_constant"] = r.max_constant ? number(*r.max_constant) : nullptr;
  j["verdict"] = r.pass ? "pass" : "fail";
  j["expected"] = r.expected_pass ? "pass" : "fail";
  j["as_expected"] = r.as_expected();
  if (!r.reason.empty()) j["reason"] = r.reason;
  return j;
}

inline nlohmann::ordered_json to_json(const checks::CheckReport& r, const Header& h) {
  auto j = header_json(h);
  j["id"] = r.id;
  j["verdict"] = r.pass ? "pass" : "fail";
  j["metric"] = number(r.metric);
  j["threshold"] = number(r.threshold);
  j["summary"] = r.summary;
  nlohmann::ordered_json details = nlohmann::ordered_json::object();
  for (const auto& [k, v] : r.details) details[k] = number(v);
  j["details"] = details;
  return j;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

inline void write_json(const std::filesystem::path& path, const nlohmann::ordered_json& j) {
  write_text(path, j.dump(2) + "\n");
}

inline std::string csv_header(const Header& h) {
  return "# artifact_version=" + std::string(kArtifactVersion) + " config_hash=" + h.config_hash +
         " anchor=" + h.anchor + "\n";
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

inline std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

/// One row per spec or check.
class SummaryTable {
 public:
  void add(const verify::RatioReport& r) {
    rows_.push_back({"estimate", r.id, r.anchor, r.pass ? "pass" : "fail", r.expected_pass ? "pass" : "fail",
                     num(r.sup_ratio), num(r.drift), std::to_string(r.samples)});
  }
  void add(const checks::CheckReport& r) {
    rows_.push_back({"check", r.id, r.anchor, r.pass ? "pass" : "fail", "pass", num(r.metric), "", ""});
  }
  std::string csv(const Header& h) const {
    std::string out = csv_header(h) + "kind,id,anchor,verdict,expected,value,drift,samples\n";
    for (const auto& row : rows_) {
      for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + csv_field(row[i]);
      out += "\n";
    }
    return out;
  }

 private:
  std::vector<std::vector<std::string>> rows_;
};

inline std::string mihlin_csv(const checks::MihlinResult& m, const Header& h) {
  std::string out = csv_header(h) + "family,n,weight,a2,variation,fixed_window_variation,envelope";
  for (double xi : m.xis) out += ",norm_xi=" + num(xi);
  out += "\n";
  for (const auto& s : m.series) {
    out += std::string(kernels::family_name(s.family)) + "," + std::to_string(s.n) + "," + csv_field(s.weight) +
           "," + num(s.a2) + "," + num(s.variation) + "," + num(s.fixed_variation) + "," + num(s.envelope);
    for (double v : s.norms) out += "," + num(v);
    out += "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// SVG line plots on log10 axes.

struct Series {
  std::string label;
  std::string color;
  std::vector<std::pair<double, double>> points;  // (x, y > 0)
};

inline std::string escape_xml(const std::string& s) {
  std::string out;
  for (char c : s) {
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

// Decade step from {1, 2, 5, 10, 20, 50, ...} giving at most 10 gridlines.
inline int decade_step(double span) {
  for (int scale = 1;; scale *= 10) {
    for (int m : {1, 2, 5}) {
      if (span / (m * scale) <= 10.0) return m * scale;
    }
  }
}

/// Log-log line plot.
inline std::string svg_log_plot(const std::string& title, const std::string& xlabel, const std::string& ylabel,
                                const std::vector<Series>& series, const Header& h) {
  constexpr double W = 640, H = 420, L = 70, R = 150, T = 40, B = 50;
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (const auto& s : series) {
    for (const auto& [x, y] : s.points) {
      x0 = std::min(x0, std::log10(x));
      x1 = std::max(x1, std::log10(x));
      y0 = std::min(y0, std::log10(y));
      y1 = std::max(y1, std::log10(y));
    }
  }
  if (!(x0 < x1)) {
    x0 = 0.0;
    x1 = 1.0;
  }
  if (!(y0 < y1)) {
    y0 = std::isfinite(y0) ? y0 - 1.0 : 0.0;
    y1 = y0 + 2.0;
  }
  const int ystep = decade_step(y1 - y0);
  y0 = std::floor(y0 / ystep) * ystep;
  y1 = std::ceil(y1 / ystep) * ystep;
  x0 = std::floor(x0);
  x1 = std::ceil(x1);
  auto px = [&](double lx) { return L + (lx - x0) / (x1 - x0) * (W - L - R); };
  auto py = [&](double ly) { return H - B - (ly - y0) / (y1 - y0) * (H - T - B); };

  std::ostringstream o;
  o << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  o << "<!-- artifact_version=" << kArtifactVersion << " config_hash=" << h.config_hash
    << " anchor=" << escape_xml(h.anchor) << " -->\n";
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << escape_xml(title)
    << "</text>\n";
  o << "<g stroke=\"#bbb\" stroke-width=\"0.5\">\n";
  for (double ly = y0; ly <= y1 + 1e-9; ly += ystep) {
    o << "<line x1=\"" << L << "\" x2=\"" << W - R << "\" y1=\"" << py(ly) << "\" y2=\"" << py(ly) << "\"/>\n";
  }
  for (double lx = x0; lx <= x1 + 1e-9; lx += 1.0) {
    o << "<line x1=\"" << px(lx) << "\" x2=\"" << px(lx) << "\" y1=\"" << T << "\" y2=\"" << H - B << "\"/>\n";
  }
  o << "</g>\n";
  o << "<g stroke=\"black\"><line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B
    << "\"/><line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B << "\"/></g>\n";
  for (double ly = y0; ly <= y1 + 1e-9; ly += ystep) {
    o << "<text x=\"" << L - 6 << "\" y=\"" << py(ly) + 4 << "\" text-anchor=\"end\">1e" << static_cast<int>(ly)
      << "</text>\n";
  }
  for (double lx = x0; lx <= x1 + 1e-9; lx += 1.0) {
    o << "<text x=\"" << px(lx) << "\" y=\"" << H - B + 16 << "\" text-anchor=\"middle\">" << num(std::pow(10.0, lx))
      << "</text>\n";
  }
  o << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\">" << escape_xml(xlabel)
    << "</text>\n";
  o << "<text x=\"16\" y=\"" << (T + H - B) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
    << (T + H - B) / 2 << ")\">" << escape_xml(ylabel) << "</text>\n";
  double legend_y = T + 10;
  for (const auto& s : series) {
    if (s.points.empty()) continue;
    o << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\" points=\"";
    for (const auto& [x, y] : s.points) o << px(std::log10(x)) << "," << py(std::log10(y)) << " ";
    o << "\"/>\n";
    o << "<line x1=\"" << W - R + 10 << "\" x2=\"" << W - R + 30 << "\" y1=\"" << legend_y << "\" y2=\"" << legend_y
      << "\" stroke=\"" << s.color << "\" stroke-width=\"2\"/>\n";
    o << "<text x=\"" << W - R + 36 << "\" y=\"" << legend_y + 4 << "\">" << escape_xml(s.label) << "</text>\n";
    legend_y += 18;
  }
  o << "</svg>\n";
  return o.str();
}

/// |S_j^n| against |u - v| along one path per region.
inline std::string decay_plot(kernels::KernelFamily family, int n, const Header& h) {
  struct Path {
    const char* label;
    const char* color;
    double d_lo, d_hi;
    std::pair<double, double> (*at)(double);
  };
  const Path paths[] = {
      {"diagonal (u=-2)", "#1f77b4", 0.02, 1.0, [](double d) { return std::pair{-2.0, -2.0 + d}; }},
      {"positive (u=0.5)", "#d62728", 1.0, 5.5, [](double d) { return std::pair{0.5, 0.5 + d}; }},
      {"mixed (u=-v)", "#2ca02c", 1.0, 10.0, [](double d) { return std::pair{-0.5 * d, 0.5 * d}; }},
      {"negative (v=-1)", "#9467bd", 1.0, 9.0, [](double d) { return std::pair{-1.0 - d, -1.0}; }},
  };
  std::vector<Series> series;
  for (const auto& p : paths) {
    Series s{p.label, p.color, {}};
    constexpr int kPoints = 40;
    for (int i = 0; i <= kPoints; ++i) {
      const double d = p.d_lo * std::pow(p.d_hi / p.d_lo, static_cast<double>(i) / kPoints);
      const auto [u, v] = p.at(d);
      const double value = std::abs(kernels::integrated_kernel(family, n, u, v));
      if (value > 0.0 && std::isfinite(value)) s.points.push_back({d, value});
    }
    series.push_back(std::move(s));
  }
  const std::string title =
      "|S" + std::string(family == kernels::KernelFamily::M0 ? "0" : "1") + "^" + std::to_string(n) + "(u,v)| by region";
  return svg_log_plot(title, "|u - v|", "kernel magnitude", series, h);
}

}  // namespace rkl::report
