#include "pnpbif_cli/output.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "pnpbif/errors.hpp"

namespace pnpbif::cli {

namespace {

std::string printf_double(const char* format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, v);
  return buf;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '&':
        out += "&amp;";
        break;
      case '"':
        out += "&quot;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

// 1, 2 or 5 times a power of ten, giving roughly `target` intervals.
double nice_step(double span, int target) {
  const double raw = span / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double f = raw / mag;
  const double nice = f < 1.5 ? 1.0 : f < 3.5 ? 2.0 : f < 7.5 ? 5.0 : 10.0;
  return nice * mag;
}

struct Range {
  double lo, hi;
};

Range padded(double lo, double hi) {
  if (lo == hi) {
    const double pad = lo == 0.0 ? 1.0 : 0.05 * std::abs(lo);
    return {lo - pad, hi + pad};
  }
  const double pad = 0.04 * (hi - lo);
  return {lo - pad, hi + pad};
}

const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                         "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};

}  // namespace

std::string fmt17(double v) { return printf_double("%.17g", v); }
std::string fmt6(double v) { return printf_double("%.6g", v); }

void CsvWriter::row(const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out_ << ',';
    const auto& f = fields[i];
    if (f.find_first_of(",\"\n") == std::string::npos) {
      out_ << f;
      continue;
    }
    out_ << '"';
    for (char c : f) {
      if (c == '"') out_ << '"';
      out_ << c;
    }
    out_ << '"';
  }
  out_ << '\n';
}

std::optional<std::size_t> CsvTable::column(const std::string& name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) return std::nullopt;
  return static_cast<std::size_t>(it - header.begin());
}

CsvTable read_csv(std::istream& in) {
  CsvTable t;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      const char c = line[i];
      if (quoted) {
        if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else if (c == '"') {
          quoted = false;
        } else {
          cur += c;
        }
      } else if (c == '"') {
        quoted = true;
      } else if (c == ',') {
        fields.push_back(cur);
        cur.clear();
      } else {
        cur += c;
      }
    }
    if (quoted) throw ParseError("unterminated quote", number);
    fields.push_back(cur);
    if (t.header.empty()) {
      t.header = std::move(fields);
    } else {
      if (fields.size() != t.header.size()) throw ParseError("wrong number of fields", number);
      t.rows.push_back(std::move(fields));
    }
  }
  return t;
}

std::string render_svg(const PlotSpec& spec) {
  double xlo = INFINITY, xhi = -INFINITY, ylo = INFINITY, yhi = -INFINITY;
  for (const auto& s : spec.series) {
    for (double v : s.x) xlo = std::min(xlo, v), xhi = std::max(xhi, v);
    for (double v : s.y) ylo = std::min(ylo, v), yhi = std::max(yhi, v);
  }
  if (!std::isfinite(xlo)) xlo = 0.0, xhi = 1.0, ylo = 0.0, yhi = 1.0;
  const Range xr = padded(xlo, xhi), yr = padded(ylo, yhi);

  const double left = 70, right = 20, top = 36, bottom = 50;
  const double pw = spec.width - left - right, ph = spec.height - top - bottom;
  auto px = [&](double x) { return left + (x - xr.lo) / (xr.hi - xr.lo) * pw; };
  auto py = [&](double y) { return top + (yr.hi - y) / (yr.hi - yr.lo) * ph; };

  std::ostringstream o;
  o << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
    << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << spec.width << "\" height=\""
    << spec.height << "\" viewBox=\"0 0 " << spec.width << ' ' << spec.height << "\">\n"
    << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    << "<text x=\"" << fmt6(spec.width / 2.0) << "\" y=\"22\" text-anchor=\"middle\" "
    << "font-family=\"sans-serif\" font-size=\"14\">" << xml_escape(spec.title) << "</text>\n"
    << "<rect x=\"" << fmt6(left) << "\" y=\"" << fmt6(top) << "\" width=\"" << fmt6(pw)
    << "\" height=\"" << fmt6(ph) << "\" fill=\"none\" stroke=\"black\"/>\n";

  o << "<g font-family=\"sans-serif\" font-size=\"11\">\n";
  const double xs = nice_step(xr.hi - xr.lo, 6);
  for (double t = std::ceil(xr.lo / xs) * xs; t <= xr.hi; t += xs) {
    const double v = std::abs(t) < 1e-12 * xs ? 0.0 : t;
    o << "<line x1=\"" << fmt6(px(v)) << "\" y1=\"" << fmt6(top + ph) << "\" x2=\"" << fmt6(px(v))
      << "\" y2=\"" << fmt6(top + ph + 5) << "\" stroke=\"black\"/>"
      << "<text x=\"" << fmt6(px(v)) << "\" y=\"" << fmt6(top + ph + 18)
      << "\" text-anchor=\"middle\">" << fmt6(v) << "</text>\n";
  }
  const double ys = nice_step(yr.hi - yr.lo, 6);
  for (double t = std::ceil(yr.lo / ys) * ys; t <= yr.hi; t += ys) {
    const double v = std::abs(t) < 1e-12 * ys ? 0.0 : t;
    o << "<line x1=\"" << fmt6(left - 5) << "\" y1=\"" << fmt6(py(v)) << "\" x2=\"" << fmt6(left)
      << "\" y2=\"" << fmt6(py(v)) << "\" stroke=\"black\"/>"
      << "<text x=\"" << fmt6(left - 8) << "\" y=\"" << fmt6(py(v) + 4)
      << "\" text-anchor=\"end\">" << fmt6(v) << "</text>\n";
  }
  o << "<text x=\"" << fmt6(left + pw / 2) << "\" y=\"" << fmt6(spec.height - 10.0)
    << "\" text-anchor=\"middle\">" << xml_escape(spec.x_label) << "</text>\n"
    << "<text x=\"16\" y=\"" << fmt6(top + ph / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
    << fmt6(top + ph / 2) << ")\">" << xml_escape(spec.y_label) << "</text>\n</g>\n";

  for (std::size_t s = 0; s < spec.series.size(); ++s) {
    const auto& ser = spec.series[s];
    std::vector<std::size_t> idx(ser.x.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return ser.x[a] < ser.x[b]; });
    const char* color = kColors[s % (sizeof kColors / sizeof *kColors)];
    o << "<polyline data-series=\"" << xml_escape(ser.name) << "\" fill=\"none\" stroke=\""
      << color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < idx.size(); ++i) {
      if (i) o << ' ';
      o << fmt6(px(ser.x[idx[i]])) << ',' << fmt6(py(ser.y[idx[i]]));
    }
    o << "\"/>\n";
    o << "<text x=\"" << fmt6(left + 8) << "\" y=\"" << fmt6(top + 14 + 14.0 * s)
      << "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"" << color << "\">"
      << xml_escape(ser.name) << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

}  // namespace pnpbif::cli
