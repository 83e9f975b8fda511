#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace pnpbif::cli {

/// Round-trip decimal form ("%.17g").
std::string fmt17(double v);
/// Six significant digits, used for SVG coordinates and labels.
std::string fmt6(double v);

/// Comma-separated values with LF line endings; fields containing a comma,
/// quote or newline are quoted.
class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& out) : out_(out) {}
  void row(const std::vector<std::string>& fields);

 private:
  std::ostream& out_;
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::optional<std::size_t> column(const std::string& name) const;
};

/// Throws ParseError on ragged rows or unterminated quotes.
CsvTable read_csv(std::istream& in);

struct PlotSeries {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<PlotSeries> series;
  int width = 640;
  int height = 420;
};

/// Standalone SVG: one polyline per series (points sorted by x), linear axes
/// with tick labels, auto-scaled to the data.
std::string render_svg(const PlotSpec& spec);

}  // namespace pnpbif::cli
