#pragma once

#include <optional>
#include <string>
#include <vector>

namespace smi::svg {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> lower; ///< optional band, same length as x
  std::vector<double> upper;
};

struct LinePlot {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<Series> series;
  std::optional<double> marker_x; ///< vertical dashed line
  std::string marker_label;
};

struct Histogram {
  std::string title;
  std::string x_label;
  std::vector<double> values;
  int bins = 20;
  std::optional<double> lo; ///< bin range, data range when unset
  std::optional<double> hi;
};

std::string render(const LinePlot& plot);
std::string render(const Histogram& hist);

} // namespace smi::svg
