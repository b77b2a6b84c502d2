#pragma once

#include <string>
#include <vector>

namespace bpsim {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;  // same length as x
};

// Self-contained SVG line chart. Long series are thinned to a bounded point
// count; output is a pure function of the inputs.
std::string line_chart(const std::string& title, const std::string& x_label,
                       const std::string& y_label,
                       const std::vector<Series>& series);

std::string bar_chart(const std::string& title, const std::string& x_label,
                      const std::string& y_label,
                      const std::vector<std::string>& labels,
                      const std::vector<double>& values);

}  // namespace bpsim
