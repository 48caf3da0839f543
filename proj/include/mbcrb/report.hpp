#pragma once

#include "mbcrb/bounds.hpp"
#include "mbcrb/experiment.hpp"

#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace mbcrb {

/// Shortest decimal text that round-trips to the same double.
std::string format_number(double value);

/// Long-format CSV: quantity,row,col,value; one line per matrix entry.
void write_bound_csv(std::ostream& out, const BoundReport& report);

/// Human-readable diagonals and traces.
void write_bound_summary(std::ostream& out, const BoundReport& report, double snr);

/// axis_value,component_index,rmse,rmse_stderr,<floor>,bcrb_floor where
/// <floor> is mbcrb_floor or biased_bound_floor depending on the reference.
void write_sweep_csv(std::ostream& out, const std::vector<SweepResult>& results,
                     ErrorReference reference);

/// axis_value,trace_rmse,trace_rmse_stderr,trace_bound_floor
void write_trace_csv(std::ostream& out, const std::vector<SweepResult>& results);

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  std::string color;
};

/// Static line chart. Axes span the data extent padded by 5% on each side;
/// each series becomes one <polyline>.
std::string render_line_plot(std::string_view title, std::string_view x_label,
                             std::string_view y_label, const std::vector<PlotSeries>& series);

/// RMSE, bound floor and BCRB floor (when defined) for one component.
std::string render_component_plot(const std::vector<SweepResult>& results,
                                  Eigen::Index component, SweepAxis axis,
                                  ErrorReference reference);

}  // namespace mbcrb
