#include "mbcrb/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace mbcrb {

std::string format_number(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

namespace {

void write_matrix(std::ostream& out, std::string_view name, const Matrix& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      out << name << ',' << i << ',' << j << ',' << format_number(m(i, j)) << '\n';
    }
  }
}

void write_diagonal(std::ostream& out, std::string_view name, const Matrix& m) {
  out << "  " << name << " diag:";
  for (Eigen::Index i = 0; i < m.rows(); ++i) out << ' ' << format_number(m(i, i));
  out << "  trace: " << format_number(m.trace()) << '\n';
}

}  // namespace

void write_bound_csv(std::ostream& out, const BoundReport& report) {
  out << "quantity,row,col,value\n";
  write_matrix(out, "pseudotrue_gain", report.pseudotrue_gain);
  write_matrix(out, "pseudotrue_offset", report.pseudotrue_offset);
  write_matrix(out, "jacobian_A", report.jacobian_A);
  write_matrix(out, "bfim_data", report.bfim.data_term);
  write_matrix(out, "bfim_prior", report.bfim.prior_term);
  write_matrix(out, "bfim_total", report.bfim.total);
  write_matrix(out, "bcrb", report.bcrb);
  write_matrix(out, "mbcrb", report.mbcrb);
  if (report.biased_bound) write_matrix(out, "biased_bound", *report.biased_bound);
  write_matrix(out, "map_error_covariance", report.map_error_covariance);
}

void write_bound_summary(std::ostream& out, const BoundReport& report, double snr) {
  out << "bound summary\n";
  out << "  snr_db: " << format_number(snr) << '\n';
  write_diagonal(out, "bcrb", report.bcrb);
  write_diagonal(out, "mbcrb", report.mbcrb);
  if (report.biased_bound) write_diagonal(out, "biased_bound", *report.biased_bound);
  write_diagonal(out, "map_error_covariance", report.map_error_covariance);
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepResult>& results,
                     ErrorReference reference) {
  out << "axis_value,component_index,rmse,rmse_stderr,"
      << (reference == ErrorReference::pseudotrue ? "mbcrb_floor" : "biased_bound_floor")
      << ",bcrb_floor\n";
  for (const SweepResult& r : results) {
    for (Eigen::Index k = 0; k < r.rmse.size(); ++k) {
      out << format_number(r.axis_value) << ',' << k << ',' << format_number(r.rmse(k)) << ','
          << format_number(r.rmse_standard_error(k)) << ','
          << format_number(r.bound_rmse_floor(k)) << ',';
      if (k < r.bcrb_floor.size()) out << format_number(r.bcrb_floor(k));
      out << '\n';
    }
  }
}

void write_trace_csv(std::ostream& out, const std::vector<SweepResult>& results) {
  out << "axis_value,trace_rmse,trace_rmse_stderr,trace_bound_floor\n";
  for (const SweepResult& r : results) {
    out << format_number(r.axis_value) << ',' << format_number(r.trace_rmse) << ','
        << format_number(r.trace_rmse_standard_error) << ','
        << format_number(r.trace_bound_floor) << '\n';
  }
}

namespace {

std::string fixed(double v, int digits = 2) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

std::string tick_label(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

std::string escape_xml(std::string_view text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Extent {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();

  void include(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void pad() {
    if (!std::isfinite(lo)) {
      lo = 0.0;
      hi = 1.0;
    }
    double span = hi - lo;
    if (span <= 0.0) span = std::max(std::abs(lo), 1.0) * 0.1;
    lo -= 0.05 * span;
    hi += 0.05 * span;
  }
};

}  // namespace

std::string render_line_plot(std::string_view title, std::string_view x_label,
                             std::string_view y_label, const std::vector<PlotSeries>& series) {
  constexpr double kWidth = 640, kHeight = 420;
  constexpr double kLeft = 80, kRight = 160, kTop = 40, kBottom = 60;
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;

  Extent xs, ys;
  for (const auto& s : series) {
    for (double v : s.x) xs.include(v);
    for (double v : s.y) ys.include(v);
  }
  xs.pad();
  ys.pad();
  auto px = [&](double x) { return kLeft + (x - xs.lo) / (xs.hi - xs.lo) * plot_w; };
  auto py = [&](double y) { return kTop + (ys.hi - y) / (ys.hi - ys.lo) * plot_h; };

  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
      << kHeight << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n"
      << "<rect x=\"0\" y=\"0\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" fill=\"white\"/>\n"
      << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" font-family=\"sans-serif\""
      << " font-size=\"15\">" << escape_xml(title) << "</text>\n"
      << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << plot_w << "\" height=\""
      << plot_h << "\" fill=\"none\" stroke=\"black\"/>\n";

  constexpr int kTicks = 5;
  for (int i = 0; i <= kTicks; ++i) {
    const double xv = xs.lo + (xs.hi - xs.lo) * i / kTicks;
    const double yv = ys.lo + (ys.hi - ys.lo) * i / kTicks;
    svg << "<line x1=\"" << fixed(px(xv)) << "\" y1=\"" << fixed(kTop + plot_h) << "\" x2=\""
        << fixed(px(xv)) << "\" y2=\"" << fixed(kTop + plot_h + 5) << "\" stroke=\"black\"/>\n"
        << "<text x=\"" << fixed(px(xv)) << "\" y=\"" << fixed(kTop + plot_h + 20)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
        << tick_label(xv) << "</text>\n"
        << "<line x1=\"" << fixed(kLeft - 5) << "\" y1=\"" << fixed(py(yv)) << "\" x2=\""
        << fixed(kLeft) << "\" y2=\"" << fixed(py(yv)) << "\" stroke=\"black\"/>\n"
        << "<text x=\"" << fixed(kLeft - 8) << "\" y=\"" << fixed(py(yv) + 4)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
        << tick_label(yv) << "</text>\n";
  }
  svg << "<text x=\"" << fixed(kLeft + plot_w / 2) << "\" y=\"" << fixed(kHeight - 15)
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">"
      << escape_xml(x_label) << "</text>\n"
      << "<text x=\"18\" y=\"" << fixed(kTop + plot_h / 2)
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" transform=\"rotate(-90 18 "
      << fixed(kTop + plot_h / 2) << ")\">" << escape_xml(y_label) << "</text>\n";

  for (std::size_t s = 0; s < series.size(); ++s) {
    const PlotSeries& line = series[s];
    svg << "<polyline fill=\"none\" stroke=\"" << escape_xml(line.color)
        << "\" stroke-width=\"1.8\" points=\"";
    const std::size_t n = std::min(line.x.size(), line.y.size());
    bool first = true;
    for (std::size_t i = 0; i < n; ++i) {
      if (!std::isfinite(line.x[i]) || !std::isfinite(line.y[i])) continue;
      if (!first) svg << ' ';
      svg << fixed(px(line.x[i])) << ',' << fixed(py(line.y[i]));
      first = false;
    }
    svg << "\"/>\n";
    const double ly = kTop + 15 + 20 * static_cast<double>(s);
    svg << "<line x1=\"" << fixed(kLeft + plot_w + 12) << "\" y1=\"" << fixed(ly) << "\" x2=\""
        << fixed(kLeft + plot_w + 36) << "\" y2=\"" << fixed(ly) << "\" stroke=\""
        << escape_xml(line.color) << "\" stroke-width=\"1.8\"/>\n"
        << "<text x=\"" << fixed(kLeft + plot_w + 42) << "\" y=\"" << fixed(ly + 4)
        << "\" font-family=\"sans-serif\" font-size=\"12\">" << escape_xml(line.label)
        << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

std::string render_component_plot(const std::vector<SweepResult>& results,
                                  Eigen::Index component, SweepAxis axis,
                                  ErrorReference reference) {
  PlotSeries rmse{"RMSE", {}, {}, "#1f77b4"};
  PlotSeries floor{reference == ErrorReference::pseudotrue ? "MBCRB" : "biased bound", {}, {},
                   "#d62728"};
  PlotSeries bcrb_line{"BCRB", {}, {}, "#2ca02c"};
  for (const SweepResult& r : results) {
    rmse.x.push_back(r.axis_value);
    rmse.y.push_back(r.rmse(component));
    floor.x.push_back(r.axis_value);
    floor.y.push_back(r.bound_rmse_floor(component));
    if (component < r.bcrb_floor.size()) {
      bcrb_line.x.push_back(r.axis_value);
      bcrb_line.y.push_back(r.bcrb_floor(component));
    }
  }
  std::vector<PlotSeries> series{rmse, floor};
  if (!bcrb_line.x.empty()) series.push_back(bcrb_line);

  const std::string x_label = axis == SweepAxis::sample_count ? "N"
                              : axis == SweepAxis::assumed_gain ? "h"
                                                                : "sigma^2";
  const std::string title = (reference == ErrorReference::pseudotrue
                                 ? "RMSE of theta_hat - theta_0, component "
                                 : "RMSE of theta_hat - psi, component ") +
                            std::to_string(component + 1);
  return render_line_plot(title, x_label, "RMSE", series);
}

}  // namespace mbcrb
