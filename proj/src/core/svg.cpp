#include "core/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <set>
#include <sstream>

#include "core/csv.hpp"
#include "core/errors.hpp"

namespace odb {

namespace {

double parse_float_field(const std::string& tok, const char* what) {
  if (tok == "inf") return std::numeric_limits<double>::infinity();
  if (tok == "-inf") return -std::numeric_limits<double>::infinity();
  try {
    std::size_t pos = 0;
    const double x = std::stod(tok, &pos);
    if (pos != tok.size()) throw std::invalid_argument(tok);
    return x;
  } catch (const std::exception&) {
    throw IoError(std::string("summary csv: bad ") + what + " value '" + tok +
                  "'");
  }
}

std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(field);
  return out;
}

std::string px(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", value);
  return buf;
}

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

}  // namespace

std::vector<SummaryRow> parse_summary_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line))
    throw IoError("summary csv: empty file");
  if (split_commas(line) !=
      std::vector<std::string>{"experiment", "policy", "param", "mean", "std",
                               "trials"})
    throw IoError("summary csv: unexpected header '" + line + "'");
  std::vector<SummaryRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = split_commas(line);
    if (fields.size() != 6)
      throw IoError("summary csv: expected 6 fields in '" + line + "'");
    SummaryRow row;
    row.experiment = fields[0];
    row.policy = fields[1];
    row.param = parse_float_field(fields[2], "param");
    row.mean = parse_float_field(fields[3], "mean");
    row.stddev = parse_float_field(fields[4], "std");
    row.trials = static_cast<std::int64_t>(
        parse_float_field(fields[5], "trials"));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string render_plot_svg(const std::vector<SummaryRow>& rows) {
  if (rows.empty()) throw PreconditionError("plot: no rows");

  constexpr double kWidth = 880, kHeight = 560;
  constexpr double kLeft = 70, kTop = 40, kRight = 200, kBottom = 60;
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;

  std::set<std::string> policy_set;
  std::set<double> param_set;
  bool categorical = false;
  for (const auto& row : rows) {
    policy_set.insert(row.policy);
    param_set.insert(row.param);
    if (!std::isfinite(row.param)) categorical = true;
  }
  const std::vector<std::string> policies(policy_set.begin(),
                                          policy_set.end());
  const std::vector<double> params(param_set.begin(), param_set.end());

  double y_lo = 0.0, y_hi = -std::numeric_limits<double>::infinity();
  for (const auto& row : rows) {
    y_hi = std::max(y_hi, row.mean + row.stddev);
    y_lo = std::min(y_lo, row.mean - row.stddev);
  }
  if (!(y_hi > y_lo)) y_hi = y_lo + 1.0;
  const double y_pad = 0.05 * (y_hi - y_lo);
  y_hi += y_pad;
  if (y_lo < 0.0) y_lo -= y_pad;

  const double x_lo = categorical ? 0.0 : params.front();
  const double x_hi = categorical ? static_cast<double>(params.size() - 1)
                                  : params.back();
  auto x_value = [&](double param) {
    if (!categorical) return param;
    const auto it = std::lower_bound(params.begin(), params.end(), param);
    return static_cast<double>(it - params.begin());
  };
  auto sx = [&](double param) {
    const double v = x_value(param);
    if (x_hi == x_lo) return kLeft + plot_w / 2.0;
    return kLeft + (v - x_lo) / (x_hi - x_lo) * plot_w;
  };
  auto sy = [&](double y) {
    return kTop + (y_hi - y) / (y_hi - y_lo) * plot_h;
  };

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"880\" "
         "height=\"560\" viewBox=\"0 0 880 560\">\n";
  out << "<rect x=\"0\" y=\"0\" width=\"880\" height=\"560\" "
         "fill=\"#ffffff\"/>\n";
  out << "<text x=\"" << px(kLeft) << "\" y=\"24\" font-family=\"monospace\" "
         "font-size=\"16\">"
      << rows.front().experiment << "</text>\n";

  // frame
  out << "<rect x=\"" << px(kLeft) << "\" y=\"" << px(kTop) << "\" width=\""
      << px(plot_w) << "\" height=\"" << px(plot_h)
      << "\" fill=\"none\" stroke=\"#000000\"/>\n";

  // y ticks: five even levels
  for (int i = 0; i <= 4; ++i) {
    const double y = y_lo + (y_hi - y_lo) * i / 4.0;
    const double yy = sy(y);
    out << "<line x1=\"" << px(kLeft - 4) << "\" y1=\"" << px(yy)
        << "\" x2=\"" << px(kLeft + plot_w) << "\" y2=\"" << px(yy)
        << "\" stroke=\"#dddddd\"/>\n";
    out << "<text x=\"" << px(kLeft - 8) << "\" y=\"" << px(yy + 4)
        << "\" font-family=\"monospace\" font-size=\"11\" "
           "text-anchor=\"end\">"
        << fmt_g9(std::round(y * 1e6) / 1e6) << "</text>\n";
  }

  // x ticks at the distinct parameter values (evenly thinned when many)
  const std::size_t stride =
      params.size() > 12 ? (params.size() + 11) / 12 : 1;
  for (std::size_t i = 0; i < params.size(); i += stride) {
    const double xx = sx(params[i]);
    out << "<line x1=\"" << px(xx) << "\" y1=\"" << px(kTop + plot_h)
        << "\" x2=\"" << px(xx) << "\" y2=\"" << px(kTop + plot_h + 5)
        << "\" stroke=\"#000000\"/>\n";
    out << "<text x=\"" << px(xx) << "\" y=\"" << px(kTop + plot_h + 18)
        << "\" font-family=\"monospace\" font-size=\"11\" "
           "text-anchor=\"middle\">"
        << fmt_g9(params[i]) << "</text>\n";
  }
  out << "<text x=\"" << px(kLeft + plot_w / 2) << "\" y=\""
      << px(kHeight - 16)
      << "\" font-family=\"monospace\" font-size=\"12\" "
         "text-anchor=\"middle\">parameter</text>\n";
  out << "<text x=\"18\" y=\"" << px(kTop + plot_h / 2)
      << "\" font-family=\"monospace\" font-size=\"12\" "
         "text-anchor=\"middle\" transform=\"rotate(-90 18 "
      << px(kTop + plot_h / 2) << ")\">mean final regret</text>\n";

  for (std::size_t p = 0; p < policies.size(); ++p) {
    const char* color = kPalette[p % (sizeof kPalette / sizeof *kPalette)];
    std::vector<const SummaryRow*> series;
    for (const auto& row : rows)
      if (row.policy == policies[p]) series.push_back(&row);
    std::sort(series.begin(), series.end(),
              [&](const SummaryRow* a, const SummaryRow* b) {
                return x_value(a->param) < x_value(b->param);
              });
    if (series.size() > 1) {
      out << "<polyline fill=\"none\" stroke=\"" << color
          << "\" stroke-width=\"1.5\" points=\"";
      for (std::size_t i = 0; i < series.size(); ++i) {
        if (i) out << ' ';
        out << px(sx(series[i]->param)) << ',' << px(sy(series[i]->mean));
      }
      out << "\"/>\n";
    }
    for (const auto* row : series) {
      const double xx = sx(row->param);
      if (row->stddev > 0.0) {
        const double y1 = sy(row->mean - row->stddev);
        const double y0 = sy(row->mean + row->stddev);
        out << "<line x1=\"" << px(xx) << "\" y1=\"" << px(y0) << "\" x2=\""
            << px(xx) << "\" y2=\"" << px(y1) << "\" stroke=\"" << color
            << "\"/>\n";
        out << "<line x1=\"" << px(xx - 3) << "\" y1=\"" << px(y0)
            << "\" x2=\"" << px(xx + 3) << "\" y2=\"" << px(y0)
            << "\" stroke=\"" << color << "\"/>\n";
        out << "<line x1=\"" << px(xx - 3) << "\" y1=\"" << px(y1)
            << "\" x2=\"" << px(xx + 3) << "\" y2=\"" << px(y1)
            << "\" stroke=\"" << color << "\"/>\n";
      }
      out << "<circle cx=\"" << px(xx) << "\" cy=\"" << px(sy(row->mean))
          << "\" r=\"3\" fill=\"" << color << "\"/>\n";
    }
    // legend entry
    const double ly = kTop + 14.0 + 18.0 * static_cast<double>(p);
    out << "<line x1=\"" << px(kLeft + plot_w + 16) << "\" y1=\"" << px(ly)
        << "\" x2=\"" << px(kLeft + plot_w + 40) << "\" y2=\"" << px(ly)
        << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << px(kLeft + plot_w + 46) << "\" y=\"" << px(ly + 4)
        << "\" font-family=\"monospace\" font-size=\"12\">" << policies[p]
        << "</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

std::vector<std::pair<std::string, std::string>> render_plots(
    const std::vector<SummaryRow>& rows) {
  std::vector<std::pair<std::string, std::string>> out;
  std::vector<std::string> order;
  for (const auto& row : rows)
    if (std::find(order.begin(), order.end(), row.experiment) == order.end())
      order.push_back(row.experiment);
  for (const auto& experiment : order) {
    std::vector<SummaryRow> group;
    for (const auto& row : rows)
      if (row.experiment == experiment) group.push_back(row);
    out.emplace_back(experiment, render_plot_svg(group));
  }
  return out;
}

}  // namespace odb
