#include "kvrobin/svg.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

namespace kvrobin {

namespace {

constexpr double kWidth = 640, kHeight = 420;
constexpr double kLeft = 80, kRight = 20, kTop = 40, kBottom = 60;

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
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

std::string fmt(double v, int precision = 4) {
  std::ostringstream s;
  s << std::setprecision(precision) << v;
  return s.str();
}

struct Axis {
  double lo = 0.0, hi = 1.0;
  bool log = false;

  double map(double v) const {
    const double a = log ? std::log10(v) : v;
    return (a - lo) / (hi - lo);
  }
  std::vector<double> ticks() const {
    std::vector<double> out;
    if (log) {
      for (double e = std::ceil(lo - 1e-9); e <= hi + 1e-9; e += 1.0) out.push_back(std::pow(10.0, e));
      return out;
    }
    const double span = hi - lo;
    const double raw = span / 5.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double m : {1.0, 2.0, 5.0, 10.0}) {
      if (m * mag >= raw) {
        step = m * mag;
        break;
      }
    }
    for (double t = std::ceil(lo / step - 1e-9) * step; t <= hi + 1e-9 * span; t += step) {
      out.push_back(std::abs(t) < 1e-12 * span ? 0.0 : t);
    }
    return out;
  }
};

Axis make_axis(const std::vector<const std::vector<double>*>& data, bool log) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto* v : data) {
    for (double x : *v) {
      if (!std::isfinite(x) || (log && !(x > 0.0))) continue;
      const double a = log ? std::log10(x) : x;
      lo = std::min(lo, a);
      hi = std::max(hi, a);
    }
  }
  Axis ax;
  ax.log = log;
  if (!std::isfinite(lo)) {
    ax.lo = 0.0;
    ax.hi = 1.0;
    return ax;
  }
  if (hi - lo < 1e-12 * std::max(1.0, std::abs(hi))) {
    lo -= log ? 0.5 : std::max(0.5, 0.1 * std::abs(lo));
    hi += log ? 0.5 : std::max(0.5, 0.1 * std::abs(hi));
  }
  const double pad = 0.05 * (hi - lo);
  ax.lo = lo - pad;
  ax.hi = hi + pad;
  return ax;
}

}  // namespace

std::string line_chart_svg(const ChartSpec& spec, const std::vector<Series>& series) {
  std::vector<const std::vector<double>*> xs, ys;
  for (const auto& s : series) {
    xs.push_back(&s.x);
    ys.push_back(&s.y);
  }
  const Axis ax = make_axis(xs, spec.log_x), ay = make_axis(ys, spec.log_y);
  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  auto px = [&](double v) { return kLeft + pw * ax.map(v); };
  auto py = [&](double v) { return kTop + ph * (1.0 - ay.map(v)); };

  std::ostringstream o;
  o << std::fixed << std::setprecision(2);
  o << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << kWidth << "\" height=\"" << kHeight
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect x=\"0\" y=\"0\" width=\"" << kWidth << "\" height=\"" << kHeight << "\" fill=\"white\"/>\n";
  o << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" << escape(spec.title)
    << "</text>\n";
  o << "<g class=\"axes\" stroke=\"black\" fill=\"none\">\n";
  o << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw << "\" height=\"" << ph << "\"/>\n";
  o << "</g>\n<g class=\"ticks\" font-size=\"11\">\n";
  for (double t : ax.ticks()) {
    const double x = px(t);
    o << "<line x1=\"" << x << "\" y1=\"" << kTop + ph << "\" x2=\"" << x << "\" y2=\"" << kTop + ph + 5
      << "\" stroke=\"black\"/>";
    o << "<text x=\"" << x << "\" y=\"" << kTop + ph + 18 << "\" text-anchor=\"middle\">" << fmt(t, 3) << "</text>\n";
  }
  for (double t : ay.ticks()) {
    const double y = py(t);
    o << "<line x1=\"" << kLeft - 5 << "\" y1=\"" << y << "\" x2=\"" << kLeft << "\" y2=\"" << y
      << "\" stroke=\"black\"/>";
    o << "<text x=\"" << kLeft - 8 << "\" y=\"" << y + 4 << "\" text-anchor=\"end\">" << fmt(t, 3) << "</text>\n";
  }
  o << "</g>\n";
  o << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kHeight - 15 << "\" text-anchor=\"middle\">"
    << escape(spec.x_label) << "</text>\n";
  o << "<text x=\"18\" y=\"" << kTop + ph / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
    << kTop + ph / 2 << ")\">" << escape(spec.y_label) << "</text>\n";

  double legend_y = kTop + 16;
  for (const auto& s : series) {
    o << "<polyline class=\"series\" fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.8\"";
    if (s.dashed) o << " stroke-dasharray=\"6 4\"";
    o << " points=\"";
    bool first = true;
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      if ((spec.log_x && !(s.x[i] > 0.0)) || (spec.log_y && !(s.y[i] > 0.0))) continue;
      o << (first ? "" : " ") << px(s.x[i]) << ',' << py(s.y[i]);
      first = false;
    }
    o << "\"/>\n";
    if (!s.label.empty()) {
      o << "<text x=\"" << kLeft + pw - 10 << "\" y=\"" << legend_y << "\" text-anchor=\"end\" fill=\"" << s.color
        << "\">" << escape(s.label) << "</text>\n";
      legend_y += 16;
    }
  }
  if (!spec.annotation.empty()) {
    o << "<text class=\"annotation\" x=\"" << kLeft + 10 << "\" y=\"" << kTop + 18 << "\">" << escape(spec.annotation)
      << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

std::string history_svg(const std::vector<HistoryRow>& rows, bool error_panel) {
  Series s;
  s.label = error_panel ? "e_q(q^k)" : "J(q^k)";
  for (const auto& r : rows) {
    s.x.push_back(r.k);
    s.y.push_back(error_panel ? r.e_q : r.J);
  }
  ChartSpec spec;
  spec.title = error_panel ? "relative error versus iteration" : "objective versus iteration";
  spec.x_label = "k";
  spec.y_label = error_panel ? "e_q" : "J";
  spec.log_y = true;
  return line_chart_svg(spec, {s});
}

std::string reconstruction_svg(const RobinCoefficient& q_star, const RobinCoefficient& q_dag) {
  auto steps = [](const RobinCoefficient& q, const std::string& label, const std::string& color, bool dashed) {
    Series s;
    s.label = label;
    s.color = color;
    s.dashed = dashed;
    for (std::size_t j = 0; j < q.piece_count(); ++j) {
      s.x.push_back(q.piece_start(j));
      s.y.push_back(q.values()[j]);
      s.x.push_back(q.piece_end(j));
      s.y.push_back(q.values()[j]);
    }
    return s;
  };
  ChartSpec spec;
  spec.title = "reconstruction";
  spec.x_label = "arclength s on inaccessible boundary";
  spec.y_label = "q";
  return line_chart_svg(spec, {steps(q_star, "q*", "#d62728", false), steps(q_dag, "q exact", "#1f77b4", true)});
}

std::string sweep_svg(const std::vector<std::pair<double, double>>& medians, const std::optional<RateFit>& rate) {
  Series s;
  s.label = "median e_q";
  for (const auto& [d, e] : medians) {
    s.x.push_back(d);
    s.y.push_back(e);
  }
  ChartSpec spec;
  spec.title = "relative error versus noise level";
  spec.x_label = "delta";
  spec.y_label = "e_q";
  spec.log_x = spec.log_y = true;
  if (rate) spec.annotation = "rate " + fmt(rate->slope, 3) + " +- " + fmt(rate->half_width, 2);
  return line_chart_svg(spec, {s});
}

}  // namespace kvrobin
