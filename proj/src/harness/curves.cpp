#include "harness/curves.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

#include "common/errors.hpp"
#include "harness/metrics.hpp"

namespace rapo {

namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                    "#ff7f0e", "#8c564b", "#e377c2", "#7f7f7f"};
constexpr double kLeft = 70, kRight = 160, kTop = 30, kBottom = 45;

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::string xml_escape(const std::string& s) {
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

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

using Field = std::function<double(const CurvePoint&)>;

std::string chart(const std::string& title, const std::string& y_label,
                  const std::vector<std::string>& labels,
                  const std::vector<std::vector<CurvePoint>>& runs, const Field& field) {
  double x_min = 0, x_max = 1, y_min = 0, y_max = 0;
  bool first = true;
  for (const auto& run : runs)
    for (const auto& p : run) {
      const double y = field(p);
      if (first) {
        x_min = x_max = static_cast<double>(p.step);
        y_min = y_max = y;
        first = false;
      }
      x_min = std::min(x_min, static_cast<double>(p.step));
      x_max = std::max(x_max, static_cast<double>(p.step));
      y_min = std::min(y_min, y);
      y_max = std::max(y_max, y);
    }
  if (x_max == x_min) x_max = x_min + 1;
  if (y_max == y_min) {
    y_min -= 0.5;
    y_max += 0.5;
  }
  const double pw = kChartWidth - kLeft - kRight;
  const double ph = kChartHeight - kTop - kBottom;
  auto sx = [&](double x) { return kLeft + (x - x_min) / (x_max - x_min) * pw; };
  auto sy = [&](double y) { return kTop + (y_max - y) / (y_max - y_min) * ph; };

  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kChartWidth << "\" height=\""
    << kChartHeight << "\" viewBox=\"0 0 " << kChartWidth << ' ' << kChartHeight
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s << "<text x=\"" << kChartWidth / 2 << "\" y=\"18\" text-anchor=\"middle\">" << xml_escape(title)
    << "</text>\n";
  s << "<line x1=\"" << kLeft << "\" y1=\"" << kTop + ph << "\" x2=\"" << kLeft + pw << "\" y2=\""
    << kTop + ph << "\" stroke=\"black\"/>\n";
  s << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\""
    << kTop + ph << "\" stroke=\"black\"/>\n";
  s << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kChartHeight - 8
    << "\" text-anchor=\"middle\">step</text>\n";
  s << "<text x=\"16\" y=\"" << kTop + ph / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
    << kTop + ph / 2 << ")\">" << xml_escape(y_label) << "</text>\n";
  for (int i = 0; i <= 4; ++i) {
    const double xv = x_min + (x_max - x_min) * i / 4.0;
    const double yv = y_min + (y_max - y_min) * i / 4.0;
    s << "<text x=\"" << fmt("%.2f", sx(xv)) << "\" y=\"" << kTop + ph + 16
      << "\" text-anchor=\"middle\">" << fmt("%.0f", xv) << "</text>\n";
    s << "<text x=\"" << kLeft - 6 << "\" y=\"" << fmt("%.2f", sy(yv) + 4)
      << "\" text-anchor=\"end\">" << fmt("%.3g", yv) << "</text>\n";
  }
  int legend = 0;
  for (std::size_t r = 0; r < runs.size(); ++r) {
    if (runs[r].empty()) continue;
    const char* color = kPalette[r % std::size(kPalette)];
    s << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t k = 0; k < runs[r].size(); ++k) {
      if (k) s << ' ';
      s << fmt("%.2f", sx(static_cast<double>(runs[r][k].step))) << ','
        << fmt("%.2f", sy(field(runs[r][k])));
    }
    s << "\"/>\n";
    const double ly = kTop + 14 + 18 * legend++;
    s << "<line x1=\"" << kLeft + pw + 12 << "\" y1=\"" << ly - 4 << "\" x2=\"" << kLeft + pw + 32
      << "\" y2=\"" << ly - 4 << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    s << "<text x=\"" << kLeft + pw + 38 << "\" y=\"" << ly << "\">" << xml_escape(labels[r])
      << "</text>\n";
  }
  s << "</svg>\n";
  return s.str();
}

}  // namespace

CurveOutputs emit_curves(const std::vector<CurveInput>& runs, const std::filesystem::path& out_dir) {
  if (runs.empty()) throw InputError("no metrics files given");
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());

  CurveOutputs out;
  std::vector<std::vector<CurvePoint>> data;
  std::vector<std::string> labels;
  bool any = false;
  for (const CurveInput& run : runs) {
    data.push_back(read_curve(run.metrics));
    labels.push_back(run.label);
    any = any || !data.back().empty();
    std::ostringstream csv;
    csv << "step,entropy,reward,length\n";
    for (const CurvePoint& p : data.back())
      csv << p.step << ',' << fmt("%.17g", p.entropy) << ',' << fmt("%.17g", p.reward) << ','
          << fmt("%.17g", p.length) << '\n';
    const auto path = out_dir / (run.label + ".csv");
    write_file(path, csv.str());
    out.csv.push_back(path);
  }
  if (!any) return out;

  struct Spec {
    const char* file;
    const char* title;
    const char* y;
    Field field;
  };
  const Spec specs[] = {
      {"entropy.svg", "Policy entropy during training", "entropy (nats)",
       [](const CurvePoint& p) { return p.entropy; }},
      {"reward.svg", "Mean reward", "mean reward", [](const CurvePoint& p) { return p.reward; }},
      {"length.svg", "Mean action length", "tokens", [](const CurvePoint& p) { return p.length; }},
  };
  for (const Spec& sp : specs) {
    const auto path = out_dir / sp.file;
    write_file(path, chart(sp.title, sp.y, labels, data, sp.field));
    out.svg.push_back(path);
  }
  return out;
}

}  // namespace rapo
