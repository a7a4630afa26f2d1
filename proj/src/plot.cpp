#include "cgfem/errors.hpp"
#include "cgfem/experiment.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace cgfem {

namespace {

struct Curve {
  std::string label;
  std::vector<std::pair<double, double>> points;  // (sqrt(dof), value), sorted by x
};

constexpr std::array<const char*, 8> kColors = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                                "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};
constexpr std::array<const char*, 4> kMarkers = {"circle", "square", "diamond", "triangle"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string marker(int kind, double x, double y, const char* color) {
  std::ostringstream s;
  const double r = 4.0;
  switch (kind % 4) {
    case 0:
      s << "<circle cx=\"" << num(x) << "\" cy=\"" << num(y) << "\" r=\"" << r << "\" fill=\"" << color << "\"/>";
      break;
    case 1:
      s << "<rect x=\"" << num(x - r) << "\" y=\"" << num(y - r) << "\" width=\"" << 2 * r << "\" height=\"" << 2 * r
        << "\" fill=\"" << color << "\"/>";
      break;
    case 2:
      s << "<polygon points=\"" << num(x) << ',' << num(y - r - 1) << ' ' << num(x + r + 1) << ',' << num(y) << ' '
        << num(x) << ',' << num(y + r + 1) << ' ' << num(x - r - 1) << ',' << num(y) << "\" fill=\"" << color << "\"/>";
      break;
    default:
      s << "<polygon points=\"" << num(x) << ',' << num(y - r - 1) << ' ' << num(x + r + 1) << ',' << num(y + r) << ' '
        << num(x - r - 1) << ',' << num(y + r) << "\" fill=\"" << color << "\"/>";
  }
  return s.str();
}

void write_svg(const std::filesystem::path& path, const std::string& title, const std::string& ylabel,
               const std::vector<Curve>& curves) {
  const double W = 720, H = 480, left = 80, right = 200, top = 40, bottom = 60;
  const double pw = W - left - right, ph = H - top - bottom;

  double xmin = INFINITY, xmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY;
  for (const auto& c : curves)
    for (auto [x, y] : c.points) {
      xmin = std::min(xmin, x);
      xmax = std::max(xmax, x);
      ymin = std::min(ymin, y);
      ymax = std::max(ymax, y);
    }
  const bool empty = !(xmin < INFINITY);
  if (empty) xmin = 1, xmax = 10, ymin = 1, ymax = 10;
  // Whole decades on both axes.
  double lx0 = std::floor(std::log10(xmin)), lx1 = std::ceil(std::log10(xmax));
  double ly0 = std::floor(std::log10(ymin)), ly1 = std::ceil(std::log10(ymax));
  if (lx1 <= lx0) lx1 = lx0 + 1;
  if (ly1 <= ly0) ly1 = ly0 + 1;
  auto sx = [&](double x) { return left + (std::log10(x) - lx0) / (lx1 - lx0) * pw; };
  auto sy = [&](double y) { return top + (ly1 - std::log10(y)) / (ly1 - ly0) * ph; };

  std::ofstream out(path);
  if (!out) throw InvalidParameter("cannot write " + path.string());
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << num(left + pw / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << escape(title)
      << "</text>\n";
  out << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
      << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int e = static_cast<int>(lx0); e <= static_cast<int>(lx1); ++e) {
    const double x = sx(std::pow(10.0, e));
    out << "<line x1=\"" << num(x) << "\" y1=\"" << top << "\" x2=\"" << num(x) << "\" y2=\"" << top + ph
        << "\" stroke=\"#ddd\"/>\n";
    out << "<text x=\"" << num(x) << "\" y=\"" << top + ph + 18 << "\" text-anchor=\"middle\">1e" << e << "</text>\n";
  }
  for (int e = static_cast<int>(ly0); e <= static_cast<int>(ly1); ++e) {
    const double y = sy(std::pow(10.0, e));
    out << "<line x1=\"" << left << "\" y1=\"" << num(y) << "\" x2=\"" << left + pw << "\" y2=\"" << num(y)
        << "\" stroke=\"#ddd\"/>\n";
    out << "<text x=\"" << left - 6 << "\" y=\"" << num(y + 4) << "\" text-anchor=\"end\">1e" << e << "</text>\n";
  }
  out << "<text x=\"" << num(left + pw / 2) << "\" y=\"" << H - 15 << "\" text-anchor=\"middle\">sqrt(DOF)</text>\n";
  out << "<text x=\"20\" y=\"" << num(top + ph / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 20 "
      << num(top + ph / 2) << ")\">" << escape(ylabel) << "</text>\n";

  for (std::size_t c = 0; c < curves.size(); ++c) {
    const char* color = kColors[c % kColors.size()];
    const int mk = static_cast<int>(c / kColors.size() + c) % static_cast<int>(kMarkers.size());
    const auto& pts = curves[c].points;
    if (pts.size() > 1) {
      out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
      for (auto [x, y] : pts) out << num(sx(x)) << ',' << num(sy(y)) << ' ';
      out << "\"/>\n";
    }
    for (auto [x, y] : pts) out << marker(mk, sx(x), sy(y), color) << '\n';
    const double ly = top + 10 + 18.0 * static_cast<double>(c);
    const double lx = left + pw + 15;
    out << "<line x1=\"" << lx << "\" y1=\"" << num(ly) << "\" x2=\"" << lx + 24 << "\" y2=\"" << num(ly)
        << "\" stroke=\"" << color << "\" stroke-width=\"1.5\"/>" << marker(mk, lx + 12, ly, color) << '\n';
    out << "<text x=\"" << lx + 30 << "\" y=\"" << num(ly + 4) << "\">" << escape(curves[c].label) << "</text>\n";
  }
  if (curves.empty())
    out << "<text x=\"" << left + pw + 15 << "\" y=\"" << top + 14 << "\">no methods selected</text>\n";
  out << "</svg>\n";
}

}  // namespace

std::vector<std::filesystem::path> emit_plots(const std::filesystem::path& csv_path,
                                              const std::filesystem::path& out_dir,
                                              std::vector<std::string>& warnings) {
  std::ifstream in(csv_path);
  if (!in) throw InvalidParameter("cannot open " + csv_path.string());
  const std::vector<ExperimentRecord> records = read_csv(in, warnings);
  std::filesystem::create_directories(out_dir);

  const bool crack = std::any_of(records.begin(), records.end(), [](const auto& r) { return r.mesh == "crack"; });
  const std::string suite = crack ? "crack" : "smooth";
  const std::string stem = csv_path.stem().string();

  using Key = std::tuple<std::string, int, std::string>;
  std::vector<Key> order;
  std::map<Key, std::vector<ExperimentRecord>> groups;
  for (const auto& r : records) {
    const Key key{r.method, r.k, r.mesh};
    if (!groups.count(key)) order.push_back(key);
    groups[key].push_back(r);
  }

  std::vector<std::filesystem::path> written;
  std::vector<Curve> ee_curves, scn_curves;
  for (const auto& key : order) {
    auto rows = groups[key];
    std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.dof < b.dof; });
    const auto& [method, k, mesh] = key;
    const std::string label = crack ? method : method + " k=" + std::to_string(k) + " " + mesh;
    Curve ee{label, {}}, scn{label, {}};
    for (const auto& r : rows) {
      if (r.dof <= 0) continue;
      const double x = std::sqrt(static_cast<double>(r.dof));
      if (std::isfinite(r.ee) && r.ee > 0) ee.points.emplace_back(x, r.ee);
      if (std::isfinite(r.scn) && r.scn > 0) scn.points.emplace_back(x, r.scn);
    }
    ee_curves.push_back(ee);
    scn_curves.push_back(scn);

    const auto dat = out_dir / (stem + "_" + method + "_k" + std::to_string(k) + "_" + mesh + ".dat");
    std::ofstream d(dat);
    if (!d) throw InvalidParameter("cannot write " + dat.string());
    d << "# sqrt_dof EE SCN  (" << label << ")\n";
    for (const auto& r : rows) {
      char buf[128];
      std::snprintf(buf, sizeof buf, "%.10e %.10e %.10e\n", std::sqrt(static_cast<double>(r.dof)), r.ee, r.scn);
      d << buf;
    }
    written.push_back(dat);
  }

  const auto ee_svg = out_dir / (stem + "_EE.svg");
  const auto scn_svg = out_dir / (stem + "_SCN.svg");
  write_svg(ee_svg, suite + " suite: energy error", "EE", ee_curves);
  write_svg(scn_svg, suite + " suite: scaled condition number", "SCN", scn_curves);
  written.push_back(ee_svg);
  written.push_back(scn_svg);
  return written;
}

}  // namespace cgfem
