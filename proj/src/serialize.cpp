#include "qode/serialize.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace qode {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

nlohmann::json vec_json(const Vec& v) {
  nlohmann::json arr = nlohmann::json::array();
  for (int i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

Vec json_vec(const nlohmann::json& arr) {
  Vec v(arr.size());
  for (std::size_t i = 0; i < arr.size(); ++i) v[i] = arr[i].get<double>();
  return v;
}

}  // namespace

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for write: " + path);
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_trajectory_csv(const Trajectory& traj, const std::string& path,
                          const nlohmann::json& provenance) {
  const int n = traj.grid.points();
  const int sd = static_cast<int>(traj.x[0].size());
  const int id = static_cast<int>(traj.u[0].size());
  std::ostringstream out;
  out << "t";
  for (int i = 0; i < sd; ++i) out << ",x" << i + 1;
  for (int i = 0; i < id; ++i) out << ",u" << i + 1;
  out << ",c\n";
  for (int k = 0; k < n; ++k) {
    out << fmt(traj.grid.time(k));
    for (int i = 0; i < sd; ++i) out << ',' << fmt(traj.x[k][i]);
    for (int i = 0; i < id; ++i) out << ',' << fmt(traj.u[k][i]);
    out << ',' << fmt(traj.cost_samples[k]) << '\n';
  }
  write_text_file(path, out.str());

  nlohmann::json side;
  side["horizon"] = traj.grid.horizon;
  side["steps"] = traj.grid.steps;
  side["terminal_cost"] = traj.terminal_cost;
  side["state_dim"] = sd;
  side["input_dim"] = id;
  for (auto it = provenance.begin(); it != provenance.end(); ++it)
    side[it.key()] = it.value();
  write_text_file(path + ".json", side.dump(2) + "\n");
}

Trajectory read_trajectory_csv(const std::string& path) {
  const nlohmann::json side =
      nlohmann::json::parse(read_text_file(path + ".json"));
  Trajectory traj;
  traj.grid = TimeGrid::make(side.at("horizon").get<double>(),
                             side.at("steps").get<int>());
  traj.terminal_cost = side.at("terminal_cost").get<double>();
  const int sd = side.at("state_dim").get<int>();
  const int id = side.at("input_dim").get<int>();

  std::istringstream in(read_text_file(path));
  std::string line;
  std::getline(in, line);  // header
  traj.cost_samples.resize(traj.grid.points());
  int k = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell;
    auto next = [&] {
      if (!std::getline(row, cell, ','))
        throw std::runtime_error("short row in " + path);
      return std::stod(cell);
    };
    next();  // t (implied by the grid)
    Vec x(sd), u(id);
    for (int i = 0; i < sd; ++i) x[i] = next();
    for (int i = 0; i < id; ++i) u[i] = next();
    if (k >= traj.grid.points())
      throw std::runtime_error("row count mismatch in " + path);
    traj.cost_samples[k] = next();
    traj.x.push_back(std::move(x));
    traj.u.push_back(std::move(u));
    ++k;
  }
  if (k != traj.grid.points())
    throw std::runtime_error("row count mismatch in " + path);
  return traj;
}

void write_theta(const ThetaVector& theta, const std::string& path) {
  nlohmann::json doc;
  doc["coefficients"] = vec_json(theta.coeffs);
  doc["metadata"] = theta.metadata;
  write_text_file(path, doc.dump(2) + "\n");
}

ThetaVector read_theta(const std::string& path) {
  const nlohmann::json doc = nlohmann::json::parse(read_text_file(path));
  ThetaVector theta;
  theta.coeffs = json_vec(doc.at("coefficients"));
  theta.metadata = doc.value("metadata", nlohmann::json::object());
  return theta;
}

nlohmann::json verdict_json(const ConditionVerdict& v) {
  nlohmann::json doc;
  doc["verdict"] = to_string(v.verdict);
  doc["margin"] = v.margin;
  if (v.witness.size() > 0) doc["witness"] = vec_json(v.witness);
  if (!v.trace.empty()) doc["trace"] = v.trace;
  return doc;
}

nlohmann::json boundedness_json(const BoundednessReport& report) {
  nlohmann::json doc;
  doc["r_max"] = report.r_max;
  doc["tol"] = report.tol;
  doc["all_finite"] = report.all_finite();
  nlohmann::json radii = nlohmann::json::array();
  for (const auto& dir : report.directions) {
    nlohmann::json d;
    d["radius"] = dir.radius;
    d["unbounded"] = dir.unbounded;
    radii.push_back(d);
  }
  doc["directions"] = radii;
  return doc;
}

std::string config_hash(const nlohmann::json& config) {
  const std::string dump = config.dump();
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : dump) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
  return buf;
}

void write_results_csv(const std::string& path,
                       const std::vector<std::string>& columns,
                       const std::vector<std::vector<double>>& rows,
                       const nlohmann::json& config) {
  std::ostringstream out;
  out << "# config_hash=" << config_hash(config) << "\n";
  out << "# version=" << QODE_VERSION << "\n";
  for (std::size_t i = 0; i < columns.size(); ++i)
    out << (i ? "," : "") << columns[i];
  out << '\n';
  for (const auto& row : rows) {
    if (row.size() != columns.size())
      throw std::invalid_argument("results row width mismatch");
    for (std::size_t i = 0; i < row.size(); ++i)
      out << (i ? "," : "") << fmt(row[i]);
    out << '\n';
  }
  write_text_file(path, out.str());
}

std::vector<std::vector<double>> read_results_csv(const std::string& path) {
  std::istringstream in(read_text_file(path));
  std::vector<std::vector<double>> rows;
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      header_seen = true;  // column names
      continue;
    }
    std::istringstream row(line);
    std::string cell;
    std::vector<double> vals;
    while (std::getline(row, cell, ',')) vals.push_back(std::stod(cell));
    rows.push_back(std::move(vals));
  }
  return rows;
}

std::string svg_line_plot(
    const std::vector<double>& x,
    const std::vector<std::pair<std::string, std::vector<double>>>& series,
    const std::string& title) {
  const int W = 720, H = 440;
  const int L = 60, R = 20, T = 40, B = 40;
  double xmin = x.empty() ? 0.0 : x.front(), xmax = xmin;
  for (double v : x) {
    xmin = std::min(xmin, v);
    xmax = std::max(xmax, v);
  }
  double ymin = 0.0, ymax = 0.0;
  bool first = true;
  for (const auto& s : series)
    for (double v : s.second) {
      if (first) {
        ymin = ymax = v;
        first = false;
      }
      ymin = std::min(ymin, v);
      ymax = std::max(ymax, v);
    }
  if (xmax == xmin) xmax = xmin + 1.0;
  if (ymax == ymin) ymax = ymin + 1.0;

  auto px = [&](double v) {
    return L + (v - xmin) / (xmax - xmin) * (W - L - R);
  };
  auto py = [&](double v) {
    return H - B - (v - ymin) / (ymax - ymin) * (H - T - B);
  };
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c",
                                 "#ff7f0e", "#9467bd", "#8c564b"};
  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W
      << "\" height=\"" << H << "\">\n";
  out << "<rect width=\"" << W << "\" height=\"" << H
      << "\" fill=\"white\"/>\n";
  out << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\" font-size=\"16\">"
      << title << "</text>\n";
  out << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R
      << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L
      << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
  int si = 0;
  for (const auto& s : series) {
    const char* color = colors[si % 6];
    out << "<polyline fill=\"none\" stroke=\"" << color
        << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t k = 0; k < s.second.size() && k < x.size(); ++k)
      out << fmt(px(x[k])) << ',' << fmt(py(s.second[k])) << ' ';
    out << "\"/>\n";
    out << "<text x=\"" << W - R - 150 << "\" y=\"" << T + 18 * (si + 1)
        << "\" font-family=\"sans-serif\" font-size=\"12\" fill=\"" << color
        << "\">" << s.first << "</text>\n";
    ++si;
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace qode
