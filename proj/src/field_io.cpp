#include "agmonkit/field_io.hpp"

#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>

namespace agmonkit {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_field_csv(std::ostream& os, const GridField& f, const HeaderFields& extra) {
  const Grid& g = f.grid();
  os << "# dim=" << g.dim() << ", bounds=[";
  for (int a = 0; a < g.dim(); ++a) {
    os << (a ? "," : "") << '[' << format_double(g.bounds(a).lo) << ','
       << format_double(g.bounds(a).hi) << ']';
  }
  os << "], n=[";
  for (int a = 0; a < g.dim(); ++a) os << (a ? "," : "") << g.n(a);
  os << "]\n";
  if (!extra.empty()) {
    os << "# ";
    for (std::size_t k = 0; k < extra.size(); ++k) {
      os << (k ? ", " : "") << extra[k].first << '=' << extra[k].second;
    }
    os << '\n';
  }
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Point p = g.point(i);
    os << format_double(p.x);
    if (g.dim() == 2) os << ',' << format_double(p.y);
    os << ',' << format_double(f[i]) << '\n';
  }
}

namespace {

std::vector<double> parse_numbers(const std::string& s) {
  std::vector<double> out;
  const char* p = s.c_str();
  while (*p) {
    if ((*p >= '0' && *p <= '9') || *p == '-' || *p == '+' || *p == '.') {
      char* end = nullptr;
      out.push_back(std::strtod(p, &end));
      p = end;
    } else {
      ++p;
    }
  }
  return out;
}

void parse_pairs(const std::string& line, std::map<std::string, std::string>& out) {
  std::stringstream ss(line);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string t) {
      const auto b = t.find_first_not_of(" \t");
      const auto e = t.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : t.substr(b, e - b + 1);
    };
    out[trim(item.substr(0, eq))] = trim(item.substr(eq + 1));
  }
}

}  // namespace

GridField read_field_csv(std::istream& is, std::map<std::string, std::string>* extra) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("# dim=", 0) != 0) {
    throw InvalidArgument("field CSV: missing '# dim=' header");
  }
  const auto dim_pos = line.find("dim=");
  const auto bounds_pos = line.find("bounds=");
  const auto n_pos = line.find("n=[");
  if (bounds_pos == std::string::npos || n_pos == std::string::npos) {
    throw InvalidArgument("field CSV: malformed header: " + line);
  }
  const int dim = std::atoi(line.c_str() + dim_pos + 4);
  const auto b = parse_numbers(line.substr(bounds_pos, n_pos - bounds_pos));
  const auto nn = parse_numbers(line.substr(n_pos));
  if (b.size() != 2 * static_cast<std::size_t>(dim) || nn.size() != static_cast<std::size_t>(dim)) {
    throw InvalidArgument("field CSV: header does not match dimension");
  }
  std::vector<Interval> bounds;
  std::vector<std::size_t> n;
  for (int a = 0; a < dim; ++a) {
    bounds.push_back({b[2 * a], b[2 * a + 1]});
    n.push_back(static_cast<std::size_t>(nn[a]));
  }
  Grid g(dim, bounds, n);
  std::vector<double> values;
  values.reserve(g.size());
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (extra) parse_pairs(line.substr(1), *extra);
      continue;
    }
    const auto comma = line.rfind(',');
    if (comma == std::string::npos) throw InvalidArgument("field CSV: malformed row: " + line);
    values.push_back(std::strtod(line.c_str() + comma + 1, nullptr));
  }
  return GridField(std::move(g), std::move(values));
}

void write_plot_dat(std::ostream& os, const GridField& f, const std::string& title) {
  const Grid& g = f.grid();
  os << "# " << title << '\n';
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Point p = g.point(i);
    os << format_double(p.x);
    if (g.dim() == 2) os << ' ' << format_double(p.y);
    os << ' ' << format_double(f[i]) << '\n';
    if (g.dim() == 2 && g.unflatten(i)[1] + 1 == g.n(1)) os << '\n';
  }
}

}  // namespace agmonkit
