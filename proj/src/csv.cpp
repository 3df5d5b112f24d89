#include "fate/csv.hpp"

#include "fate/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>

namespace fate::csv {

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    cells.push_back(line.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return cells;
}

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

std::string format(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

Dataset read(std::istream& in, const RoleMap& roles) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorKind::EmptyData, "CSV input has no header row");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  std::vector<std::string> header = split(line);
  for (auto& h : header) h = trim(h);

  std::set<std::string> seen;
  auto column = [&](const std::string& name) -> std::size_t {
    if (!seen.insert(name).second) {
      throw Error(ErrorKind::InvalidConfig, "column '" + name + "' is mapped to more than one role");
    }
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw Error(ErrorKind::MissingColumn, "column '" + name + "' not found in header");
    return static_cast<std::size_t>(it - header.begin());
  };
  if (roles.outcomes.empty()) throw Error(ErrorKind::InvalidConfig, "no outcome columns given");
  if (roles.treatment.empty()) throw Error(ErrorKind::InvalidConfig, "no treatment column given");
  if (roles.instruments.empty()) throw Error(ErrorKind::InvalidConfig, "no instrument columns given");
  std::vector<std::size_t> cy;
  std::vector<std::size_t> cz;
  std::vector<std::size_t> cx;
  for (const auto& n : roles.outcomes) cy.push_back(column(n));
  const std::size_t cd = column(roles.treatment);
  for (const auto& n : roles.instruments) cz.push_back(column(n));
  for (const auto& n : roles.controls) cx.push_back(column(n));

  std::vector<std::vector<double>> rows;
  long row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    const auto cells = split(line);
    if (cells.size() != header.size()) {
      throw ParseError(row, "", "expected " + std::to_string(header.size()) + " cells, found " +
                                    std::to_string(cells.size()));
    }
    std::vector<double> values(cells.size(), 0.0);
    auto parse = [&](std::size_t c) {
      const std::string cell = trim(cells[c]);
      const char* first = cell.data();
      const char* last = first + cell.size();
      if (!cell.empty() && *first == '+') ++first;
      double v = 0.0;
      const auto res = std::from_chars(first, last, v);
      if (cell.empty() || res.ec != std::errc() || res.ptr != last || !std::isfinite(v)) {
        throw ParseError(row, header[c], "cannot parse '" + cell + "' as a real number");
      }
      values[c] = v;
    };
    for (auto c : cy) parse(c);
    parse(cd);
    for (auto c : cz) parse(c);
    for (auto c : cx) parse(c);
    rows.push_back(std::move(values));
  }
  if (rows.empty()) throw Error(ErrorKind::EmptyData, "CSV input has a header but no data rows");

  const long n = static_cast<long>(rows.size());
  Dataset d;
  d.y.resize(n, static_cast<long>(cy.size()));
  d.d.resize(n);
  d.z.resize(n, static_cast<long>(cz.size()));
  d.x.resize(n, static_cast<long>(cx.size()) + 1);
  for (long i = 0; i < n; ++i) {
    const auto& r = rows[static_cast<std::size_t>(i)];
    for (std::size_t c = 0; c < cy.size(); ++c) d.y(i, static_cast<long>(c)) = r[cy[c]];
    d.d(i) = r[cd];
    for (std::size_t c = 0; c < cz.size(); ++c) d.z(i, static_cast<long>(c)) = r[cz[c]];
    d.x(i, 0) = 1.0;
    for (std::size_t c = 0; c < cx.size(); ++c) d.x(i, static_cast<long>(c) + 1) = r[cx[c]];
  }
  d.outcome_names = roles.outcomes;
  d.treatment_name = roles.treatment;
  d.instrument_names = roles.instruments;
  d.control_names = {kInterceptName};
  d.control_names.insert(d.control_names.end(), roles.controls.begin(), roles.controls.end());
  return d;
}

Dataset read_file(const std::string& path, const RoleMap& roles) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::InvalidData, "cannot open '" + path + "'");
  return read(in, roles);
}

RoleMap roles_of(const Dataset& data) {
  RoleMap r;
  r.outcomes = data.outcome_names;
  r.treatment = data.treatment_name;
  r.instruments = data.instrument_names;
  for (std::size_t c = 0; c < data.control_names.size(); ++c) {
    if (data.control_names[c] != kInterceptName) r.controls.push_back(data.control_names[c]);
  }
  return r;
}

void write(std::ostream& out, const Dataset& data) {
  Dataset named = data;
  ensure_names(named);
  std::vector<long> xcols;
  for (long c = 0; c < named.num_controls(); ++c) {
    if (named.control_names[static_cast<std::size_t>(c)] != kInterceptName) xcols.push_back(c);
  }
  std::string line;
  auto sep = [&line] {
    if (!line.empty()) line += ',';
  };
  for (const auto& n : named.outcome_names) sep(), line += n;
  sep(), line += named.treatment_name;
  for (const auto& n : named.instrument_names) sep(), line += n;
  for (long c : xcols) sep(), line += named.control_names[static_cast<std::size_t>(c)];
  out << line << '\n';
  for (long i = 0; i < named.n(); ++i) {
    line.clear();
    for (long c = 0; c < named.num_outcomes(); ++c) sep(), line += format(named.y(i, c));
    sep(), line += format(named.d(i));
    for (long c = 0; c < named.num_instruments(); ++c) sep(), line += format(named.z(i, c));
    for (long c : xcols) sep(), line += format(named.x(i, c));
    out << line << '\n';
  }
}

void write_file(const std::string& path, const Dataset& data) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::InvalidData, "cannot write '" + path + "'");
  write(out, data);
}

}  // namespace fate::csv
