#include "skinpar/field_io.hpp"

#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "skinpar/errors.hpp"

namespace skinpar {

void write_field(std::ostream& out, const StateVector& state) {
  const Grid3D& g = state.grid;
  if (state.values.size() != g.size()) throw GridMismatch("state does not fill its grid");
  out << std::setprecision(17);
  out << g.nx << ' ' << g.ny << ' ' << g.nz << ' ' << g.hx << ' ' << g.hy << ' ' << g.hz << '\n';
  out << "time=" << state.time << '\n';
  for (double v : state.values) out << v << '\n';
}

void write_field(const std::filesystem::path& path, const StateVector& state) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  write_field(out, state);
  if (!out) throw Error("write to " + path.string() + " failed");
}

StateVector read_field(std::istream& in) {
  StateVector s;
  std::string line;
  if (!std::getline(in, line)) throw Error("empty field file");
  {
    std::istringstream head(line);
    Grid3D& g = s.grid;
    if (!(head >> g.nx >> g.ny >> g.nz >> g.hx >> g.hy >> g.hz)) {
      throw Error("field header must read 'nx ny nz hx hy hz'");
    }
    g.validate();
  }
  const std::size_t n = s.grid.size();
  s.values.reserve(n);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line.rfind("time=", 0) == 0) {
      if (!s.values.empty()) throw Error("time line after field values");
      try {
        s.time = std::stod(line.substr(5));
      } catch (const std::exception&) {
        throw Error("bad time line '" + line + "'");
      }
      continue;
    }
    std::istringstream row(line);
    double v = 0.0;
    if (!(row >> v)) throw Error("bad field value '" + line + "'");
    s.values.push_back(v);
  }
  if (s.values.size() != n) {
    throw GridMismatch("field holds " + std::to_string(s.values.size()) + " values, grid needs " +
                       std::to_string(n));
  }
  return s;
}

StateVector read_field(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  return read_field(in);
}

}  // namespace skinpar
