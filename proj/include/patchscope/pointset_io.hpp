#pragma once

// Text formats:
//   point sets:        "#patchscope d=<int> norm=<linf|l1|l2sq>" header, then one
//                      point per line, comma-separated integers or num/den rationals.
//   integer sequences: one integer per line.
// Blank lines and '#' comments are ignored in both.

#include "patchscope/geometry.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <unordered_set>

namespace patchscope {

namespace detail {

inline std::string_view strip_comment(std::string_view line) {
  auto hash = line.find('#');
  if (hash != std::string_view::npos) line = line.substr(0, hash);
  return trim(line);
}

inline NormedSpace parse_header(std::string_view line, std::size_t line_no) {
  std::istringstream in{std::string(line)};
  std::string tag;
  in >> tag;
  if (tag != "#patchscope") throw Error("line " + std::to_string(line_no) + ": expected '#patchscope' header");
  int d = 0;
  Norm norm = Norm::linf;
  bool have_d = false;
  std::string field;
  while (in >> field) {
    auto eq = field.find('=');
    if (eq == std::string::npos) throw Error("line " + std::to_string(line_no) + ": malformed header field '" + field + "'");
    std::string key = field.substr(0, eq);
    std::string value = field.substr(eq + 1);
    if (key == "d") {
      try {
        d = std::stoi(value);
      } catch (...) {
        throw Error("line " + std::to_string(line_no) + ": bad dimension '" + value + "'");
      }
      have_d = true;
    } else if (key == "norm") {
      norm = parse_norm(value);
    } else {
      throw Error("line " + std::to_string(line_no) + ": unknown header field '" + key + "'");
    }
  }
  if (!have_d) throw Error("line " + std::to_string(line_no) + ": header missing d=");
  return NormedSpace(d, norm);
}

}  // namespace detail

inline PointSet read_point_set(std::istream& in, std::string label = {}) {
  std::string line;
  std::size_t line_no = 0;
  std::optional<NormedSpace> space;
  while (!space && std::getline(in, line)) {
    ++line_no;
    std::string_view t = trim(line);
    if (t.empty()) continue;
    if (t.rfind("#patchscope", 0) == 0) {
      space = detail::parse_header(t, line_no);
    } else if (t[0] == '#') {
      continue;
    } else {
      throw Error("line " + std::to_string(line_no) + ": data before '#patchscope' header");
    }
  }
  if (!space) throw Error("missing '#patchscope' header");

  std::vector<Point> pts;
  std::unordered_set<Point, PointHash> seen;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view t = detail::strip_comment(line);
    if (t.empty()) continue;
    std::vector<Scalar> coords;
    std::size_t start = 0;
    while (true) {
      auto comma = t.find(',', start);
      std::string_view field = t.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
      try {
        coords.push_back(parse_scalar(field));
      } catch (const Error& e) {
        throw Error("line " + std::to_string(line_no) + ": " + e.what());
      }
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (coords.size() != static_cast<std::size_t>(space->dim())) {
      throw Error("line " + std::to_string(line_no) + ": expected " + std::to_string(space->dim()) + " coordinates, got " +
                  std::to_string(coords.size()));
    }
    Point p(std::move(coords));
    if (!seen.insert(p).second) throw Error("line " + std::to_string(line_no) + ": duplicate point " + to_string(p));
    pts.push_back(std::move(p));
  }
  if (pts.empty()) return PointSet::empty(*space, std::move(label));
  return PointSet(*space, std::move(pts), std::move(label));
}

inline PointSet read_point_set_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  return read_point_set(in, path);
}

inline void write_point_set(std::ostream& out, const PointSet& F) {
  out << "#patchscope d=" << F.dim() << " norm=" << to_string(F.space().norm()) << "\n";
  if (!F.label().empty()) out << "# " << F.label() << "\n";
  for (const auto& p : F) out << to_string(p) << "\n";
}

inline void write_point_set_file(const std::string& path, const PointSet& F) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  write_point_set(out, F);
}

}  // namespace patchscope
