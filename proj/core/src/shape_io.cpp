#include "shred/shape_io.hpp"

#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "shred/error.hpp"

namespace shred {
namespace {

bool next_data_line(std::istream& in, std::string& line) {
  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    return true;
  }
  return false;
}

}  // namespace

Shape read_shape(std::istream& in, const std::string& id) {
  std::string line;
  if (!next_data_line(in, line)) throw Error("'" + id + "': missing SHRD1 header");
  std::istringstream header(line);
  std::string magic;
  long long n = -1;
  int has_gt = -1;
  header >> magic >> n >> has_gt;
  if (magic != "SHRD1" || !header || n < 1 || (has_gt != 0 && has_gt != 1)) {
    throw Error("'" + id + "': bad SHRD1 header: " + line);
  }

  std::vector<Vec3> positions;
  std::vector<Vec3> normals;
  std::vector<std::int64_t> gt;
  std::vector<std::int64_t> semantic;
  positions.reserve(static_cast<std::size_t>(n));
  normals.reserve(static_cast<std::size_t>(n));
  for (long long row = 0; row < n; ++row) {
    if (!next_data_line(in, line)) {
      throw Error("'" + id + "': expected " + std::to_string(n) +
                  " points, got " + std::to_string(row));
    }
    std::istringstream fields(line);
    Vec3 p;
    Vec3 nrm;
    fields >> p.x >> p.y >> p.z >> nrm.x >> nrm.y >> nrm.z;
    if (!fields) {
      throw Error("'" + id + "': malformed point line " + std::to_string(row));
    }
    positions.push_back(p);
    normals.push_back(nrm);
    if (has_gt == 1) {
      std::int64_t label = -1;
      if (!(fields >> label) || label < 0) {
        throw Error("'" + id + "': missing gt label on point " +
                    std::to_string(row));
      }
      gt.push_back(label);
      std::int64_t sem = 0;
      if (fields >> sem) semantic.push_back(sem);
    }
  }
  std::optional<std::vector<std::int64_t>> gt_opt;
  std::optional<std::vector<std::int64_t>> sem_opt;
  if (has_gt == 1) gt_opt = std::move(gt);
  if (!semantic.empty()) {
    if (semantic.size() != positions.size()) {
      throw Error("'" + id + "': semantic ids must be given for all points or none");
    }
    sem_opt = std::move(semantic);
  }
  return Shape(id, std::move(positions), std::move(normals), std::move(gt_opt),
               std::move(sem_opt));
}

Shape load_shape(const std::filesystem::path& path, bool normalize) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open shape file " + path.string());
  Shape shape = read_shape(in, path.stem().string());
  return normalize ? normalized_copy(shape) : shape;
}

void write_shape(std::ostream& out, const Shape& shape) {
  const auto flags = out.flags();
  const auto precision = out.precision();
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  out << "SHRD1 " << shape.size() << ' ' << (shape.has_gt() ? 1 : 0) << '\n';
  const auto pos = shape.positions();
  const auto nrm = shape.normals();
  for (std::size_t i = 0; i < shape.size(); ++i) {
    out << pos[i].x << ' ' << pos[i].y << ' ' << pos[i].z << ' ' << nrm[i].x
        << ' ' << nrm[i].y << ' ' << nrm[i].z;
    if (shape.has_gt()) {
      out << ' ' << shape.gt_labels()[i];
      if (shape.gt_semantic()) out << ' ' << (*shape.gt_semantic())[i];
    }
    out << '\n';
  }
  out.flags(flags);
  out.precision(precision);
}

void save_shape(const std::filesystem::path& path, const Shape& shape) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write shape file " + path.string());
  write_shape(out, shape);
}

}  // namespace shred
