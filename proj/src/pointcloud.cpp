#include "pcgen/pointcloud.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "pcgen/errors.hpp"
#include "pcgen/rng.hpp"

namespace pcgen {

std::vector<int> Dataset::part_indices(SplitPart part) const {
  std::vector<int> out;
  for (std::size_t i = 0; i < split.size(); ++i)
    if (split[i] == part) out.push_back(static_cast<int>(i));
  return out;
}

std::vector<std::string> Dataset::distinct_labels() const {
  std::set<std::string> seen;
  for (const auto& c : clouds) seen.insert(c.label);
  return {seen.begin(), seen.end()};
}

Dataset concat(const std::vector<Dataset>& parts) {
  Dataset out;
  for (const Dataset& d : parts) {
    out.clouds.insert(out.clouds.end(), d.clouds.begin(), d.clouds.end());
    out.split.insert(out.split.end(), d.split.begin(), d.split.end());
  }
  if (out.split.size() != out.clouds.size()) out.split.clear();
  return out;
}

PointCloud normalize(const PointCloud& cloud) {
  if (cloud.points.empty()) throw numeric_error("normalize: empty cloud");
  Point3 centroid = {0, 0, 0};
  for (const Point3& p : cloud.points)
    for (int k = 0; k < 3; ++k) centroid[k] += p[k];
  for (int k = 0; k < 3; ++k)
    centroid[k] /= static_cast<double>(cloud.points.size());

  double max_norm = 0.0;
  for (const Point3& p : cloud.points) {
    double n2 = 0.0;
    for (int k = 0; k < 3; ++k) {
      const double d = p[k] - centroid[k];
      n2 += d * d;
    }
    max_norm = std::max(max_norm, std::sqrt(n2));
  }
  if (max_norm == 0.0)
    throw numeric_error("normalize: degenerate cloud (all points identical)");

  const double s = 0.5 / max_norm;
  PointCloud out;
  out.label = cloud.label;
  out.points.resize(cloud.points.size());
  for (std::size_t i = 0; i < cloud.points.size(); ++i)
    for (int k = 0; k < 3; ++k)
      out.points[i][k] = (cloud.points[i][k] - centroid[k]) * s;
  return out;
}

Dataset split(const Dataset& dataset, std::array<double, 3> fractions,
              std::uint64_t seed) {
  if (dataset.clouds.empty()) throw config_error("split: empty dataset");
  double sum = 0.0;
  for (double f : fractions) {
    if (f < 0.0) throw config_error("split: negative fraction");
    sum += f;
  }
  if (std::fabs(sum - 1.0) > 1e-9)
    throw config_error("split: fractions sum to " + std::to_string(sum) +
                       ", expected 1");

  Dataset out;
  out.clouds = dataset.clouds;
  out.split.assign(out.clouds.size(), SplitPart::train);

  // Group cloud indices per label, in sorted label order for determinism.
  const auto labels = dataset.distinct_labels();
  Rng rng(seed);
  for (const std::string& label : labels) {
    std::vector<int> idx;
    for (std::size_t i = 0; i < dataset.clouds.size(); ++i)
      if (dataset.clouds[i].label == label) idx.push_back(static_cast<int>(i));
    // Fisher-Yates with the shared stream (label order is fixed, so the
    // assignment is a pure function of the seed).
    for (int i = static_cast<int>(idx.size()) - 1; i > 0; --i)
      std::swap(idx[static_cast<std::size_t>(i)],
                idx[static_cast<std::size_t>(rng.uniform_int(i + 1))]);

    // Largest-remainder allocation of this class across the three parts.
    const int m = static_cast<int>(idx.size());
    std::array<int, 3> count;
    std::array<double, 3> frac;
    int assigned = 0;
    for (int p = 0; p < 3; ++p) {
      const double target = fractions[static_cast<std::size_t>(p)] * m;
      count[static_cast<std::size_t>(p)] = static_cast<int>(std::floor(target));
      frac[static_cast<std::size_t>(p)] =
          target - std::floor(target);
      assigned += count[static_cast<std::size_t>(p)];
    }
    std::array<int, 3> order = {0, 1, 2};
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return frac[static_cast<std::size_t>(a)] > frac[static_cast<std::size_t>(b)];
    });
    for (int r = 0; r < m - assigned; ++r)
      count[static_cast<std::size_t>(order[static_cast<std::size_t>(r % 3)])]++;

    int at = 0;
    for (int p = 0; p < 3; ++p)
      for (int c = 0; c < count[static_cast<std::size_t>(p)]; ++c)
        out.split[static_cast<std::size_t>(idx[static_cast<std::size_t>(at++)])] =
            static_cast<SplitPart>(p);
  }
  return out;
}

// ------------------------------------------------------------------- PLY

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

bool numeric_ply_type(const std::string& t) {
  return t == "float" || t == "double" || t == "float32" || t == "float64" ||
         t == "char" || t == "uchar" || t == "short" || t == "ushort" ||
         t == "int" || t == "uint" || t == "int8" || t == "uint8" ||
         t == "int16" || t == "uint16" || t == "int32" || t == "uint32";
}

}  // namespace

PointCloud load_ply(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open '" + path + "'");

  auto fail = [&](const std::string& why) -> void {
    throw io_error(path + ": " + why);
  };

  std::string line;
  if (!std::getline(in, line) || trim(line) != "ply") fail("missing 'ply' magic");
  bool saw_format = false, in_vertex = false, header_done = false;
  long n_vertices = -1;
  std::vector<std::string> vertex_props;  // property names, in order
  std::string label;

  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string word;
    ls >> word;
    if (word == "comment") {
      std::string tag;
      ls >> tag;
      if (tag == "label") {
        std::string rest;
        std::getline(ls, rest);
        label = trim(rest);
      }
      continue;
    }
    if (word == "format") {
      std::string kind, version;
      ls >> kind >> version;
      if (kind != "ascii" || version != "1.0")
        fail("unsupported format '" + kind + " " + version + "'");
      saw_format = true;
    } else if (word == "element") {
      std::string name;
      long count = -1;
      ls >> name >> count;
      if (name == "vertex") {
        if (count < 0) fail("bad vertex count");
        n_vertices = count;
        in_vertex = true;
      } else {
        in_vertex = false;  // later elements (faces...) are ignored
      }
    } else if (word == "property") {
      if (!in_vertex) continue;
      std::string type, name;
      ls >> type;
      if (type == "list") fail("list property in vertex element");
      if (!numeric_ply_type(type)) fail("unknown property type '" + type + "'");
      ls >> name;
      vertex_props.push_back(name);
    } else if (word == "end_header") {
      header_done = true;
      break;
    } else {
      fail("unexpected header line '" + line + "'");
    }
  }
  if (!header_done) fail("header not terminated by end_header");
  if (!saw_format) fail("missing format line");
  if (n_vertices < 0) fail("missing vertex element");
  if (n_vertices == 0) fail("empty vertex element");

  int ix = -1, iy = -1, iz = -1;
  for (std::size_t i = 0; i < vertex_props.size(); ++i) {
    if (vertex_props[i] == "x") ix = static_cast<int>(i);
    if (vertex_props[i] == "y") iy = static_cast<int>(i);
    if (vertex_props[i] == "z") iz = static_cast<int>(i);
  }
  if (ix < 0 || iy < 0 || iz < 0) fail("vertex element lacks x/y/z properties");

  PointCloud cloud;
  cloud.label = label;
  cloud.points.reserve(static_cast<std::size_t>(n_vertices));
  const int n_props = static_cast<int>(vertex_props.size());
  for (long v = 0; v < n_vertices; ++v) {
    if (!std::getline(in, line)) fail("unexpected end of file in vertex data");
    std::istringstream ls(line);
    std::vector<double> fields(static_cast<std::size_t>(n_props));
    for (int p = 0; p < n_props; ++p)
      if (!(ls >> fields[static_cast<std::size_t>(p)]))
        fail("bad vertex line '" + line + "'");
    Point3 pt = {fields[static_cast<std::size_t>(ix)],
                 fields[static_cast<std::size_t>(iy)],
                 fields[static_cast<std::size_t>(iz)]};
    for (double c : pt)
      if (!std::isfinite(c)) fail("non-finite coordinate in vertex data");
    cloud.points.push_back(pt);
  }
  return cloud;
}

void save_ply(const PointCloud& cloud, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot write '" + path + "'");
  out << "ply\nformat ascii 1.0\n";
  if (!cloud.label.empty()) out << "comment label " << cloud.label << "\n";
  out << "element vertex " << cloud.points.size() << "\n"
      << "property float x\nproperty float y\nproperty float z\n"
      << "end_header\n";
  char buf[128];
  for (const Point3& p : cloud.points) {
    std::snprintf(buf, sizeof buf, "%.9g %.9g %.9g\n", p[0], p[1], p[2]);
    out << buf;
  }
  if (!out) throw io_error("write failed for '" + path + "'");
}

}  // namespace pcgen
