#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "pcgen/errors.hpp"
#include "pcgen/pointcloud.hpp"
#include "pcgen/rng.hpp"

namespace pcgen {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

struct TriMesh {
  std::vector<Point3> verts;
  std::vector<std::array<int, 3>> tris;

  int add_vert(const Point3& p) {
    verts.push_back(p);
    return static_cast<int>(verts.size()) - 1;
  }
  void add_tri(int a, int b, int c) { tris.push_back({a, b, c}); }
  void add_quad(int a, int b, int c, int d) {
    add_tri(a, b, c);
    add_tri(a, c, d);
  }
  void append(const TriMesh& other, const Point3& offset) {
    const int base = static_cast<int>(verts.size());
    for (const Point3& v : other.verts)
      verts.push_back({v[0] + offset[0], v[1] + offset[1], v[2] + offset[2]});
    for (const auto& t : other.tris)
      tris.push_back({t[0] + base, t[1] + base, t[2] + base});
  }
};

double tri_area(const Point3& a, const Point3& b, const Point3& c) {
  const double u[3] = {b[0] - a[0], b[1] - a[1], b[2] - a[2]};
  const double v[3] = {c[0] - a[0], c[1] - a[1], c[2] - a[2]};
  const double x = u[1] * v[2] - u[2] * v[1];
  const double y = u[2] * v[0] - u[0] * v[2];
  const double z = u[0] * v[1] - u[1] * v[0];
  return 0.5 * std::sqrt(x * x + y * y + z * z);
}

// Area-weighted triangle choice, then uniform barycentric coordinates: the
// standard surface-uniform sampler.
std::vector<Point3> sample_surface(const TriMesh& mesh, int n, Rng& rng) {
  std::vector<double> cum(mesh.tris.size());
  double total = 0.0;
  for (std::size_t t = 0; t < mesh.tris.size(); ++t) {
    const auto& tr = mesh.tris[t];
    total += tri_area(mesh.verts[static_cast<std::size_t>(tr[0])],
                      mesh.verts[static_cast<std::size_t>(tr[1])],
                      mesh.verts[static_cast<std::size_t>(tr[2])]);
    cum[t] = total;
  }
  if (!(total > 0.0)) throw numeric_error("synth: zero-area mesh");

  std::vector<Point3> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double pick = rng.uniform() * total;
    const std::size_t t = static_cast<std::size_t>(
        std::lower_bound(cum.begin(), cum.end(), pick) - cum.begin());
    const auto& tr = mesh.tris[std::min(t, mesh.tris.size() - 1)];
    const Point3& a = mesh.verts[static_cast<std::size_t>(tr[0])];
    const Point3& b = mesh.verts[static_cast<std::size_t>(tr[1])];
    const Point3& c = mesh.verts[static_cast<std::size_t>(tr[2])];
    double u = rng.uniform(), v = rng.uniform();
    if (u + v > 1.0) {
      u = 1.0 - u;
      v = 1.0 - v;
    }
    for (int k = 0; k < 3; ++k)
      out[static_cast<std::size_t>(i)][k] =
          a[k] + u * (b[k] - a[k]) + v * (c[k] - a[k]);
  }
  return out;
}

TriMesh box_mesh(double hx, double hy, double hz) {
  TriMesh m;
  for (int sx = -1; sx <= 1; sx += 2)
    for (int sy = -1; sy <= 1; sy += 2)
      for (int sz = -1; sz <= 1; sz += 2)
        m.add_vert({sx * hx, sy * hy, sz * hz});
  // Vertex index = ((sx+1)/2)*4 + ((sy+1)/2)*2 + ((sz+1)/2).
  m.add_quad(0, 1, 3, 2);  // x = -hx
  m.add_quad(4, 6, 7, 5);  // x = +hx
  m.add_quad(0, 4, 5, 1);  // y = -hy
  m.add_quad(2, 3, 7, 6);  // y = +hy
  m.add_quad(0, 2, 6, 4);  // z = -hz
  m.add_quad(1, 5, 7, 3);  // z = +hz
  return m;
}

TriMesh torus_mesh(double R, double r, int nu = 64, int nv = 32) {
  TriMesh m;
  for (int i = 0; i < nu; ++i) {
    const double u = 2.0 * kPi * i / nu;
    for (int j = 0; j < nv; ++j) {
      const double v = 2.0 * kPi * j / nv;
      const double w = R + r * std::cos(v);
      m.add_vert({w * std::cos(u), w * std::sin(u), r * std::sin(v)});
    }
  }
  auto at = [&](int i, int j) { return (i % nu) * nv + (j % nv); };
  for (int i = 0; i < nu; ++i)
    for (int j = 0; j < nv; ++j)
      m.add_quad(at(i, j), at(i + 1, j), at(i + 1, j + 1), at(i, j + 1));
  return m;
}

TriMesh cylinder_mesh(double r, double h, int nu = 64) {
  TriMesh m;
  const double hz = 0.5 * h;
  for (int i = 0; i < nu; ++i) {
    const double u = 2.0 * kPi * i / nu;
    m.add_vert({r * std::cos(u), r * std::sin(u), -hz});
    m.add_vert({r * std::cos(u), r * std::sin(u), +hz});
  }
  const int bot_c = m.add_vert({0, 0, -hz});
  const int top_c = m.add_vert({0, 0, +hz});
  for (int i = 0; i < nu; ++i) {
    const int a = 2 * i, b = 2 * ((i + 1) % nu);
    m.add_quad(a, b, b + 1, a + 1);   // side
    m.add_tri(bot_c, b, a);           // bottom cap
    m.add_tri(top_c, a + 1, b + 1);   // top cap
  }
  return m;
}

// Seat slab, a back rest and four cylindrical legs.
TriMesh chair_mesh(double w, double d, double leg_h, double back_h, Rng& rng,
                   double jmin, double jmax) {
  auto jitter = [&]() { return rng.uniform(jmin, jmax); };
  TriMesh m;
  const double seat_t = 0.12 * jitter();
  TriMesh seat = box_mesh(0.5 * w, 0.5 * d, 0.5 * seat_t);
  m.append(seat, {0, 0, leg_h + 0.5 * seat_t});
  TriMesh back = box_mesh(0.5 * w, 0.5 * seat_t, 0.5 * back_h);
  m.append(back, {0, -0.5 * (d - seat_t), leg_h + seat_t + 0.5 * back_h});
  const double leg_r = 0.07 * jitter();
  const double inset_x = 0.5 * w - 2.0 * leg_r;
  const double inset_y = 0.5 * d - 2.0 * leg_r;
  for (int sx = -1; sx <= 1; sx += 2)
    for (int sy = -1; sy <= 1; sy += 2) {
      TriMesh leg = cylinder_mesh(leg_r, leg_h, 24);
      m.append(leg, {sx * inset_x, sy * inset_y, 0.5 * leg_h});
    }
  return m;
}

std::vector<Point3> sample_sphere(double radius, int n, Rng& rng) {
  // Analytic uniform sampling (normalized Gaussian directions) rather than a
  // triangulated approximation: every point sits at the exact radius.
  std::vector<Point3> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    double x, y, z, nrm;
    do {
      x = rng.normal();
      y = rng.normal();
      z = rng.normal();
      nrm = std::sqrt(x * x + y * y + z * z);
    } while (nrm < 1e-12);
    out[static_cast<std::size_t>(i)] = {radius * x / nrm, radius * y / nrm,
                                        radius * z / nrm};
  }
  return out;
}

}  // namespace

Dataset synth_generate(const ShapeFamilySpec& spec, int count) {
  if (count < 1) throw config_error("synth_generate: count must be >= 1");
  if (spec.n_points < 1) throw config_error("synth_generate: n_points must be >= 1");
  if (!(spec.scale_min > 0.0) || !(spec.scale_max >= spec.scale_min))
    throw config_error("synth_generate: bad scale range [" +
                       std::to_string(spec.scale_min) + ", " +
                       std::to_string(spec.scale_max) + "]");
  const bool known =
      spec.family == "sphere" || spec.family == "box" ||
      spec.family == "torus" || spec.family == "cylinder" ||
      spec.family == "chair";
  if (!known) throw config_error("synth_generate: unknown family '" +
                                 spec.family + "'");

  Dataset out;
  out.clouds.resize(static_cast<std::size_t>(count));
  const std::uint64_t stream = spec.seed ^ fnv1a64(spec.family);
  for (int i = 0; i < count; ++i) {
    Rng rng(derive_seed(stream, static_cast<std::uint64_t>(i)));
    auto jitter = [&]() { return rng.uniform(spec.scale_min, spec.scale_max); };
    PointCloud& cloud = out.clouds[static_cast<std::size_t>(i)];
    cloud.label = spec.family;
    if (spec.family == "sphere") {
      cloud.points = sample_sphere(jitter(), spec.n_points, rng);
    } else {
      TriMesh mesh;
      if (spec.family == "box")
        mesh = box_mesh(1.0 * jitter(), 0.7 * jitter(), 0.5 * jitter());
      else if (spec.family == "torus")
        mesh = torus_mesh(1.0 * jitter(), 0.35 * jitter());
      else if (spec.family == "cylinder")
        mesh = cylinder_mesh(0.5 * jitter(), 2.0 * jitter());
      else
        mesh = chair_mesh(1.0 * jitter(), 1.0 * jitter(), 1.0 * jitter(),
                          1.0 * jitter(), rng, spec.scale_min, spec.scale_max);
      cloud.points = sample_surface(mesh, spec.n_points, rng);
    }
  }
  return out;
}

}  // namespace pcgen
