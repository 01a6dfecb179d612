#include "sthp/spatial.hpp"

#include "sthp/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <stdexcept>
#include <string>

namespace sthp {

namespace {

using Edge = std::pair<int, int>;

Edge edge_key(int a, int b)
{
  return a < b ? Edge{a, b} : Edge{b, a};
}

double dist(const Point2 &a, const Point2 &b)
{
  return std::hypot(a[0] - b[0], a[1] - b[1]);
}

double point_segment_distance(const Point2 &p, const Point2 &a, const Point2 &b)
{
  const double dx = b[0] - a[0], dy = b[1] - a[1];
  const double len2 = dx * dx + dy * dy;
  double s = len2 > 0 ? ((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / len2 : 0.0;
  s = std::clamp(s, 0.0, 1.0);
  return std::hypot(a[0] + s * dx - p[0], a[1] + s * dy - p[1]);
}

// boundary vertices from edges owned by a single triangle
void flag_boundary(SpatialMesh &mesh)
{
  mesh.boundary.assign(mesh.vertices.size(), 0);
  if (mesh.dim == 1) {
    // vertices sorted; ends are Dirichlet
    mesh.boundary.front() = 1;
    mesh.boundary.back() = 1;
    return;
  }
  std::map<Edge, int> count;
  for (const auto &t : mesh.cells)
    for (int k = 0; k < 3; ++k)
      ++count[edge_key(t[k], t[(k + 1) % 3])];
  for (const auto &[e, n] : count)
    if (n == 1) {
      mesh.boundary[e.first] = 1;
      mesh.boundary[e.second] = 1;
    }
}

} // namespace

int SpatialMesh::num_free() const
{
  return static_cast<int>(std::count(boundary.begin(), boundary.end(), 0));
}

double SpatialMesh::cell_diameter(int c) const
{
  const auto &t = cells[c];
  if (dim == 1)
    return std::abs(vertices[t[1]][0] - vertices[t[0]][0]);
  return std::max({dist(vertices[t[0]], vertices[t[1]]), dist(vertices[t[1]], vertices[t[2]]),
                   dist(vertices[t[2]], vertices[t[0]])});
}

double SpatialMesh::cell_measure(int c) const
{
  const auto &t = cells[c];
  if (dim == 1)
    return std::abs(vertices[t[1]][0] - vertices[t[0]][0]);
  const auto &a = vertices[t[0]], &b = vertices[t[1]], &d = vertices[t[2]];
  return 0.5 * std::abs((b[0] - a[0]) * (d[1] - a[1]) - (b[1] - a[1]) * (d[0] - a[0]));
}

double SpatialMesh::hx() const
{
  double h = 0.0;
  for (int c = 0; c < num_cells(); ++c)
    h = std::max(h, cell_diameter(c));
  return h;
}

double SpatialMesh::measure() const
{
  double s = 0.0;
  for (int c = 0; c < num_cells(); ++c)
    s += cell_measure(c);
  return s;
}

double SpatialMesh::min_angle() const
{
  double amin = 4.0;
  for (const auto &t : cells)
    for (int k = 0; k < 3; ++k) {
      const auto &p = vertices[t[k]], &a = vertices[t[(k + 1) % 3]], &b = vertices[t[(k + 2) % 3]];
      const double ux = a[0] - p[0], uy = a[1] - p[1], vx = b[0] - p[0], vy = b[1] - p[1];
      const double ang = std::acos(std::clamp((ux * vx + uy * vy) / (std::hypot(ux, uy) * std::hypot(vx, vy)), -1.0, 1.0));
      amin = std::min(amin, ang);
    }
  return amin;
}

double SpatialMesh::distance_to_origin(int c) const
{
  const Point2 o{0.0, 0.0};
  const auto &t = cells[c];
  if (dim == 1) {
    const double a = vertices[t[0]][0], b = vertices[t[1]][0];
    return (a <= 0.0 && b >= 0.0) ? 0.0 : std::min(std::abs(a), std::abs(b));
  }
  const auto &a = vertices[t[0]], &b = vertices[t[1]], &d = vertices[t[2]];
  // origin inside the triangle?
  const auto side = [](const Point2 &p, const Point2 &q, const Point2 &r) {
    return (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0]);
  };
  const double s1 = side(a, b, o), s2 = side(b, d, o), s3 = side(d, a, o);
  if ((s1 >= 0 && s2 >= 0 && s3 >= 0) || (s1 <= 0 && s2 <= 0 && s3 <= 0))
    return 0.0;
  return std::min({point_segment_distance(o, a, b), point_segment_distance(o, b, d), point_segment_distance(o, d, a)});
}

SpatialMesh uniform_interval_mesh(double x0, double x1, int n_elements)
{
  if (n_elements < 2 || !(x1 > x0))
    throw std::invalid_argument("uniform_interval_mesh: need x1 > x0 and at least 2 elements");
  SpatialMesh mesh;
  mesh.dim = 1;
  for (int i = 0; i <= n_elements; ++i)
    mesh.vertices.push_back({x0 + (x1 - x0) * i / n_elements, 0.0});
  mesh.vertices.back()[0] = x1;
  for (int i = 0; i < n_elements; ++i)
    mesh.cells.push_back({i, i + 1, -1});
  flag_boundary(mesh);
  return mesh;
}

SpatialMesh lshape_mesh()
{
  SpatialMesh mesh;
  mesh.dim = 2;
  mesh.vertices = {{-1, -1}, {0, -1}, {1, -1}, {-1, 0}, {0, 0}, {1, 0}, {-1, 1}, {0, 1},
                   {-0.5, -0.5}, {0.5, -0.5}, {-0.5, 0.5}};
  // squares as counterclockwise corner lists with their centre
  const int squares[3][5] = {{0, 1, 4, 3, 8}, {1, 2, 5, 4, 9}, {3, 4, 7, 6, 10}};
  for (const auto &sq : squares)
    for (int k = 0; k < 4; ++k)
      mesh.cells.push_back({sq[4], sq[k], sq[(k + 1) % 4]});
  flag_boundary(mesh);
  return mesh;
}

SpatialMesh refine_marked(const SpatialMesh &mesh, const std::vector<char> &marked)
{
  if (marked.size() != mesh.cells.size())
    throw std::invalid_argument("refine_marked: marker size does not match the cell count");
  SpatialMesh out;
  out.dim = mesh.dim;
  out.vertices = mesh.vertices;

  if (mesh.dim == 1) {
    // vertices stay sorted: rebuild left to right
    out.vertices.clear();
    for (int c = 0; c < mesh.num_cells(); ++c) {
      const auto &t = mesh.cells[c];
      const Point2 a = mesh.vertices[t[0]], b = mesh.vertices[t[1]];
      if (c == 0)
        out.vertices.push_back(a);
      if (marked[c])
        out.vertices.push_back({0.5 * (a[0] + b[0]), 0.0});
      out.vertices.push_back(b);
    }
    for (int i = 0; i + 1 < static_cast<int>(out.vertices.size()); ++i)
      out.cells.push_back({i, i + 1, -1});
    flag_boundary(out);
    return out;
  }

  // closure: a triangle with any marked edge must have its refinement edge marked
  std::map<Edge, int> edge_mid; // value -1: marked, midpoint not yet created
  for (int c = 0; c < mesh.num_cells(); ++c)
    if (marked[c])
      edge_mid.emplace(edge_key(mesh.cells[c][1], mesh.cells[c][2]), -1);
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto &t : mesh.cells) {
      const Edge ref = edge_key(t[1], t[2]);
      if (edge_mid.count(ref))
        continue;
      if (edge_mid.count(edge_key(t[0], t[1])) || edge_mid.count(edge_key(t[2], t[0]))) {
        edge_mid.emplace(ref, -1);
        changed = true;
      }
    }
  }

  const auto midpoint = [&](int a, int b) {
    int &m = edge_mid.at(edge_key(a, b));
    if (m < 0) {
      m = static_cast<int>(out.vertices.size());
      const auto &pa = out.vertices[a], &pb = out.vertices[b];
      out.vertices.push_back({0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])});
    }
    return m;
  };

  // recursive bisection; children (m, v0, v1) and (m, v2, v0)
  std::vector<std::array<int, 3>> stack;
  for (const auto &t : mesh.cells) {
    stack.push_back(t);
    while (!stack.empty()) {
      const auto cur = stack.back();
      stack.pop_back();
      if (!edge_mid.count(edge_key(cur[1], cur[2]))) {
        out.cells.push_back(cur);
        continue;
      }
      const int m = midpoint(cur[1], cur[2]);
      // push second child first so the first is emitted first
      stack.push_back({m, cur[2], cur[0]});
      stack.push_back({m, cur[0], cur[1]});
    }
  }
  flag_boundary(out);
  return out;
}

SpatialMesh refine_uniform(const SpatialMesh &mesh)
{
  const std::vector<char> all(mesh.cells.size(), 1);
  if (mesh.dim == 1)
    return refine_marked(mesh, all);
  const auto once = refine_marked(mesh, all);
  return refine_marked(once, std::vector<char>(once.cells.size(), 1));
}

SpatialMesh refine_graded(const SpatialMesh &mesh, double target_hx, double beta, double R, double c)
{
  if (!(beta > 0.0 && beta <= 1.0))
    throw std::invalid_argument("refine_graded: grading parameter beta must lie in (0,1]");
  if (!(R > 0.0))
    throw std::invalid_argument("refine_graded: radius R must be positive");
  if (!(target_hx > 0.0))
    throw std::invalid_argument("refine_graded: target mesh width must be positive");
  if (mesh.dim == 2)
    check_conforming(mesh);
  const double floor_dist = std::pow(target_hx, 1.0 / beta);
  SpatialMesh cur = mesh;
  for (int sweep = 0; sweep < 200; ++sweep) {
    std::vector<char> marked(cur.cells.size(), 0);
    bool any = false;
    for (int k = 0; k < cur.num_cells(); ++k) {
      const double d = cur.distance_to_origin(k);
      const double size = d <= R ? c * target_hx * std::pow(std::max(d, floor_dist), 1.0 - beta) : c * target_hx;
      // small slack so exact halvings are not refined once more by roundoff
      if (cur.cell_diameter(k) > size * (1.0 + 1e-12)) {
        marked[k] = 1;
        any = true;
      }
    }
    if (!any)
      return cur;
    cur = refine_marked(cur, marked);
  }
  throw std::runtime_error("refine_graded: sizing loop did not terminate");
}

void check_conforming(const SpatialMesh &mesh)
{
  if (mesh.dim != 2)
    return;
  std::map<Edge, int> count;
  for (const auto &t : mesh.cells)
    for (int k = 0; k < 3; ++k)
      ++count[edge_key(t[k], t[(k + 1) % 3])];
  for (const auto &[e, n] : count)
    if (n > 2)
      throw std::runtime_error("mesh not conforming: edge (" + std::to_string(e.first) + "," + std::to_string(e.second)
                               + ") shared by " + std::to_string(n) + " triangles");
  // a hanging vertex sits at the midpoint of an edge owned by one triangle;
  // midpoints are created as 0.5*(a+b), so exact comparison suffices
  std::map<Point2, int> where;
  for (int v = 0; v < mesh.num_vertices(); ++v)
    where.emplace(mesh.vertices[v], v);
  for (const auto &[e, n] : count) {
    if (n != 1)
      continue;
    const auto &a = mesh.vertices[e.first], &b = mesh.vertices[e.second];
    const auto it = where.find(Point2{0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])});
    if (it != where.end())
      throw std::runtime_error("mesh not conforming: hanging vertex " + std::to_string(it->second));
  }
}

void write_mesh_text(std::ostream &out, const SpatialMesh &mesh)
{
  out.precision(17);
  out << "dim " << mesh.dim << " vertices " << mesh.num_vertices() << " cells " << mesh.num_cells() << "\n";
  for (int v = 0; v < mesh.num_vertices(); ++v)
    out << mesh.vertices[v][0] << " " << mesh.vertices[v][1] << " " << int(mesh.boundary[v]) << "\n";
  for (const auto &t : mesh.cells) {
    out << t[0] << " " << t[1];
    if (mesh.dim == 2)
      out << " " << t[2];
    out << "\n";
  }
}

void p1_element_matrices(const SpatialMesh &mesh, int c, const Coefficient &coefficient, Eigen::Matrix3d &Ml,
                         Eigen::Matrix3d &Al)
{
  const auto &t = mesh.cells[c];
  Ml.setZero();
  Al.setZero();
  if (mesh.dim == 1) {
    const auto &g1 = gauss_legendre_cached(3);
    const double a = mesh.vertices[t[0]][0], b = mesh.vertices[t[1]][0];
    const double h = b - a;
    if (!(h > 0.0))
      throw std::runtime_error("assemble_spatial: degenerate interval " + std::to_string(c));
    double coef = 1.0;
    if (coefficient) {
      coef = 0.0;
      for (std::size_t q = 0; q < g1.size(); ++q)
        coef += 0.5 * g1.weights[q] * coefficient({0.5 * (a + b) + 0.5 * h * g1.nodes[q], 0.0})(0, 0);
    }
    Ml.topLeftCorner<2, 2>() << 2, 1, 1, 2;
    Ml *= h / 6.0;
    Al.topLeftCorner<2, 2>() << 1, -1, -1, 1;
    Al *= coef / h;
    return;
  }
  const auto &p0 = mesh.vertices[t[0]], &p1 = mesh.vertices[t[1]], &p2 = mesh.vertices[t[2]];
  Eigen::Matrix2d J;
  J << p1[0] - p0[0], p2[0] - p0[0], p1[1] - p0[1], p2[1] - p0[1];
  const double det = J.determinant();
  if (!(std::abs(det) > 1e-300))
    throw std::runtime_error("assemble_spatial: degenerate triangle " + std::to_string(c));
  const double area = 0.5 * std::abs(det);
  Ml << 2, 1, 1, 1, 2, 1, 1, 1, 2;
  Ml *= area / 12.0;
  // reference gradients of (1-x-y, x, y)
  Eigen::Matrix<double, 2, 3> G;
  G << -1, 1, 0, -1, 0, 1;
  const Eigen::Matrix<double, 2, 3> grad = J.inverse().transpose() * G;
  Eigen::Matrix2d Abar = Eigen::Matrix2d::Identity();
  if (coefficient) {
    static const auto rule = triangle_rule(4);
    Abar.setZero();
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const double x = rule.points[q][0], y = rule.points[q][1];
      const Point2 pt{p0[0] + J(0, 0) * x + J(0, 1) * y, p0[1] + J(1, 0) * x + J(1, 1) * y};
      Abar += 2.0 * rule.weights[q] * coefficient(pt);
    }
  }
  Al = area * grad.transpose() * Abar * grad;
}

SpatialSystem assemble_spatial(const SpatialMesh &mesh, const Coefficient &coefficient)
{
  SpatialSystem sys;
  sys.mesh = mesh;
  const int nv = mesh.num_vertices();
  sys.dof_of_vertex.assign(nv, -1);
  for (int v = 0; v < nv; ++v)
    if (!mesh.boundary[v]) {
      sys.dof_of_vertex[v] = static_cast<int>(sys.vertex_of_dof.size());
      sys.vertex_of_dof.push_back(v);
    }
  const int N = sys.size();

  std::vector<Eigen::Triplet<double>> mass, stiff;
  const int nloc = mesh.dim == 1 ? 2 : 3;
  Eigen::Matrix3d Ml, Al;
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const auto &t = mesh.cells[c];
    p1_element_matrices(mesh, c, coefficient, Ml, Al);
    for (int a = 0; a < nloc; ++a)
      for (int b = 0; b < nloc; ++b) {
        mass.emplace_back(t[a], t[b], Ml(a, b));
        stiff.emplace_back(t[a], t[b], Al(a, b));
      }
  }

  SparseMatrix Mfull(nv, nv), Afull(nv, nv);
  Mfull.setFromTriplets(mass.begin(), mass.end());
  Afull.setFromTriplets(stiff.begin(), stiff.end());
  sys.M_full = Mfull;
  sys.A_full = Afull;

  std::vector<Eigen::Triplet<double>> m_c, a_c, m_r;
  for (int i = 0; i < N; ++i) {
    const int v = sys.vertex_of_dof[i];
    for (SparseMatrix::InnerIterator it(Mfull, v); it; ++it) {
      m_r.emplace_back(i, it.col(), it.value());
      const int j = sys.dof_of_vertex[it.col()];
      if (j >= 0)
        m_c.emplace_back(i, j, it.value());
    }
    for (SparseMatrix::InnerIterator it(Afull, v); it; ++it) {
      const int j = sys.dof_of_vertex[it.col()];
      if (j >= 0)
        a_c.emplace_back(i, j, it.value());
    }
  }
  sys.M.resize(N, N);
  sys.A.resize(N, N);
  sys.M_rows.resize(N, nv);
  sys.M.setFromTriplets(m_c.begin(), m_c.end());
  sys.A.setFromTriplets(a_c.begin(), a_c.end());
  sys.M_rows.setFromTriplets(m_r.begin(), m_r.end());
  return sys;
}

SpatialQuadrature spatial_quadrature(const SpatialMesh &mesh, int degree)
{
  SpatialQuadrature quad;
  if (mesh.dim == 1) {
    const auto &g = gauss_legendre_cached(std::max(1, (degree + 2) / 2));
    for (int c = 0; c < mesh.num_cells(); ++c) {
      const auto &t = mesh.cells[c];
      const double a = mesh.vertices[t[0]][0], b = mesh.vertices[t[1]][0];
      for (std::size_t q = 0; q < g.size(); ++q) {
        const double xi = 0.5 * (g.nodes[q] + 1.0);
        quad.points.push_back({a + (b - a) * xi, 0.0});
        quad.weights.push_back(0.5 * (b - a) * g.weights[q]);
        quad.cell.push_back(c);
        quad.shape.push_back({1.0 - xi, xi, 0.0});
      }
    }
    return quad;
  }
  const auto rule = triangle_rule(degree);
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const auto &t = mesh.cells[c];
    const auto &p0 = mesh.vertices[t[0]], &p1 = mesh.vertices[t[1]], &p2 = mesh.vertices[t[2]];
    const double det2 = 2.0 * mesh.cell_measure(c);
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const double x = rule.points[q][0], y = rule.points[q][1];
      quad.points.push_back({p0[0] + (p1[0] - p0[0]) * x + (p2[0] - p0[0]) * y,
                             p0[1] + (p1[1] - p0[1]) * x + (p2[1] - p0[1]) * y});
      quad.weights.push_back(det2 * rule.weights[q]);
      quad.cell.push_back(c);
      quad.shape.push_back({1.0 - x - y, x, y});
    }
  }
  return quad;
}

} // namespace sthp
