#include "mtf/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>

namespace mtf::geometry {
namespace {

double cross(const Vec2& u, const Vec2& v) { return u.x() * v.y() - u.y() * v.x(); }

double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 d = b - a;
  const double len2 = d.squaredNorm();
  double t = len2 > 0.0 ? (p - a).dot(d) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return (p - (a + t * d)).norm();
}

double segment_segment_distance(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
  const double d1 = cross(b - a, c - a);
  const double d2 = cross(b - a, d - a);
  const double d3 = cross(d - c, a - c);
  const double d4 = cross(d - c, b - c);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) {
    return 0.0;
  }
  return std::min({point_segment_distance(a, c, d), point_segment_distance(b, c, d),
                   point_segment_distance(c, a, b), point_segment_distance(d, a, b)});
}

double signed_area(const std::vector<Vec2>& v) {
  double s = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    s += cross(v[i], v[(i + 1) % v.size()]);
  }
  return 0.5 * s;
}

double curve_scale(const ClosedCurve& c) {
  if (const auto* ci = std::get_if<Circle>(&c.shape)) {
    return ci->radius + ci->center.norm();
  }
  double s = 0.0;
  for (const auto& v : std::get<Polygon>(c.shape).vertices) {
    s = std::max(s, v.norm());
  }
  return s;
}

void validate_polygon(const Polygon& poly, int index) {
  const auto& v = poly.vertices;
  const std::size_t n = v.size();
  if (n < 3) {
    throw ValidationError("curve " + std::to_string(index) + ": polygon needs at least 3 vertices");
  }
  double scale = 0.0;
  for (const auto& p : v) {
    if (!std::isfinite(p.x()) || !std::isfinite(p.y())) {
      throw ValidationError("curve " + std::to_string(index) + ": non-finite vertex");
    }
    scale = std::max(scale, p.norm());
  }
  const double tol = 1e-12 * std::max(scale, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if ((v[i] - v[j]).norm() <= tol) {
        throw ValidationError("curve " + std::to_string(index) + ": polygon vertices are not distinct");
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& a = v[i];
    const Vec2& b = v[(i + 1) % n];
    for (std::size_t j = i + 1; j < n; ++j) {
      const Vec2& c = v[j];
      const Vec2& d = v[(j + 1) % n];
      const bool adjacent = (j == i + 1) || (i == 0 && j == n - 1);
      if (adjacent) {
        // consecutive edges may only meet at their shared vertex
        const Vec2 shared = (j == i + 1) ? b : a;
        const Vec2 p = (j == i + 1) ? a : b;
        const Vec2 q = (j == i + 1) ? d : c;
        const Vec2 e1 = p - shared;
        const Vec2 e2 = q - shared;
        if (std::fabs(cross(e1, e2)) <= tol * (e1.norm() + e2.norm()) && e1.dot(e2) > 0.0) {
          throw ValidationError("curve " + std::to_string(index) + ": polygon is not simple (edges fold back)");
        }
        continue;
      }
      if (segment_segment_distance(a, b, c, d) <= tol) {
        throw ValidationError("curve " + std::to_string(index) + ": polygon is not simple (self-intersection)");
      }
    }
  }
  if (std::fabs(signed_area(v)) <= tol * tol) {
    throw ValidationError("curve " + std::to_string(index) + ": polygon has zero area");
  }
}

// True when the two curves intersect or touch.
bool curves_meet(const ClosedCurve& p, const ClosedCurve& q) {
  const double tol = 1e-12 * std::max({curve_scale(p), curve_scale(q), 1.0});
  const auto* cp = std::get_if<Circle>(&p.shape);
  const auto* cq = std::get_if<Circle>(&q.shape);
  if (cp && cq) {
    const double d = (cp->center - cq->center).norm();
    return d <= cp->radius + cq->radius + tol && d >= std::fabs(cp->radius - cq->radius) - tol;
  }
  if (cp || cq) {
    const Circle& c = cp ? *cp : *cq;
    const auto& v = std::get<Polygon>((cp ? q : p).shape).vertices;
    double dmin = INFINITY;
    double dmax = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      dmin = std::min(dmin, point_segment_distance(c.center, v[i], v[(i + 1) % v.size()]));
      dmax = std::max(dmax, (v[i] - c.center).norm());
    }
    return dmin <= c.radius + tol && c.radius <= dmax + tol;
  }
  const auto& a = std::get<Polygon>(p.shape).vertices;
  const auto& b = std::get<Polygon>(q.shape).vertices;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) {
      if (segment_segment_distance(a[i], a[(i + 1) % a.size()], b[j], b[(j + 1) % b.size()]) <= tol) {
        return true;
      }
    }
  }
  return false;
}

Vec2 json_point(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 2) {
    throw ValidationError("expected a point [x, y]");
  }
  return Vec2(j[0].get<double>(), j[1].get<double>());
}

}  // namespace

double ClosedCurve::length() const {
  if (const auto* c = std::get_if<Circle>(&shape)) {
    return 2.0 * kPi * c->radius;
  }
  const auto& v = std::get<Polygon>(shape).vertices;
  double len = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    len += (v[(i + 1) % v.size()] - v[i]).norm();
  }
  return len;
}

double ClosedCurve::enclosed_area() const {
  if (const auto* c = std::get_if<Circle>(&shape)) {
    return kPi * c->radius * c->radius;
  }
  return std::fabs(signed_area(std::get<Polygon>(shape).vertices));
}

bool ClosedCurve::contains(const Vec2& p) const {
  if (const auto* c = std::get_if<Circle>(&shape)) {
    return (p - c->center).norm() < c->radius;
  }
  const auto& v = std::get<Polygon>(shape).vertices;
  bool inside = false;
  for (std::size_t i = 0, j = v.size() - 1; i < v.size(); j = i++) {
    if ((v[i].y() > p.y()) != (v[j].y() > p.y())) {
      const double x = v[j].x() + (p.y() - v[j].y()) * (v[i].x() - v[j].x()) / (v[i].y() - v[j].y());
      if (p.x() < x) {
        inside = !inside;
      }
    }
  }
  return inside;
}

Vec2 ClosedCurve::sample_point() const {
  if (const auto* c = std::get_if<Circle>(&shape)) {
    return c->center + Vec2(c->radius, 0.0);
  }
  return std::get<Polygon>(shape).vertices.front();
}

Vec2 SkeletonMesh::panel_normal(int panel) const {
  const auto& p = panels[panel];
  const Vec2 t = (nodes[p.b] - nodes[p.a]).normalized();
  return Vec2(t.y(), -t.x());
}

PartitionConfig parse_partition_config(const nlohmann::json& doc) {
  try {
    PartitionConfig cfg;
    if (doc.contains("id")) {
      cfg.id = doc.at("id").get<std::string>();
    }
    for (const auto& s : doc.at("subdomains")) {
      cfg.kappas.push_back(s.at("kappa").get<double>());
    }
    for (const auto& c : doc.at("curves")) {
      CurveSpec spec;
      const auto kind = c.at("kind").get<std::string>();
      if (kind == "circle") {
        spec.curve.shape = Circle{json_point(c.at("center")), c.at("radius").get<double>()};
      } else if (kind == "polygon") {
        Polygon poly;
        for (const auto& v : c.at("vertices")) {
          poly.vertices.push_back(json_point(v));
        }
        spec.curve.shape = std::move(poly);
      } else {
        throw ValidationError("unknown curve kind '" + kind + "'");
      }
      const auto& between = c.at("between");
      if (!between.is_array() || between.size() != 2) {
        throw ValidationError("curve 'between' must list two subdomain indices");
      }
      spec.between = {between[0].get<int>(), between[1].get<int>()};
      cfg.curves.push_back(std::move(spec));
    }
    if (doc.contains("h")) {
      cfg.h = doc.at("h").get<double>();
    }
    return cfg;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("partition config: ") + e.what());
  }
}

SubdomainPartition build_partition(const PartitionConfig& config) {
  const int nsub = static_cast<int>(config.kappas.size());
  if (nsub < 2) {
    throw ValidationError("a partition needs at least two subdomains");
  }
  for (int j = 0; j < nsub; ++j) {
    if (!(config.kappas[j] > 0.0) || !std::isfinite(config.kappas[j])) {
      throw ValidationError("wave number of subdomain " + std::to_string(j) + " must be positive");
    }
  }
  SubdomainPartition part;
  part.id = config.id;
  part.kappas = config.kappas;
  const int ncurves = static_cast<int>(config.curves.size());
  if (ncurves != nsub - 1) {
    throw ValidationError("a junction-free partition of " + std::to_string(nsub) + " subdomains needs " +
                          std::to_string(nsub - 1) + " interface curves, got " + std::to_string(ncurves));
  }

  for (int c = 0; c < ncurves; ++c) {
    ClosedCurve curve = config.curves[c].curve;
    if (auto* ci = std::get_if<Circle>(&curve.shape)) {
      if (!(ci->radius > 0.0) || !std::isfinite(ci->radius)) {
        throw ValidationError("curve " + std::to_string(c) + ": circle radius must be positive");
      }
    } else {
      auto& poly = std::get<Polygon>(curve.shape);
      validate_polygon(poly, c);
      if (signed_area(poly.vertices) < 0.0) {
        std::reverse(poly.vertices.begin(), poly.vertices.end());
      }
    }
    curve.counterclockwise = true;
    for (int j : config.curves[c].between) {
      if (j < 0 || j >= nsub) {
        throw ValidationError("curve " + std::to_string(c) + ": subdomain index out of range");
      }
    }
    if (config.curves[c].between[0] == config.curves[c].between[1]) {
      throw ValidationError("curve " + std::to_string(c) + ": an interface separates two distinct subdomains");
    }
    part.curves.push_back(std::move(curve));
  }

  for (int c = 0; c < ncurves; ++c) {
    for (int d = c + 1; d < ncurves; ++d) {
      if (curves_meet(part.curves[c], part.curves[d])) {
        throw ValidationError("junction detected: curves " + std::to_string(c) + " and " + std::to_string(d) +
                              " intersect or touch; interfaces must be pairwise disjoint closed curves");
      }
    }
  }

  // parent = smallest curve enclosing this one
  std::vector<int> parent(ncurves, -1);
  for (int c = 0; c < ncurves; ++c) {
    const Vec2 p = part.curves[c].sample_point();
    for (int d = 0; d < ncurves; ++d) {
      if (d == c || !part.curves[d].contains(p)) {
        continue;
      }
      if (parent[c] < 0 || part.curves[d].enclosed_area() < part.curves[parent[c]].enclosed_area()) {
        parent[c] = d;
      }
    }
  }

  // resolve sides from the outermost curves inwards
  std::vector<int> depth(ncurves, 0);
  for (int c = 0; c < ncurves; ++c) {
    for (int p = parent[c]; p >= 0; p = parent[p]) {
      ++depth[c];
    }
  }
  std::vector<int> order(ncurves);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return depth[a] < depth[b]; });
  part.interfaces.assign(ncurves, Interface{-1, -1, -1});
  for (int c : order) {
    const int outside = parent[c] < 0 ? 0 : part.interfaces[parent[c]].inside;
    const auto& between = config.curves[c].between;
    if (between[0] != outside && between[1] != outside) {
      std::ostringstream msg;
      msg << "curve " << c << " is declared between subdomains " << between[0] << " and " << between[1]
          << " but its unbounded side is subdomain " << outside;
      throw ValidationError(msg.str());
    }
    const int inside = between[0] == outside ? between[1] : between[0];
    if (inside == 0) {
      throw ValidationError("curve " + std::to_string(c) + " encloses the unbounded subdomain 0");
    }
    part.interfaces[c] = Interface{inside, outside, c};
  }

  std::vector<int> enclosing(nsub, 0);
  for (const auto& itf : part.interfaces) {
    ++enclosing[itf.inside];
  }
  for (int j = 1; j < nsub; ++j) {
    if (enclosing[j] != 1) {
      throw ValidationError("subdomain " + std::to_string(j) + " must be enclosed by exactly one curve, found " +
                            std::to_string(enclosing[j]));
    }
  }

  part.bounding_curves.assign(nsub, {});
  for (const auto& itf : part.interfaces) {
    part.bounding_curves[itf.inside].push_back(itf.curve);
    part.bounding_curves[itf.outside].push_back(itf.curve);
  }
  build_adjacency_tree(part);
  return part;
}

SkeletonMesh mesh_skeleton(const SubdomainPartition& partition, double h) {
  if (!(h > 0.0) || !std::isfinite(h)) {
    throw ValidationError("mesh width h must be positive");
  }
  SkeletonMesh mesh;
  mesh.h = h;
  const int ncurves = static_cast<int>(partition.curves.size());
  mesh.curve_nodes.resize(ncurves);
  mesh.curve_panels.resize(ncurves);
  for (int c = 0; c < ncurves; ++c) {
    const auto& curve = partition.curves[c];
    const int count = static_cast<int>(std::ceil(curve.length() / h - 1e-9));
    if (count < 3) {
      throw ValidationError("mesh width h = " + std::to_string(h) + " leaves fewer than 3 panels on curve " +
                            std::to_string(c));
    }
    std::vector<Vec2> pts;
    std::vector<Vec2> normals;
    if (const auto* ci = std::get_if<Circle>(&curve.shape)) {
      for (int i = 0; i < count; ++i) {
        const double th = 2.0 * kPi * i / count;
        const Vec2 dir(std::cos(th), std::sin(th));
        pts.push_back(ci->center + ci->radius * dir);
        normals.push_back(dir);
      }
    } else {
      const auto& v = std::get<Polygon>(curve.shape).vertices;
      const std::size_t nv = v.size();
      if (static_cast<std::size_t>(count) < nv) {
        throw ValidationError("mesh width too coarse to keep every vertex of curve " + std::to_string(c));
      }
      // largest-remainder split of the panel count over the sides
      const double total = curve.length();
      std::vector<int> per(nv);
      std::vector<std::pair<double, std::size_t>> rem;
      int used = 0;
      for (std::size_t s = 0; s < nv; ++s) {
        const double ideal = count * (v[(s + 1) % nv] - v[s]).norm() / total;
        per[s] = std::max(1, static_cast<int>(std::floor(ideal)));
        used += per[s];
        rem.emplace_back(ideal - std::floor(ideal), s);
      }
      std::stable_sort(rem.begin(), rem.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
      for (std::size_t k = 0; used < count; k = (k + 1) % nv) {
        ++per[rem[k].second];
        ++used;
      }
      while (used > count) {
        const auto it = std::max_element(per.begin(), per.end());
        --*it;
        --used;
      }
      for (std::size_t s = 0; s < nv; ++s) {
        const Vec2& a = v[s];
        const Vec2& b = v[(s + 1) % nv];
        const Vec2 t = (b - a).normalized();
        const Vec2 side_normal(t.y(), -t.x());
        const Vec2 tp = (a - v[(s + nv - 1) % nv]).normalized();
        const Vec2 vertex_normal = (side_normal + Vec2(tp.y(), -tp.x())).normalized();
        for (int i = 0; i < per[s]; ++i) {
          pts.push_back(i == 0 ? a : Vec2(a + (static_cast<double>(i) / per[s]) * (b - a)));
          normals.push_back(i == 0 ? vertex_normal : side_normal);
        }
      }
    }
    const int base = static_cast<int>(mesh.nodes.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
      mesh.nodes.push_back(pts[i]);
      mesh.nodal_normals.push_back(normals[i]);
      mesh.curve_nodes[c].push_back(base + static_cast<int>(i));
    }
    const int n = static_cast<int>(pts.size());
    const auto& itf = partition.interfaces[c];
    for (int i = 0; i < n; ++i) {
      const int a = base + i;
      const int b = base + (i + 1) % n;
      const double len = (mesh.nodes[b] - mesh.nodes[a]).norm();
      if (len < 0.5 * h || len > 1.5 * h) {
        throw ValidationError("panel length " + std::to_string(len) + " on curve " + std::to_string(c) +
                              " falls outside [0.5h, 1.5h]; choose h compatible with the polygon sides");
      }
      mesh.curve_panels[c].push_back(static_cast<int>(mesh.panels.size()));
      mesh.panels.push_back(SkeletonPanel{a, b, c});
      mesh.panel_tags.push_back({itf.inside, itf.outside});
    }
  }
  return mesh;
}

std::vector<BoundaryMesh> induce_boundary_meshes(const SubdomainPartition& partition, const SkeletonMesh& skeleton) {
  std::vector<BoundaryMesh> out;
  for (int j = 0; j < partition.subdomain_count(); ++j) {
    BoundaryMesh bm;
    bm.subdomain = j;
    for (int c : partition.bounding_curves[j]) {
      const int sign = partition.interfaces[c].inside == j ? 1 : -1;
      bm.curves.push_back(c);
      bm.curve_signs.push_back(sign);
      for (int p : skeleton.curve_panels[c]) {
        bm.panels.push_back(OrientedPanel{p, sign});
      }
    }
    out.push_back(std::move(bm));
  }
  return out;
}

int AdjacencyTree::longest_chain() const {
  std::vector<std::vector<int>> adj(node_count);
  for (const auto& e : edges) {
    adj[e.inside].push_back(e.outside);
    adj[e.outside].push_back(e.inside);
  }
  auto farthest = [&](int start) {
    std::vector<int> dist(node_count, -1);
    std::vector<int> stack{start};
    dist[start] = 0;
    int best = start;
    while (!stack.empty()) {
      const int u = stack.back();
      stack.pop_back();
      if (dist[u] > dist[best]) {
        best = u;
      }
      for (int w : adj[u]) {
        if (dist[w] < 0) {
          dist[w] = dist[u] + 1;
          stack.push_back(w);
        }
      }
    }
    return std::pair{best, dist[best]};
  };
  return farthest(farthest(0).first).second;
}

AdjacencyTree build_adjacency_tree(const SubdomainPartition& partition) {
  AdjacencyTree tree;
  tree.node_count = partition.subdomain_count();
  tree.edges = partition.interfaces;
  tree.parent.assign(tree.node_count, -1);
  std::vector<int> root(tree.node_count);
  std::iota(root.begin(), root.end(), 0);
  std::function<int(int)> find = [&](int x) { return root[x] == x ? x : root[x] = find(root[x]); };
  for (const auto& e : tree.edges) {
    const int a = find(e.inside);
    const int b = find(e.outside);
    if (a == b) {
      throw ValidationError("cycle detected in the subdomain adjacency graph");
    }
    root[a] = b;
    tree.parent[e.inside] = e.outside;
  }
  if (static_cast<int>(tree.edges.size()) != tree.node_count - 1) {
    throw ValidationError("subdomain adjacency graph is not connected");
  }
  return tree;
}

namespace presets {

PartitionConfig circle_in_square(const std::array<double, 3>& kappas) {
  PartitionConfig cfg;
  cfg.id = "fig1-circle-in-square";
  cfg.kappas = {kappas[0], kappas[1], kappas[2]};
  Polygon square{{Vec2(-1, -1), Vec2(1, -1), Vec2(1, 1), Vec2(-1, 1)}};
  cfg.curves.push_back(CurveSpec{ClosedCurve{square}, {0, 1}});
  cfg.curves.push_back(CurveSpec{ClosedCurve{Circle{Vec2(0, 0), 0.5}}, {1, 2}});
  return cfg;
}

PartitionConfig two_domain_circle(double kappa0, double kappa1, double radius) {
  PartitionConfig cfg;
  cfg.id = "two-domain-circle";
  cfg.kappas = {kappa0, kappa1};
  cfg.curves.push_back(CurveSpec{ClosedCurve{Circle{Vec2(0, 0), radius}}, {0, 1}});
  return cfg;
}

PartitionConfig gap(double delta, const std::array<double, 3>& kappas) {
  if (!(delta > 0.0)) {
    throw ValidationError("gap width must be positive: delta = 0 closes the gap into a junction point, "
                          "which the no-junction hypothesis excludes");
  }
  PartitionConfig cfg;
  std::ostringstream id;
  id << "gap(" << delta << ")";
  cfg.id = id.str();
  cfg.kappas = {kappas[0], kappas[1], kappas[2]};
  const double e = 0.5 * delta;
  Polygon left{{Vec2(-1, -0.5), Vec2(-e, -0.5), Vec2(-e, 0.5), Vec2(-1, 0.5)}};
  Polygon right{{Vec2(e, -0.5), Vec2(1, -0.5), Vec2(1, 0.5), Vec2(e, 0.5)}};
  cfg.curves.push_back(CurveSpec{ClosedCurve{left}, {0, 1}});
  cfg.curves.push_back(CurveSpec{ClosedCurve{right}, {0, 2}});
  return cfg;
}

}  // namespace presets

}  // namespace mtf::geometry
