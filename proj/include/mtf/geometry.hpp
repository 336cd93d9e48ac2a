#pragma once

#include <array>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "mtf/types.hpp"

namespace mtf::geometry {

struct Circle {
  Vec2 center;
  double radius;
};

struct Polygon {
  std::vector<Vec2> vertices;
};

/// Closed curve. Stored counterclockwise after validation, so that the
/// normal (t_y, -t_x) points out of the enclosed region.
struct ClosedCurve {
  std::variant<Circle, Polygon> shape;
  bool counterclockwise = true;

  bool is_circle() const { return std::holds_alternative<Circle>(shape); }
  double length() const;
  double enclosed_area() const;
  bool contains(const Vec2& p) const;
  Vec2 sample_point() const;
};

struct CurveSpec {
  ClosedCurve curve;
  std::array<int, 2> between;  // the two subdomains the curve separates
};

struct PartitionConfig {
  std::string id = "custom";
  std::vector<double> kappas;  // one per subdomain, index 0 is the exterior
  std::vector<CurveSpec> curves;
  std::optional<double> h;
};

/// Parses {"subdomains":[{"kappa":..}], "curves":[{"kind":..,"between":[j,k]}], "h":..}.
PartitionConfig parse_partition_config(const nlohmann::json& doc);

struct Interface {
  int inside;   // subdomain enclosed by the curve
  int outside;  // subdomain on the unbounded side
  int curve;
};

struct SubdomainPartition {
  std::string id;
  std::vector<double> kappas;
  std::vector<ClosedCurve> curves;  // counterclockwise
  std::vector<Interface> interfaces;  // interfaces[c].curve == c
  std::vector<std::vector<int>> bounding_curves;  // per subdomain

  int subdomain_count() const { return static_cast<int>(kappas.size()); }
};

/// Validates and orients the curves, resolves nesting and interface sides.
/// Throws ValidationError on junctions, non-simple polygons, kappa <= 0 or
/// a containment structure that contradicts the declared interfaces.
SubdomainPartition build_partition(const PartitionConfig& config);

struct SkeletonPanel {
  int a;  // node indices, counterclockwise along the curve
  int b;
  int curve;
};

struct SkeletonMesh {
  double h = 0.0;
  std::vector<Vec2> nodes;
  std::vector<Vec2> nodal_normals;  // outward from the enclosed region
  std::vector<SkeletonPanel> panels;
  std::vector<std::vector<int>> curve_nodes;   // closed node loop per curve
  std::vector<std::vector<int>> curve_panels;  // panel indices per curve, in loop order
  std::vector<std::array<int, 2>> panel_tags;  // (inside, outside) per panel

  Vec2 panel_normal(int panel) const;
};

/// Uniform flat paneling: ceil(length / h) panels per curve, polygon
/// vertices kept as nodes, circle nodes exactly on the circle.
SkeletonMesh mesh_skeleton(const SubdomainPartition& partition, double h);

struct OrientedPanel {
  int panel;
  int sign;  // +1 when the skeleton normal is the outward normal of the subdomain
};

struct BoundaryMesh {
  int subdomain;
  std::vector<int> curves;
  std::vector<int> curve_signs;
  std::vector<OrientedPanel> panels;
};

std::vector<BoundaryMesh> induce_boundary_meshes(const SubdomainPartition& partition,
                                                 const SkeletonMesh& skeleton);

struct AdjacencyTree {
  int node_count = 0;
  std::vector<Interface> edges;
  std::vector<int> parent;  // parent[0] == -1

  /// Number of edges on the longest simple path.
  int longest_chain() const;
};

AdjacencyTree build_adjacency_tree(const SubdomainPartition& partition);

namespace presets {

/// Square of half-width 1 around a circle of radius 0.5, both centered at 0.
PartitionConfig circle_in_square(const std::array<double, 3>& kappas);

/// Single circle of the given radius centered at 0.
PartitionConfig two_domain_circle(double kappa0, double kappa1, double radius = 1.0);

/// Rectangles [-1, -delta/2] x [-0.5, 0.5] and [delta/2, 1] x [-0.5, 0.5].
PartitionConfig gap(double delta, const std::array<double, 3>& kappas);

}  // namespace presets

}  // namespace mtf::geometry
