#include <cmath>
#include <set>

#include <doctest.h>

#include "mtf/geometry.hpp"

using namespace mtf;
using namespace mtf::geometry;
using nlohmann::json;

namespace {

SubdomainPartition fig1() { return build_partition(presets::circle_in_square({1, 1, 1})); }

PartitionConfig polygon_pair(std::vector<Vec2> outer, std::vector<Vec2> inner) {
  PartitionConfig c;
  c.kappas = {1, 1, 1};
  c.curves.push_back({ClosedCurve{Polygon{std::move(outer)}}, {0, 1}});
  c.curves.push_back({ClosedCurve{Polygon{std::move(inner)}}, {1, 2}});
  return c;
}

}  // namespace

TEST_CASE("circle in square partition") {
  const auto p = fig1();
  REQUIRE(p.subdomain_count() == 3);
  REQUIRE(p.interfaces.size() == 2);
  // square separates 0|1, circle separates 1|2
  CHECK(p.interfaces[0].outside == 0);
  CHECK(p.interfaces[0].inside == 1);
  CHECK(p.interfaces[1].outside == 1);
  CHECK(p.interfaces[1].inside == 2);
  CHECK(p.curves[0].length() == doctest::Approx(8.0));
  CHECK(p.curves[1].length() == doctest::Approx(kPi));
  const auto tree = build_adjacency_tree(p);
  CHECK(tree.parent == std::vector<int>{-1, 0, 1});
  CHECK(tree.longest_chain() == 2);
}

TEST_CASE("single circle gives one interface") {
  const auto p = build_partition(presets::two_domain_circle(1, 2));
  CHECK(p.subdomain_count() == 2);
  const auto tree = build_adjacency_tree(p);
  REQUIRE(tree.edges.size() == 1);
  CHECK(tree.longest_chain() == 1);
}

TEST_CASE("gap geometry is a star around the exterior") {
  const auto p = build_partition(presets::gap(0.1, {1, 1, 1}));
  const auto tree = build_adjacency_tree(p);
  CHECK(tree.parent == std::vector<int>{-1, 0, 0});
  CHECK(tree.longest_chain() == 2);
  CHECK_THROWS_AS(presets::gap(0.0, {1, 1, 1}), ValidationError);
  CHECK_THROWS_AS(presets::gap(-0.1, {1, 1, 1}), ValidationError);
}

TEST_CASE("touching curves are rejected as junctions") {
  // inner square shares the corner (1, 1) with the outer one
  const auto cfg = polygon_pair({{-1, -1}, {1, -1}, {1, 1}, {-1, 1}}, {{0, 0}, {1, 0.5}, {1, 1}, {0.5, 1}});
  try {
    build_partition(cfg);
    FAIL("expected a junction error");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("junction detected") != std::string::npos);
  }
  const auto crossing = polygon_pair({{-1, -1}, {1, -1}, {1, 1}, {-1, 1}}, {{0, 0}, {2, 0}, {2, 0.5}, {0, 0.5}});
  CHECK_THROWS_AS(build_partition(crossing), ValidationError);
}

TEST_CASE("invalid partitions") {
  auto cfg = presets::circle_in_square({1, 0, 1});
  CHECK_THROWS_AS(build_partition(cfg), ValidationError);
  auto bowtie = polygon_pair({{-1, -1}, {1, 1}, {1, -1}, {-1, 1}}, {{-0.1, -0.1}, {0.1, -0.1}, {0.1, 0.1}});
  CHECK_THROWS_AS(build_partition(bowtie), ValidationError);
  auto wrong_sides = presets::circle_in_square({1, 1, 1});
  wrong_sides.curves[1].between = {0, 2};
  CHECK_THROWS_AS(build_partition(wrong_sides), ValidationError);
}

TEST_CASE("clockwise polygons are reoriented") {
  auto cfg = polygon_pair({{-1, -1}, {-1, 1}, {1, 1}, {1, -1}}, {{-0.2, -0.2}, {0.2, -0.2}, {0.2, 0.2}, {-0.2, 0.2}});
  const auto p = build_partition(cfg);
  CHECK(p.curves[0].enclosed_area() == doctest::Approx(4.0));
}

TEST_CASE("partition config from json") {
  const json doc = json::parse(R"({
    "id": "nested",
    "subdomains": [{"kappa": 1}, {"kappa": 2}, {"kappa": 3}],
    "curves": [
      {"kind": "polygon", "vertices": [[-1,-1],[1,-1],[1,1],[-1,1]], "between": [0, 1]},
      {"kind": "circle", "center": [0, 0], "radius": 0.4, "between": [1, 2]}
    ]
  })");
  const auto cfg = parse_partition_config(doc);
  CHECK(cfg.id == "nested");
  const auto p = build_partition(cfg);
  CHECK(p.kappas == std::vector<double>{1, 2, 3});
  CHECK(p.interfaces[1].inside == 2);
}

TEST_CASE("skeleton panel counts") {
  const auto p = fig1();
  const auto mesh = mesh_skeleton(p, 0.05);
  CHECK(mesh.curve_panels[0].size() == 160);
  CHECK(mesh.curve_panels[1].size() == 63);
  for (const auto& panel : mesh.panels) {
    const double len = (mesh.nodes[panel.b] - mesh.nodes[panel.a]).norm();
    CHECK(len >= 0.5 * 0.05);
    CHECK(len <= 1.5 * 0.05);
  }
  // square corners are nodes
  for (const Vec2& v : {Vec2(-1, -1), Vec2(1, -1), Vec2(1, 1), Vec2(-1, 1)}) {
    bool found = false;
    for (int n : mesh.curve_nodes[0]) {
      found = found || (mesh.nodes[n] - v).norm() < 1e-15;
    }
    CHECK(found);
  }
  // circle nodes lie on the circle
  for (int n : mesh.curve_nodes[1]) {
    CHECK(mesh.nodes[n].norm() == doctest::Approx(0.5).epsilon(1e-15));
  }
  CHECK_THROWS_AS(mesh_skeleton(build_partition(presets::two_domain_circle(1, 1)), 10.0), ValidationError);
}

TEST_CASE("each curve is one closed loop") {
  const auto mesh = mesh_skeleton(fig1(), 0.1);
  for (std::size_t c = 0; c < mesh.curve_panels.size(); ++c) {
    const auto& ids = mesh.curve_panels[c];
    for (std::size_t i = 0; i < ids.size(); ++i) {
      const auto& cur = mesh.panels[ids[i]];
      const auto& next = mesh.panels[ids[(i + 1) % ids.size()]];
      CHECK(cur.b == next.a);
      CHECK(cur.curve == static_cast<int>(c));
    }
  }
}

TEST_CASE("induced boundary meshes and orientation signs") {
  const auto p = fig1();
  const auto mesh = mesh_skeleton(p, 0.05);
  const auto bm = induce_boundary_meshes(p, mesh);
  REQUIRE(bm.size() == 3);
  CHECK(bm[0].panels.size() == 160);
  CHECK(bm[1].panels.size() == 223);
  CHECK(bm[2].panels.size() == 63);
  CHECK(bm[2].curves == std::vector<int>{1});
  for (const auto& op : bm[1].panels) {
    CHECK(op.sign == (mesh.panels[op.panel].curve == 0 ? 1 : -1));
  }
  // the outward normal of every subdomain points away from a point inside it
  for (const auto& b : bm) {
    for (const auto& op : b.panels) {
      const auto& sp = mesh.panels[op.panel];
      const Vec2 mid = 0.5 * (mesh.nodes[sp.a] + mesh.nodes[sp.b]);
      const Vec2 n = op.sign * mesh.panel_normal(op.panel);
      const Vec2 probe = mid + 1e-3 * n;
      const bool in_circle = probe.norm() < 0.5;
      const bool in_square = std::fabs(probe.x()) < 1 && std::fabs(probe.y()) < 1;
      const int region = in_circle ? 2 : (in_square ? 1 : 0);
      CHECK(region != b.subdomain);
    }
  }
}

TEST_CASE("two-domain circle uses every panel twice with opposite signs") {
  const auto p = build_partition(presets::two_domain_circle(1, 1));
  const auto mesh = mesh_skeleton(p, 0.1);
  const auto bm = induce_boundary_meshes(p, mesh);
  REQUIRE(bm[0].panels.size() == bm[1].panels.size());
  for (std::size_t i = 0; i < bm[0].panels.size(); ++i) {
    CHECK(bm[0].panels[i].panel == bm[1].panels[i].panel);
    CHECK(bm[0].panels[i].sign == -bm[1].panels[i].sign);
  }
}
