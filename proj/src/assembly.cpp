#include "mtf/assembly.hpp"

#include <algorithm>
#include <array>
#include <thread>

#include "mtf/specfun.hpp"

namespace mtf::assembly {
namespace {

using geometry::SkeletonMesh;
using quadrature::PairPoint;
using quadrature::Panel;
using quadrature::SplitValue;

// Element matrices of V, K, K', W on one panel pair, 2 x 2 each.
struct Bundle {
  std::array<Complex, 16> v{};

  Bundle& operator+=(const Bundle& o) {
    for (int i = 0; i < 16; ++i) {
      v[i] += o.v[i];
    }
    return *this;
  }
  Bundle operator*(double w) const {
    Bundle out = *this;
    for (auto& c : out.v) {
      c *= w;
    }
    return out;
  }
};

enum Op { kV = 0, kK = 1, kKp = 2, kW = 3 };

inline Complex& at(Bundle& b, int op, int a, int c) { return b.v[op * 4 + a * 2 + c]; }

class ElementIntegrand {
 public:
  using Value = Bundle;

  ElementIntegrand(const Panel& x, const Panel& y, double kappa, bool coincident)
      : kappa_(kappa), coincident_(coincident) {
    lx_ = x.length();
    ly_ = y.length();
    const Vec2 tx = (x.b - x.a) / lx_;
    const Vec2 ty = (y.b - y.a) / ly_;
    nx_ = Vec2(tx.y(), -tx.x());
    ny_ = Vec2(ty.y(), -ty.x());
    ndot_ = nx_.dot(ny_);
  }

  Bundle full(const PairPoint& p) const {
    const auto kv = specfun::green_kernel_2d(kappa_, p.x, p.y);
    return fill(p, kv.g, kv.grad);
  }

  SplitValue<Bundle> split(const PairPoint& p) const {
    if (p.r == 0.0) {
      // only reached on the diagonal of a coincident pair, where K and K' vanish
      const auto ls = specfun::log_split(kappa_, 0.0);
      const std::array<Complex, 2> zero{};
      return {fill(p, Complex(ls.log_coeff), zero), fill(p, ls.smooth, zero)};
    }
    const auto bj = specfun::bessel_j0j1y0y1(kappa_ * p.r);
    const Vec2 d = p.x - p.y;
    const Complex g(-0.25 * bj.y0, 0.25 * bj.j0);
    const Complex radial(0.25 * kappa_ * bj.y1 / p.r, -0.25 * kappa_ * bj.j1 / p.r);
    // ln r coefficients of G and of its gradient
    const double c = -bj.j0 / (2.0 * kPi);
    const double cg = kappa_ * bj.j1 / (2.0 * kPi * p.r);
    const double lr = std::log(p.r);
    const Complex g_smooth = g - c * lr;
    const std::array<Complex, 2> grad_log{Complex(cg * d.x()), Complex(cg * d.y())};
    const std::array<Complex, 2> grad_smooth{radial * d.x() - grad_log[0] * lr, radial * d.y() - grad_log[1] * lr};
    return {fill(p, Complex(c), grad_log), fill(p, g_smooth, grad_smooth)};
  }

 private:
  Bundle fill(const PairPoint& p, Complex g, const std::array<Complex, 2>& grad) const {
    const double m = lx_ * ly_;
    const double px[2] = {1.0 - p.s, p.s};
    const double py[2] = {1.0 - p.t, p.t};
    const double dx[2] = {-1.0 / lx_, 1.0 / lx_};
    const double dy[2] = {-1.0 / ly_, 1.0 / ly_};
    Complex kd(0.0);
    Complex ka(0.0);
    if (!coincident_) {
      kd = -(ny_.x() * grad[0] + ny_.y() * grad[1]);
      ka = nx_.x() * grad[0] + nx_.y() * grad[1];
    }
    Bundle b;
    for (int a = 0; a < 2; ++a) {
      for (int c = 0; c < 2; ++c) {
        const double f = px[a] * py[c] * m;
        at(b, kV, a, c) = g * f;
        at(b, kK, a, c) = kd * f;
        at(b, kKp, a, c) = ka * f;
        at(b, kW, a, c) = g * (dx[a] * dy[c] * m - kappa_ * kappa_ * ndot_ * f);
      }
    }
    return b;
  }

  double kappa_;
  bool coincident_;
  double lx_;
  double ly_;
  Vec2 nx_;
  Vec2 ny_;
  double ndot_;
};

Panel skeleton_panel(const SkeletonMesh& mesh, int p) {
  return Panel{mesh.nodes[mesh.panels[p].a], mesh.nodes[mesh.panels[p].b]};
}

void assemble_range(const SkeletonMesh& skeleton, int test_curve, int trial_curve, double kappa,
                    const quadrature::PairRules& rules, std::size_t begin, std::size_t end, CurvePairBlock& out) {
  const auto& test_panels = skeleton.curve_panels[test_curve];
  const auto& trial_panels = skeleton.curve_panels[trial_curve];
  const int test_base = skeleton.curve_nodes[test_curve].front();
  const int trial_base = skeleton.curve_nodes[trial_curve].front();
  for (std::size_t ip = begin; ip < end; ++ip) {
    const int px = test_panels[ip];
    const Panel x = skeleton_panel(skeleton, px);
    const int xa[2] = {skeleton.panels[px].a - test_base, skeleton.panels[px].b - test_base};
    for (const int py : trial_panels) {
      const Panel y = skeleton_panel(skeleton, py);
      const auto cls = quadrature::classify(x, y, rules.near_factor);
      const ElementIntegrand f(x, y, kappa, cls == quadrature::PanelPairClass::coincident);
      const Bundle b = quadrature::integrate_panel_pair(f, x, y, cls, rules);
      const int ya[2] = {skeleton.panels[py].a - trial_base, skeleton.panels[py].b - trial_base};
      for (int a = 0; a < 2; ++a) {
        for (int c = 0; c < 2; ++c) {
          out.single_layer(xa[a], ya[c]) += b.v[kV * 4 + a * 2 + c];
          out.double_layer(xa[a], ya[c]) += b.v[kK * 4 + a * 2 + c];
          out.adjoint(xa[a], ya[c]) += b.v[kKp * 4 + a * 2 + c];
          out.hypersingular(xa[a], ya[c]) += b.v[kW * 4 + a * 2 + c];
        }
      }
    }
  }
}

CurvePairBlock zero_block(Eigen::Index rows, Eigen::Index cols) {
  return CurvePairBlock{CMatrix::Zero(rows, cols), CMatrix::Zero(rows, cols), CMatrix::Zero(rows, cols),
                        CMatrix::Zero(rows, cols)};
}

const quadrature::QuadRule& potential_rule() {
  static const quadrature::QuadRule rule = quadrature::gauss_legendre(16);
  return rule;
}

Complex potential_segment(const Panel& panel, double kappa, const Vec2& normal, Complex va, Complex vb, Complex qa,
                          Complex qb, const Vec2& x, double t0, double t1, int depth) {
  const Panel sub{panel.point(t0), panel.point(t1)};
  const double len = sub.length();
  const double dist = quadrature::segment_distance(sub, Panel{x, x});
  if (dist < len && depth < 30) {
    const double tm = 0.5 * (t0 + t1);
    return potential_segment(panel, kappa, normal, va, vb, qa, qb, x, t0, tm, depth + 1) +
           potential_segment(panel, kappa, normal, va, vb, qa, qb, x, tm, t1, depth + 1);
  }
  const auto& rule = potential_rule();
  Complex acc(0.0);
  for (std::size_t i = 0; i < rule.size(); ++i) {
    const double t = t0 + (t1 - t0) * rule.nodes[i];
    const Vec2 y = panel.point(t);
    const auto kv = specfun::green_kernel_2d(kappa, x, y);
    const Complex v = va * (1.0 - t) + vb * t;
    const Complex q = qa * (1.0 - t) + qb * t;
    acc += rule.weights[i] * (q * kv.g + v * (normal.x() * kv.grad[0] + normal.y() * kv.grad[1]));
  }
  return acc * (t1 - t0) * panel.length();
}

}  // namespace

MultiTraceDofMap build_dofmap(const geometry::SubdomainPartition& partition, const geometry::SkeletonMesh& skeleton,
                              const std::vector<geometry::BoundaryMesh>& meshes) {
  MultiTraceDofMap map;
  int offset = 0;
  for (const auto& bm : meshes) {
    SubdomainDofs block;
    block.subdomain = bm.subdomain;
    block.curves = bm.curves;
    block.curve_signs = bm.curve_signs;
    block.offset = offset;
    for (int c : bm.curves) {
      block.curve_offset.push_back(static_cast<int>(block.nodes.size()));
      for (int node : skeleton.curve_nodes[c]) {
        block.nodes.push_back(node);
        block.node_curve.push_back(c);
      }
    }
    offset += 2 * block.size();
    map.blocks.push_back(std::move(block));
  }
  map.dimension = offset;
  map.partner.assign(offset, -1);
  map.owner.assign(offset, -1);
  map.curve.assign(offset, -1);
  map.is_neumann.assign(offset, false);

  for (const auto& block : map.blocks) {
    const int j = block.subdomain;
    for (std::size_t ci = 0; ci < block.curves.size(); ++ci) {
      const int c = block.curves[ci];
      const auto& itf = partition.interfaces[c];
      const int k = itf.inside == j ? itf.outside : itf.inside;
      const auto& other = map.blocks[k];
      const auto pos = std::find(other.curves.begin(), other.curves.end(), c) - other.curves.begin();
      if (pos == static_cast<long>(other.curves.size())) {
        throw ValidationError("interface correspondence incomplete for curve " + std::to_string(c));
      }
      const int n = static_cast<int>(skeleton.curve_nodes[c].size());
      for (int i = 0; i < n; ++i) {
        const int mine = block.curve_offset[ci] + i;
        const int theirs = other.curve_offset[pos] + i;
        map.partner[block.dirichlet(mine)] = other.dirichlet(theirs);
        map.partner[block.neumann(mine)] = other.neumann(theirs);
      }
    }
    for (int i = 0; i < block.size(); ++i) {
      for (int g : {block.dirichlet(i), block.neumann(i)}) {
        map.owner[g] = j;
        map.curve[g] = block.node_curve[i];
      }
      map.is_neumann[block.neumann(i)] = true;
    }
  }
  for (int g = 0; g < offset; ++g) {
    if (map.partner[g] < 0 || map.partner[map.partner[g]] != g) {
      throw ValidationError("interface correspondence is not an involution");
    }
  }
  return map;
}

Eigen::MatrixXd boundary_mass(const SubdomainDofs& block, const geometry::SkeletonMesh& skeleton) {
  Eigen::MatrixXd mass = Eigen::MatrixXd::Zero(block.size(), block.size());
  for (std::size_t ci = 0; ci < block.curves.size(); ++ci) {
    const int c = block.curves[ci];
    const int base = skeleton.curve_nodes[c].front();
    for (int p : skeleton.curve_panels[c]) {
      const int a = block.curve_offset[ci] + skeleton.panels[p].a - base;
      const int b = block.curve_offset[ci] + skeleton.panels[p].b - base;
      const double l6 = (skeleton.nodes[skeleton.panels[p].b] - skeleton.nodes[skeleton.panels[p].a]).norm() / 6.0;
      mass(a, a) += 2.0 * l6;
      mass(b, b) += 2.0 * l6;
      mass(a, b) += l6;
      mass(b, a) += l6;
    }
  }
  return mass;
}

CMatrix assemble_duality(const MultiTraceDofMap& dofmap, const geometry::SkeletonMesh& skeleton) {
  CMatrix m = CMatrix::Zero(dofmap.dimension, dofmap.dimension);
  for (const auto& block : dofmap.blocks) {
    const Eigen::MatrixXd mass = boundary_mass(block, skeleton);
    const int n = block.size();
    m.block(block.dirichlet(0), block.neumann(0), n, n) = mass.cast<Complex>();
    m.block(block.neumann(0), block.dirichlet(0), n, n) = -mass.transpose().cast<Complex>();
  }
  return m;
}

CurvePairBlock assemble_curve_pair(const geometry::SkeletonMesh& skeleton, int test_curve, int trial_curve,
                                   double kappa, const quadrature::PairRules& rules, int threads) {
  const auto rows = static_cast<Eigen::Index>(skeleton.curve_nodes[test_curve].size());
  const auto cols = static_cast<Eigen::Index>(skeleton.curve_nodes[trial_curve].size());
  const std::size_t npanels = skeleton.curve_panels[test_curve].size();
  threads = std::max(1, std::min<int>(threads, static_cast<int>(npanels)));
  if (threads == 1) {
    CurvePairBlock out = zero_block(rows, cols);
    assemble_range(skeleton, test_curve, trial_curve, kappa, rules, 0, npanels, out);
    return out;
  }
  // block-partitioned accumulation over test panels, merged afterwards
  std::vector<CurvePairBlock> parts(threads, zero_block(rows, cols));
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) {
    const std::size_t begin = npanels * t / threads;
    const std::size_t end = npanels * (t + 1) / threads;
    pool.emplace_back([&, t, begin, end] {
      assemble_range(skeleton, test_curve, trial_curve, kappa, rules, begin, end, parts[t]);
    });
  }
  for (auto& th : pool) {
    th.join();
  }
  CurvePairBlock out = std::move(parts[0]);
  for (int t = 1; t < threads; ++t) {
    out.single_layer += parts[t].single_layer;
    out.double_layer += parts[t].double_layer;
    out.adjoint += parts[t].adjoint;
    out.hypersingular += parts[t].hypersingular;
  }
  return out;
}

const CurvePairBlock& BlockCache::get(const geometry::SkeletonMesh& skeleton, int test_curve, int trial_curve,
                                      double kappa, const quadrature::PairRules& rules, int threads) {
  auto key = std::make_tuple(test_curve, trial_curve, kappa);
  auto it = blocks_.find(key);
  if (it == blocks_.end()) {
    auto block = std::make_unique<CurvePairBlock>(
        assemble_curve_pair(skeleton, test_curve, trial_curve, kappa, rules, threads));
    it = blocks_.emplace(key, std::move(block)).first;
  }
  return *it->second;
}

CMatrix assemble_calderon(const MultiTraceDofMap& dofmap, const geometry::SkeletonMesh& skeleton,
                          const std::vector<double>& kappas, const quadrature::PairRules& rules, BlockCache* cache,
                          int threads) {
  BlockCache local;
  BlockCache& store = cache ? *cache : local;
  CMatrix b = CMatrix::Zero(dofmap.dimension, dofmap.dimension);
  for (const auto& block : dofmap.blocks) {
    const double kappa = kappas.at(block.subdomain);
    for (std::size_t ci = 0; ci < block.curves.size(); ++ci) {
      for (std::size_t cj = 0; cj < block.curves.size(); ++cj) {
        const auto& blk = store.get(skeleton, block.curves[ci], block.curves[cj], kappa, rules, threads);
        const double si = block.curve_signs[ci];
        const double sj = block.curve_signs[cj];
        const int oi = block.curve_offset[ci];
        const int oj = block.curve_offset[cj];
        const auto r = blk.single_layer.rows();
        const auto c = blk.single_layer.cols();
        b.block(block.dirichlet(oi), block.dirichlet(oj), r, c) = (2.0 * si * sj) * blk.hypersingular;
        b.block(block.dirichlet(oi), block.neumann(oj), r, c) = (2.0 * si) * blk.adjoint;
        b.block(block.neumann(oi), block.dirichlet(oj), r, c) = (2.0 * sj) * blk.double_layer;
        b.block(block.neumann(oi), block.neumann(oj), r, c) = -2.0 * blk.single_layer;
      }
    }
  }
  return b;
}

CMatrix apply_M_inverse(const MultiTraceDofMap& dofmap, const geometry::SkeletonMesh& skeleton, const CMatrix& x) {
  CMatrix out(x.rows(), x.cols());
  for (const auto& block : dofmap.blocks) {
    const Eigen::LLT<Eigen::MatrixXd> llt(boundary_mass(block, skeleton));
    if (llt.info() != Eigen::Success) {
      throw NumericalError("boundary mass matrix is not positive definite");
    }
    const int n = block.size();
    const CMatrix xd = x.middleRows(block.dirichlet(0), n);
    const CMatrix xn = x.middleRows(block.neumann(0), n);
    CMatrix sd(n, x.cols());
    CMatrix sn(n, x.cols());
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
      const Eigen::VectorXd rd = llt.solve(xd.col(c).real());
      const Eigen::VectorXd id = llt.solve(xd.col(c).imag());
      const Eigen::VectorXd rn = llt.solve(xn.col(c).real());
      const Eigen::VectorXd in = llt.solve(xn.col(c).imag());
      sd.col(c) = rd.cast<Complex>() + Complex(0.0, 1.0) * id.cast<Complex>();
      sn.col(c) = rn.cast<Complex>() + Complex(0.0, 1.0) * in.cast<Complex>();
    }
    out.middleRows(block.dirichlet(0), n) = -sn;
    out.middleRows(block.neumann(0), n) = sd;
  }
  return out;
}

Complex eval_potential(const SubdomainDofs& block, const geometry::SkeletonMesh& skeleton, double kappa,
                       const CVector& dirichlet, const CVector& neumann, const Vec2& x) {
  Complex acc(0.0);
  for (std::size_t ci = 0; ci < block.curves.size(); ++ci) {
    const int c = block.curves[ci];
    const int base = skeleton.curve_nodes[c].front();
    for (int p : skeleton.curve_panels[c]) {
      const Panel panel = skeleton_panel(skeleton, p);
      if (quadrature::segment_distance(panel, Panel{x, x}) <= panel.length() / 10.0) {
        throw ValidationError("field point lies too close to the boundary of subdomain " +
                              std::to_string(block.subdomain));
      }
      const Vec2 normal = block.curve_signs[ci] * skeleton.panel_normal(p);
      const int a = block.curve_offset[ci] + skeleton.panels[p].a - base;
      const int b = block.curve_offset[ci] + skeleton.panels[p].b - base;
      acc += potential_segment(panel, kappa, normal, dirichlet[a], dirichlet[b], neumann[a], neumann[b], x, 0.0, 1.0,
                               0);
    }
  }
  return acc;
}

std::pair<CVector, CVector> subdomain_traces(const MultiTraceDofMap& dofmap, int j, const CVector& coeffs) {
  const auto& block = dofmap.blocks.at(j);
  return {coeffs.segment(block.dirichlet(0), block.size()), coeffs.segment(block.neumann(0), block.size())};
}

}  // namespace mtf::assembly
