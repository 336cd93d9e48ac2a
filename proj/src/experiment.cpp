#include "mtf/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <future>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include <Eigen/SVD>

#include "mtf/io.hpp"
#include "mtf/quadrature.hpp"

namespace mtf::experiment {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

std::string fmt(Complex z) {
  if (z.imag() == 0.0) {
    return fmt(z.real());
  }
  return fmt(z.real()) + (z.imag() < 0 ? "" : "+") + fmt(z.imag()) + "i";
}

Complex parse_complex(const json& j) {
  if (j.is_number()) {
    return Complex(j.get<double>(), 0.0);
  }
  if (j.is_array() && j.size() == 2) {
    return Complex(j[0].get<double>(), j[1].get<double>());
  }
  throw ValidationError("alpha values must be numbers or [re, im] pairs");
}

json complex_json(Complex z) { return json::array({z.real(), z.imag()}); }

template <class T>
std::vector<T> scalar_or_list(const json& j) {
  if (j.is_array()) {
    return j.get<std::vector<T>>();
  }
  return {j.get<T>()};
}

Task parse_task(const std::string& s) {
  if (s == "spectrum") return Task::spectrum;
  if (s == "identities") return Task::identities;
  if (s == "solve") return Task::solve;
  if (s == "convergence") return Task::convergence;
  throw ValidationError("unknown task '" + s + "'");
}

std::size_t expected_kappas(const GeometrySpec& g) {
  if (g.id == "fig1-circle-in-square" || g.id == "gap") return 3;
  if (g.id == "two-domain-circle") return 2;
  return g.partition.at("subdomains").size();
}

bool all_equal(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); });
}

// Runs fn(0..n-1) on up to `workers` threads; rethrows the first failure.
template <class F>
void parallel_for(std::size_t n, int workers, F fn) {
  workers = std::max(1, std::min<int>(workers, static_cast<int>(n)));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) {
      fn(i);
    }
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) {
            failure = std::current_exception();
          }
        }
      }
    });
  }
  for (auto& t : pool) {
    t.join();
  }
  if (failure) {
    std::rethrow_exception(failure);
  }
}

// Problems shared between tasks and worker threads, built once per (variant, h).
class ProblemCache {
 public:
  std::shared_ptr<const Problem> get(const Variant& v, double h) {
    std::shared_future<std::shared_ptr<const Problem>> fut;
    std::promise<std::shared_ptr<const Problem>> promise;
    bool owner = false;
    {
      std::lock_guard lock(mutex_);
      auto key = std::make_pair(v.tag, h);
      auto it = entries_.find(key);
      if (it == entries_.end()) {
        fut = promise.get_future().share();
        entries_.emplace(key, fut);
        owner = true;
      } else {
        fut = it->second;
      }
    }
    if (owner) {
      try {
        promise.set_value(std::make_shared<const Problem>(build_problem(v.partition, h)));
      } catch (...) {
        promise.set_exception(std::current_exception());
      }
    }
    return fut.get();
  }

 private:
  std::mutex mutex_;
  std::map<std::pair<std::string, double>, std::shared_future<std::shared_ptr<const Problem>>> entries_;
};

std::string grid_name(const std::string& prefix, const std::string& tag, double h, Complex alpha,
                      const std::string& ext) {
  return prefix + "_" + tag + "_h" + fmt(h) + "_a" + fmt(alpha) + ext;
}

double ratio_last(const std::vector<double>& r) {
  if (r.size() < 2 || r[r.size() - 2] == 0.0) {
    return NAN;
  }
  return r.back() / r[r.size() - 2];
}

// Convergence record: pass when the finest residual is below `bound` and every
// refinement ratio is below 0.7, or when the residual is exact at every h.
json convergence_record(const std::string& name, const std::vector<double>& hs, const std::vector<double>& r,
                        double bound, const std::string& status_override = "") {
  json rec;
  rec["name"] = name;
  json res = json::array();
  for (std::size_t i = 0; i < hs.size(); ++i) {
    res.push_back({{"h", hs[i]}, {"value", r[i]}});
  }
  rec["residuals"] = res;
  const bool exact = std::all_of(r.begin(), r.end(), [](double x) { return x < 1e-10; });
  bool ratios_ok = r.size() >= 2;
  for (std::size_t i = 1; i < r.size(); ++i) {
    ratios_ok = ratios_ok && r[i - 1] > 0.0 && r[i] / r[i - 1] < 0.7;
  }
  if (r.size() >= 2) {
    rec["h_ratio"] = exact ? json(nullptr) : json(ratio_last(r));
  }
  rec["exact"] = exact;
  rec["bound"] = bound;
  if (!status_override.empty()) {
    rec["status"] = status_override;
  } else {
    rec["status"] = (exact || (r.back() < bound && ratios_ok)) ? "pass" : "fail";
  }
  return rec;
}

double rel_fro(const CMatrix& a, double scale) { return scale > 0.0 ? a.norm() / scale : a.norm(); }

}  // namespace

const char* to_string(Task t) {
  switch (t) {
    case Task::spectrum:
      return "spectrum";
    case Task::identities:
      return "identities";
    case Task::solve:
      return "solve";
    case Task::convergence:
      return "convergence";
  }
  return "?";
}

ExperimentConfig parse_config(const json& doc, const fs::path& base_dir) {
  ExperimentConfig cfg;
  cfg.source = doc;
  try {
    cfg.name = doc.value("name", std::string("experiment"));
    json g = doc.at("geometry");
    if (g.is_string()) {
      // shorthand forms: "gap(0.01)" and a path to a custom partition document
      const auto s = g.get<std::string>();
      if (s.rfind("gap(", 0) == 0 && s.back() == ')') {
        try {
          g = json{{"id", "gap"}, {"delta", std::stod(s.substr(4, s.size() - 5))}};
        } catch (const std::logic_error&) {
          throw ValidationError("cannot read gap width from '" + s + "'");
        }
      } else if (fs::path(s).extension() == ".json") {
        g = json{{"id", "custom"}, {"path", s}};
      }
    }
    cfg.geometry.id = g.is_string() ? g.get<std::string>() : g.at("id").get<std::string>();
    if (cfg.geometry.id == "two-domain-circle") {
      if (g.is_object()) {
        cfg.geometry.radius = g.value("radius", 1.0);
      }
    } else if (cfg.geometry.id == "gap") {
      if (!g.is_object() || (!g.contains("delta") && !g.contains("deltas"))) {
        throw ValidationError("gap geometry needs 'delta' or 'deltas'");
      }
      cfg.geometry.deltas = scalar_or_list<double>(g.contains("deltas") ? g.at("deltas") : g.at("delta"));
      for (double d : cfg.geometry.deltas) {
        if (!(d > 0.0)) {
          throw ValidationError("gap width delta = " + fmt(d) +
                                " is not positive: a closed gap creates a junction point, excluded by the "
                                "no-junction hypothesis");
        }
      }
    } else if (cfg.geometry.id == "custom") {
      if (g.contains("partition")) {
        cfg.geometry.partition = g.at("partition");
      } else {
        const fs::path p = base_dir / g.at("path").get<std::string>();
        cfg.geometry.partition = json::parse(io::read_text(p));
      }
    } else if (cfg.geometry.id != "fig1-circle-in-square") {
      throw ValidationError("unknown geometry id '" + cfg.geometry.id + "'");
    }

    if (doc.contains("kappa")) {
      cfg.kappas = scalar_or_list<double>(doc.at("kappa"));
    } else if (cfg.geometry.id == "custom") {
      for (const auto& s : cfg.geometry.partition.at("subdomains")) {
        cfg.kappas.push_back(s.at("kappa").get<double>());
      }
    } else {
      cfg.kappas.assign(expected_kappas(cfg.geometry), 1.0);
    }
    if (cfg.kappas.size() != expected_kappas(cfg.geometry)) {
      throw ValidationError("geometry '" + cfg.geometry.id + "' needs " + std::to_string(expected_kappas(cfg.geometry)) +
                            " wave numbers, got " + std::to_string(cfg.kappas.size()));
    }
    for (double k : cfg.kappas) {
      if (!(k > 0.0)) {
        throw ValidationError("wave numbers must be positive");
      }
    }

    const json& alphas = doc.contains("alpha") ? doc.at("alpha") : json(1.0);
    if (alphas.is_array()) {
      for (const auto& a : alphas) {
        cfg.alphas.push_back(parse_complex(a));
      }
    } else {
      cfg.alphas.push_back(parse_complex(alphas));
    }
    if (cfg.alphas.empty()) {
      throw ValidationError("alpha list is empty");
    }

    cfg.hs = scalar_or_list<double>(doc.contains("h") ? doc.at("h") : json(0.05));
    if (cfg.hs.empty()) {
      throw ValidationError("h list is empty");
    }
    for (double h : cfg.hs) {
      if (!(h > 0.0)) {
        throw ValidationError("mesh width h must be positive");
      }
    }

    for (const auto& t : doc.at("tasks")) {
      cfg.tasks.push_back(parse_task(t.get<std::string>()));
    }
    if (cfg.tasks.empty()) {
      throw ValidationError("task list is empty");
    }
    cfg.output_dir = doc.value("output", cfg.output_dir);
    if (doc.contains("incident")) {
      const auto& d = doc.at("incident").at("direction");
      cfg.incident_direction = Vec2(d.at(0).get<double>(), d.at(1).get<double>());
      if (std::fabs(cfg.incident_direction.norm() - 1.0) > 1e-12) {
        throw ValidationError("incident direction must be a unit vector");
      }
    }
    if (doc.contains("solver")) {
      const auto& s = doc.at("solver");
      const auto method = s.value("method", std::string("direct"));
      if (method != "direct" && method != "gmres") {
        throw ValidationError("solver method must be 'direct' or 'gmres'");
      }
      cfg.solver.kind = method == "gmres" ? transmission::SolverKind::gmres : transmission::SolverKind::direct;
      cfg.solver.tol = s.value("tol", cfg.solver.tol);
      cfg.solver.maxit = s.value("maxit", cfg.solver.maxit);
    }
    if (doc.contains("plot")) {
      cfg.plot_style = doc.at("plot").value("style", cfg.plot_style);
      if (cfg.plot_style != "scatter" && cfg.plot_style != "zoom") {
        throw ValidationError("plot style must be 'scatter' or 'zoom'");
      }
    }
    cfg.seed = doc.value("seed", cfg.seed);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("experiment config: ") + e.what());
  }
  return cfg;
}

ExperimentConfig load_config(const fs::path& path) {
  json doc;
  try {
    doc = json::parse(io::read_text(path));
  } catch (const json::exception& e) {
    throw ValidationError("cannot parse " + path.string() + ": " + e.what());
  }
  return parse_config(doc, path.parent_path());
}

std::vector<std::string> preset_names() {
  return {"fig2", "fig3", "fig3a", "fig3b", "fig4", "fig5", "fig5a", "fig5b", "fig5c", "identities-circle",
          "identities-fig1"};
}

json preset_json(const std::string& name) {
  const json fig1 = {{"id", "fig1-circle-in-square"}};
  auto spectrum = [&](json geometry, json kappa, json alpha) {
    return json{{"name", name},       {"geometry", geometry}, {"kappa", kappa},
                {"alpha", alpha},     {"h", {0.05}},          {"tasks", {"spectrum"}},
                {"output", "out/" + name}};
  };
  if (name == "fig2") return spectrum(fig1, {1, 1, 1}, {1});
  if (name == "fig3") return spectrum(fig1, {1, 1, 1}, {0.5, -0.25});
  if (name == "fig3a") return spectrum(fig1, {1, 1, 1}, {0.5});
  if (name == "fig3b") return spectrum(fig1, {1, 1, 1}, {-0.25});
  if (name == "fig4") return spectrum(fig1, {1, 5, 2}, {1});
  auto gap = [&](json deltas) {
    json j = spectrum({{"id", "gap"}, {"deltas", deltas}}, {1, 1, 1}, {1});
    j["plot"] = {{"style", "zoom"}};
    return j;
  };
  if (name == "fig5") return gap({0.1, 0.01, 0.001});
  if (name == "fig5a") return gap({0.1});
  if (name == "fig5b") return gap({0.01});
  if (name == "fig5c") return gap({0.001});
  if (name == "identities-circle") {
    return json{{"name", name},          {"geometry", {{"id", "two-domain-circle"}, {"radius", 1.0}}},
                {"kappa", {1, 1}},       {"alpha", {1}},
                {"h", {0.2, 0.1, 0.05}}, {"tasks", {"identities"}},
                {"output", "out/" + name}};
  }
  if (name == "identities-fig1") {
    return json{{"name", name},          {"geometry", fig1},         {"kappa", {1, 1, 1}}, {"alpha", {1}},
                {"h", {0.2, 0.1, 0.05}}, {"tasks", {"identities"}}, {"output", "out/" + name}};
  }
  throw ValidationError("unknown preset '" + name + "'");
}

std::vector<Variant> variants(const ExperimentConfig& config) {
  const auto& g = config.geometry;
  std::array<double, 3> k3{};
  if (config.kappas.size() == 3) {
    k3 = {config.kappas[0], config.kappas[1], config.kappas[2]};
  }
  std::vector<Variant> out;
  if (g.id == "fig1-circle-in-square") {
    out.push_back({"fig1", geometry::presets::circle_in_square(k3)});
  } else if (g.id == "two-domain-circle") {
    out.push_back({"circle", geometry::presets::two_domain_circle(config.kappas[0], config.kappas[1], g.radius)});
  } else if (g.id == "gap") {
    for (double d : g.deltas) {
      out.push_back({"gap-" + fmt(d), geometry::presets::gap(d, k3)});
    }
  } else {
    auto pc = geometry::parse_partition_config(g.partition);
    pc.kappas = config.kappas;
    out.push_back({"custom", pc});
  }
  return out;
}

Problem build_problem(const geometry::PartitionConfig& partition, double h, int threads) {
  Problem pb;
  pb.geometry = partition.id;
  pb.h = h;
  pb.partition = geometry::build_partition(partition);
  pb.skeleton = geometry::mesh_skeleton(pb.partition, h);
  pb.meshes = geometry::induce_boundary_meshes(pb.partition, pb.skeleton);
  pb.dofmap = assembly::build_dofmap(pb.partition, pb.skeleton, pb.meshes);
  pb.p = transmission::build_transmission(pb.dofmap);
  pb.m = assembly::assemble_duality(pb.dofmap, pb.skeleton);
  pb.b_a = assembly::assemble_calderon(pb.dofmap, pb.skeleton, pb.partition.kappas, quadrature::default_rules(),
                                       nullptr, threads);
  pb.o_a = assembly::apply_M_inverse(pb.dofmap, pb.skeleton, pb.b_a);
  return pb;
}

json RunManifest::to_json() const {
  json j;
  j["config"] = config;
  j["version"] = version;
  j["seed"] = seed;
  json arts = json::array();
  for (const auto& a : artifacts) {
    arts.push_back({{"task", a.task}, {"path", a.path}, {"sha256", a.sha256}});
  }
  j["artifacts"] = arts;
  json times = json::object();
  for (const auto& [task, sec] : timings) {
    times[task] = sec;
  }
  j["timings_seconds"] = times;
  return j;
}

json run_identity_suite(const ExperimentConfig& config, int parallel) {
  json report;
  report["identities"] = json::array();
  ProblemCache cache;
  std::vector<double> hs = config.hs;
  std::sort(hs.begin(), hs.end(), std::greater<>());
  const bool equal_kappa = all_equal(config.kappas);

  for (const auto& variant : variants(config)) {
    std::vector<std::shared_ptr<const Problem>> problems(hs.size());
    parallel_for(hs.size(), parallel, [&](std::size_t i) { problems[i] = cache.get(variant, hs[i]); });
    const int nsub = problems.front()->partition.subdomain_count();
    const auto tree = geometry::build_adjacency_tree(problems.front()->partition);

    std::vector<double> exact_res(hs.size(), 0.0);
    std::vector<double> calderon(hs.size()), anticomm(hs.size()), anticomm_sq(hs.size()), tsq(hs.size());
    std::vector<int> chain_index(hs.size(), 0);
    json exact_detail = json::array();
    std::mutex detail_mutex;
    std::atomic<bool> has_t{false};

    parallel_for(hs.size(), parallel, [&](std::size_t i) {
      const Problem& pb = *problems[i];
      const auto& m = pb.m;
      const double mnorm = m.norm();
      const CMatrix mp = pb.p.right_multiply(m);
      CMatrix pp = pb.p.apply(pb.p.dense());
      pp.diagonal().array() -= 1.0;
      transmission::PlaneWave w1{Vec2(std::cos(0.3), std::sin(0.3)), 1.3};
      transmission::PlaneWave w2{Vec2(std::cos(2.1), std::sin(2.1)), 0.7};
      const CVector u = transmission::plane_wave_traces(pb.dofmap, pb.skeleton, w1);
      const CVector v = transmission::plane_wave_traces(pb.dofmap, pb.skeleton, w2);
      double op_form = 0.0;
      for (Complex alpha : config.alphas) {
        const auto sys = transmission::assemble_mtf(pb.b_a, m, pb.p, alpha);
        const CMatrix lhs = assembly::apply_M_inverse(pb.dofmap, pb.skeleton, sys.b_h);
        op_form = std::max(op_form, rel_fro(lhs - transmission::operator_form(pb.o_a, pb.p, alpha), pb.o_a.norm()));
      }
      const json detail = {
          {"h", hs[i]},
          {"duality_antisymmetry", rel_fro(m + m.transpose(), mnorm)},
          {"transmission_involution", pp.norm()},
          {"pairing_symmetry", rel_fro(mp - mp.transpose(), mp.norm())},
          {"single_trace_cancellation", std::abs((u.transpose() * m * v).value()) / (u.norm() * mnorm * v.norm())},
          {"single_trace_fixed_point", (pb.p.apply(u) - u).norm() / u.norm()},
          {"operator_form", op_form}};
      double worst = 0.0;
      for (const auto& [k, val] : detail.items()) {
        if (k != "h") {
          worst = std::max(worst, val.get<double>());
        }
      }
      exact_res[i] = worst;

      const auto eig = spectrum::eig_operator(pb.o_a);
      calderon[i] = spectrum::median(spectrum::nearest_distances(eig.values, {1.0, -1.0}));

      const CMatrix ac = pb.p.apply(pb.o_a) + pb.p.right_multiply(pb.o_a);
      anticomm[i] = rel_fro(ac, pb.o_a.norm());
      const double acn = ac.norm();
      anticomm_sq[i] = acn > 1e-10 * pb.o_a.norm() ? (ac * ac).norm() / (acn * acn) : 0.0;

      const auto split = transmission::split_diag(pb.b_a, pb.dofmap);
      const CMatrix ot = assembly::apply_M_inverse(pb.dofmap, pb.skeleton, split.b_t);
      const double otn = ot.norm();
      if (otn > 0.0) {
        has_t = true;
        tsq[i] = (ot * ot).norm() / (otn * otn);
        const CMatrix pt = pb.p.apply(ot);
        const double ptn = pt.norm();
        CMatrix power = pt;
        int k = 1;
        while (k <= nsub + 1 && power.norm() / std::pow(ptn, k) >= 0.05) {
          power = power * pt;
          ++k;
        }
        chain_index[i] = k;
      }
      std::lock_guard lock(detail_mutex);
      exact_detail.push_back(detail);
    });
    std::sort(exact_detail.begin(), exact_detail.end(),
              [](const json& a, const json& b) { return a["h"].get<double>() > b["h"].get<double>(); });

    auto push = [&](json rec) {
      rec["geometry"] = variant.tag;
      report["identities"].push_back(std::move(rec));
    };

    json exact = convergence_record("exact_discrete_identities", hs, exact_res, 1e-13);
    exact["status"] = *std::max_element(exact_res.begin(), exact_res.end()) <= 1e-13 ? "pass" : "fail";
    exact["detail"] = exact_detail;
    push(exact);

    json cal = convergence_record("calderon_clustering", hs, calderon, 0.05);
    bool decreasing = hs.size() >= 2;
    for (std::size_t i = 1; i < calderon.size(); ++i) {
      decreasing = decreasing && calderon[i] < calderon[i - 1];
    }
    cal["decreasing"] = decreasing;
    cal["status"] = calderon.back() < 0.05 && decreasing ? "pass" : "fail";
    cal["metric"] = "median distance of spec(M^-1 B_A) to {+1, -1}";
    push(cal);

    std::string ac_status;
    if (!equal_kappa) {
      ac_status = "not applicable";
    } else if (nsub > 2) {
      ac_status = "info";
    }
    json ac = convergence_record("anticommutator", hs, anticomm, 0.05, ac_status);
    ac["metric"] = "||P O_A + O_A P|| / ||O_A||";
    push(ac);

    std::string acsq_status;
    if (!equal_kappa || nsub <= 2) {
      acsq_status = "not applicable";
    }
    json acsq = convergence_record("anticommutator_squared", hs, anticomm_sq, 0.05, acsq_status);
    acsq["metric"] = "||(P O_A + O_A P)^2|| / ||P O_A + O_A P||^2";
    push(acsq);

    json t = convergence_record("diagonal_split_nilpotency", hs, tsq, 0.05, has_t ? "" : "not applicable");
    t["metric"] = "||(M^-1 B_T)^2|| / ||M^-1 B_T||^2";
    push(t);

    json chain;
    chain["name"] = "chain_nilpotency";
    chain["longest_chain"] = tree.longest_chain();
    chain["measured_index"] = chain_index;
    chain["status"] = !has_t ? "not applicable"
                      : std::all_of(chain_index.begin(), chain_index.end(),
                                    [&](int k) { return k <= tree.longest_chain(); })
                          ? "pass"
                          : "fail";
    push(chain);

    // smallest singular value of B_h at the grid point closest to h = 0.1
    const auto closest = std::min_element(hs.begin(), hs.end(), [](double a, double b) {
      return std::fabs(a - 0.1) < std::fabs(b - 0.1);
    });
    const Problem& pb = *problems[closest - hs.begin()];
    json uniq;
    uniq["name"] = "uniqueness";
    uniq["h"] = *closest;
    bool uniq_ok = true;
    json vals = json::array();
    for (Complex alpha : {Complex(1.0), Complex(0.5), Complex(-0.25), Complex(0.0, 1.0)}) {
      const auto sys = transmission::assemble_mtf(pb.b_a, pb.m, pb.p, alpha);
      const Eigen::BDCSVD<CMatrix> svd(sys.b_h);
      const auto& s = svd.singularValues();
      const double r = s(s.size() - 1) / s(0);
      uniq_ok = uniq_ok && r > 1e-6;
      vals.push_back({{"alpha", complex_json(alpha)}, {"sigma_min_over_norm", r}});
    }
    uniq["values"] = vals;
    uniq["status"] = uniq_ok ? "pass" : "fail";
    push(uniq);
  }
  return report;
}

std::string emit_plot_script(const std::vector<PlotPanel>& panels, const std::string& style, const fs::path& base_dir) {
  for (const auto& p : panels) {
    if (!fs::exists(base_dir / p.csv)) {
      throw IoError("plot input missing: " + (base_dir / p.csv).string());
    }
  }
  const bool zoom = style == "zoom";
  std::ostringstream s;
  const std::size_t n = panels.size();
  s << "# eigenvalue scatter, predicted points marked as crosses\n";
  s << "set terminal pngcairo size " << 480 * std::max<std::size_t>(n, 1) << ",480\n";
  s << "set output 'spectrum.png'\n";
  s << "set datafile separator ','\n";
  s << "set key off\n";
  s << "set xlabel 'Re'\n";
  s << "set ylabel 'Im'\n";
  s << "set autoscale\n";
  if (n > 1) {
    s << "set multiplot layout 1," << n << "\n";
  }
  for (const auto& p : panels) {
    s << "set title '" << p.title << "'\n";
    if (zoom) {
      // only the cluster around the positive predicted point; autoscale keeps the cross in frame
      s << "plot '" << p.csv << "' every ::1 using ($1 > " << 0.5 * (p.predicted[0].real() + p.predicted[1].real())
        << " ? $1 : 1/0):2 with points pt 7 ps 0.5, \\\n";
      s << "     '+' using (" << p.predicted[0].real() << "):(" << p.predicted[0].imag()
        << ") every ::0::0 with points pt 2 ps 3 lw 2\n";
    } else {
      s << "plot '" << p.csv << "' every ::1 using 1:2 with points pt 7 ps 0.5, \\\n";
      s << "     '+' using (" << p.predicted[0].real() << "):(" << p.predicted[0].imag()
        << ") every ::0::0 with points pt 2 ps 3 lw 2, \\\n";
      s << "     '+' using (" << p.predicted[1].real() << "):(" << p.predicted[1].imag()
        << ") every ::0::0 with points pt 2 ps 3 lw 2\n";
    }
  }
  if (n > 1) {
    s << "unset multiplot\n";
  }
  return s.str();
}

RunManifest run(const ExperimentConfig& config, const fs::path& out_dir, int parallel) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) {
    throw IoError("cannot create output directory " + out_dir.string() + ": " + ec.message());
  }
  RunManifest manifest;
  manifest.config = config.source;
  manifest.seed = config.seed;
  std::mutex write_mutex;
  auto write_artifact = [&](const std::string& task, const std::string& name, const std::string& content) {
    std::lock_guard lock(write_mutex);
    io::write_text(out_dir / name, content);
    manifest.artifacts.push_back({task, name, io::sha256_file(out_dir / name)});
  };

  ProblemCache cache;
  const auto vars = variants(config);
  struct Point {
    const Variant* variant;
    double h;
    Complex alpha;
  };
  std::vector<Point> grid;
  for (const auto& v : vars) {
    for (double h : config.hs) {
      for (Complex a : config.alphas) {
        grid.push_back({&v, h, a});
      }
    }
  }
  std::map<std::tuple<std::string, double, double, double>, spectrum::SpectrumReport> reports;
  std::mutex reports_mutex;
  auto spectrum_at = [&](const Point& pt) {
    {
      std::lock_guard lock(reports_mutex);
      auto it = reports.find({pt.variant->tag, pt.h, pt.alpha.real(), pt.alpha.imag()});
      if (it != reports.end()) {
        return it->second;
      }
    }
    const auto pb = cache.get(*pt.variant, pt.h);
    const auto eig = spectrum::eig_operator(transmission::operator_form(pb->o_a, pb->p, pt.alpha), 10, config.seed);
    auto rep = spectrum::cluster_report(eig.values, pt.alpha);
    rep.kappas = config.kappas;
    rep.h = pt.h;
    rep.geometry = pt.variant->partition.id;
    std::lock_guard lock(reports_mutex);
    reports.emplace(std::make_tuple(pt.variant->tag, pt.h, pt.alpha.real(), pt.alpha.imag()), rep);
    return rep;
  };

  for (Task task : config.tasks) {
    const auto t0 = std::chrono::steady_clock::now();
    if (task == Task::spectrum) {
      parallel_for(grid.size(), parallel, [&](std::size_t i) {
        const auto rep = spectrum_at(grid[i]);
        write_artifact("spectrum", grid_name("eigs", grid[i].variant->tag, grid[i].h, grid[i].alpha, ".csv"),
                       spectrum::eigenvalues_csv(rep.eigenvalues));
        write_artifact("spectrum", grid_name("report", grid[i].variant->tag, grid[i].h, grid[i].alpha, ".json"),
                       spectrum::report_json(rep).dump(2) + "\n");
      });
      std::vector<PlotPanel> panels;
      for (const auto& pt : grid) {
        panels.push_back({grid_name("eigs", pt.variant->tag, pt.h, pt.alpha, ".csv"),
                          pt.variant->tag + " h=" + fmt(pt.h) + " alpha=" + fmt(pt.alpha),
                          spectrum::predicted_eigenvalues(pt.alpha)});
      }
      write_artifact("spectrum", "spectrum.gp", emit_plot_script(panels, config.plot_style, out_dir));
    } else if (task == Task::identities) {
      write_artifact("identities", "identities.json", run_identity_suite(config, parallel).dump(2) + "\n");
    } else if (task == Task::solve) {
      parallel_for(grid.size(), parallel, [&](std::size_t i) {
        const auto& pt = grid[i];
        const auto pb = cache.get(*pt.variant, pt.h);
        auto sys = transmission::assemble_mtf(pb->b_a, pb->m, pb->p, pt.alpha);
        const transmission::PlaneWave wave{config.incident_direction, pb->partition.kappas[0]};
        sys.rhs = transmission::assemble_rhs(pb->b_a, pb->m, pb->dofmap, pb->skeleton, wave);
        const auto rep = transmission::solve(sys, config.solver, pb->dofmap, pb->skeleton);
        const io::SolutionMeta meta{pt.alpha, config.kappas, pt.h, pt.variant->partition.id};
        write_artifact("solve", grid_name("solution", pt.variant->tag, pt.h, pt.alpha, ".json"),
                       io::solution_json(rep, pb->dofmap, meta).dump(2) + "\n");
      });
    } else {
      parallel_for(grid.size(), parallel, [&](std::size_t i) { spectrum_at(grid[i]); });
      for (const auto& v : vars) {
        for (Complex a : config.alphas) {
          std::vector<double> hs = config.hs;
          std::sort(hs.begin(), hs.end(), std::greater<>());
          json rows = json::array();
          for (double h : hs) {
            const auto rep = spectrum_at({&v, h, a});
            rows.push_back({{"h", h},
                            {"dimension", rep.eigenvalues.size()},
                            {"median", rep.median},
                            {"p90", rep.p90},
                            {"max", rep.max}});
          }
          const json doc = {{"geometry", v.partition.id}, {"alpha", complex_json(a)}, {"rows", rows}};
          write_artifact("convergence", "convergence_" + v.tag + "_a" + fmt(a) + ".json", doc.dump(2) + "\n");
        }
      }
    }
    manifest.timings.emplace_back(to_string(task),
                                  std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  std::sort(manifest.artifacts.begin(), manifest.artifacts.end(),
            [](const Artifact& a, const Artifact& b) { return a.path < b.path; });
  io::write_text(out_dir / "manifest.json", manifest.to_json().dump(2) + "\n");
  return manifest;
}

std::vector<std::string> verify_manifest(const fs::path& dir) {
  json doc;
  try {
    doc = json::parse(io::read_text(dir / "manifest.json"));
  } catch (const json::exception& e) {
    throw ValidationError("cannot parse manifest: " + std::string(e.what()));
  }
  std::vector<std::string> bad;
  for (const auto& a : doc.at("artifacts")) {
    const auto path = a.at("path").get<std::string>();
    if (!fs::exists(dir / path) || io::sha256_file(dir / path) != a.at("sha256").get<std::string>()) {
      bad.push_back(path);
    }
  }
  return bad;
}

}  // namespace mtf::experiment
