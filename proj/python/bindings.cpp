#include <cstdlib>

#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "twostage/critical.hpp"
#include "twostage/engine.hpp"
#include "twostage/errors.hpp"
#include "twostage/graphical.hpp"
#include "twostage/meanfield.hpp"
#include "twostage/oracle.hpp"
#include "twostage/saw.hpp"

namespace py = pybind11;
using namespace twostage;

namespace {

py::tuple interval(const Interval& i) { return py::make_tuple(i.low, i.high); }

py::dict survival_dict(const SurvivalEstimate& e) {
  py::dict out;
  out["trials"] = e.trials;
  out["survivals"] = e.survivals;
  out["p_hat"] = e.p_hat;
  out["ci95"] = interval(e.ci95);
  out["proxy"] = e.proxy;
  return out;
}

SurvivalProxy make_proxy(int d, double horizon, std::size_t cap, int radius) {
  SurvivalProxy p = SurvivalProxy::defaults(d);
  p.horizon = horizon;
  p.box_radius = radius;
  if (cap > 0) p.cap = cap;
  return p;
}

BisectSettings make_settings(int d, double eps, double tol, std::size_t probe_replicas, std::size_t bracket_replicas,
                             double lambda_max, double horizon, std::size_t cap, int radius) {
  BisectSettings s;
  s.eps = eps;
  s.tol = tol;
  s.probe_replicas = probe_replicas;
  s.bracket_replicas = bracket_replicas;
  s.lambda_max = lambda_max;
  s.proxy = make_proxy(d, horizon, cap, radius);
  return s;
}

py::dict critical_dict(const CriticalEstimate& e) {
  py::dict out;
  out["kind"] = to_string(e.kind);
  out["d"] = e.d;
  out["lambda_hat"] = e.lambda_hat;
  out["scaled"] = e.scaled;
  out["lambda_lo"] = e.lambda_lo;
  out["lambda_hi"] = e.lambda_hi;
  out["lambda_ci"] = interval(e.lambda_ci);
  out["proxy"] = e.proxy;
  py::list probes;
  for (const Probe& p : e.probes) {
    py::dict row = survival_dict(p.estimate);
    row["lambda"] = p.lambda;
    row["role"] = p.role;
    probes.append(row);
  }
  out["probes"] = probes;
  return out;
}

}  // namespace

PYBIND11_MODULE(_twostage, m) {
  m.doc() = "Two-stage contact process: simulation, thresholds and survival bounds";

  py::register_exception<ParameterError>(m, "ParameterError", PyExc_ValueError);
  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<ContractError>(m, "ContractError", PyExc_ValueError);
  py::register_exception<BracketError>(m, "BracketError", PyExc_RuntimeError);
  py::register_exception<ResourceError>(m, "ResourceError", PyExc_RuntimeError);

  py::class_<ProcessParams>(m, "ProcessParams")
      .def(py::init([](double lambda, double gamma, double delta) {
             ProcessParams p{lambda, gamma, delta};
             p.validate();
             return p;
           }),
           py::arg("lambda_"), py::arg("gamma") = 1.0, py::arg("delta") = 1.0)
      .def_readonly("lambda_", &ProcessParams::lambda)
      .def_readonly("gamma", &ProcessParams::gamma)
      .def_readonly("delta", &ProcessParams::delta)
      .def("__repr__", [](const ProcessParams& p) {
        return "ProcessParams(lambda_=" + std::to_string(p.lambda) + ", gamma=" + std::to_string(p.gamma) +
               ", delta=" + std::to_string(p.delta) + ")";
      });

  m.def("lower_bound_lambda", &lower_bound_lambda, py::arg("d"), py::arg("gamma"), py::arg("delta"),
        "(1/2d)(1 + (1 + delta)/gamma)");
  m.def(
      "moment_matrix",
      [](int d, const ProcessParams& p) { return build_moment_matrix(d, p).entries; }, py::arg("d"), py::arg("params"));
  m.def(
      "eigenvalues", [](int d, const ProcessParams& p) { return eigenvalues(build_moment_matrix(d, p)); },
      py::arg("d"), py::arg("params"));
  m.def("max_real_eigenvalue", &max_real_eigenvalue, py::arg("d"), py::arg("params"));
  m.def("is_subcritical", &is_subcritical, py::arg("d"), py::arg("params"));
  m.def(
      "solve_moments",
      [](int d, const ProcessParams& p, double t) {
        const Moments mo = solve_moments(d, p, t);
        return py::make_tuple(mo.zeta, mo.theta);
      },
      py::arg("d"), py::arg("params"), py::arg("t"), "(E zeta_t(O), E theta_t(O)) from all sites at (1, 0)");

  m.def(
      "site_rates",
      [](const std::string& kind, int d, const std::map<std::vector<int>, int>& config, const std::vector<int>& site,
         const ProcessParams& p) {
        auto to_site = [](const std::vector<int>& c) { return Site(std::vector<Coord>(c.begin(), c.end())); };
        // Smallest box around the origin holding every given site and its neighbours.
        int radius = 1;
        for (int c : site) radius = std::max(radius, std::abs(c) + 1);
        SparseConfig cfg;
        for (const auto& [coords, state] : config) {
          for (int c : coords) radius = std::max(radius, std::abs(c) + 1);
          cfg.set(to_site(coords), state_from_code(state));
        }
        std::vector<std::pair<int, double>> out;
        for (const Transition& t : site_rates(parse_kind(kind), cfg, to_site(site), p, Geometry::box(d, radius))) {
          out.emplace_back(code(t.target), t.rate);
        }
        return out;
      },
      py::arg("kind"), py::arg("d"), py::arg("config"), py::arg("site"), py::arg("params"),
      "Outgoing (target state, rate) pairs of one site; config maps coordinate tuples to state codes.");

  m.def(
      "estimate_survival",
      [](const std::string& kind, int d, const ProcessParams& p, std::size_t replicas, std::uint64_t seed,
         double horizon, std::size_t cap, int radius, unsigned threads) {
        const SurvivalProxy proxy = make_proxy(d, horizon, cap, radius);
        py::gil_scoped_release release;
        auto e = estimate_survival(parse_kind(kind), d, p, proxy, replicas, seed, threads);
        py::gil_scoped_acquire acquire;
        return survival_dict(e);
      },
      py::arg("kind"), py::arg("d"), py::arg("params"), py::arg("replicas"), py::arg("seed") = 1,
      py::arg("horizon") = 100.0, py::arg("cap") = 0, py::arg("radius") = 50, py::arg("threads") = 1);

  m.def(
      "bisect_critical",
      [](const std::string& kind, int d, double gamma, double delta, std::uint64_t seed, double eps, double tol,
         std::size_t probe_replicas, std::size_t bracket_replicas, double lambda_max, double horizon, std::size_t cap,
         int radius, unsigned threads) {
        const BisectSettings s =
            make_settings(d, eps, tol, probe_replicas, bracket_replicas, lambda_max, horizon, cap, radius);
        CriticalEstimate e;
        {
          py::gil_scoped_release release;
          e = bisect_critical(parse_kind(kind), d, gamma, delta, s, seed, threads);
        }
        return critical_dict(e);
      },
      py::arg("kind"), py::arg("d"), py::arg("gamma") = 1.0, py::arg("delta") = 1.0, py::arg("seed") = 1,
      py::arg("eps") = 0.02, py::arg("tol") = 0.002, py::arg("probe_replicas") = 2000,
      py::arg("bracket_replicas") = 10000, py::arg("lambda_max") = 10.0, py::arg("horizon") = 100.0,
      py::arg("cap") = 0, py::arg("radius") = 50, py::arg("threads") = 1);

  m.def(
      "survival_lower_bound",
      [](int d, const ProcessParams& p, std::size_t n_max, std::size_t replicas, std::uint64_t seed,
         unsigned threads) {
        SurvivalBound b;
        {
          py::gil_scoped_release release;
          b = estimate_survival_lower_bound(d, p, n_max, replicas, seed, threads);
        }
        py::dict out;
        out["estimate"] = b.estimate;
        out["ci"] = interval(b.ci);
        out["relative_change"] = b.relative_change;
        out["top_share"] = b.top_share;
        out["heavy_tail"] = b.heavy_tail;
        py::list conv;
        for (const BoundPoint& pt : b.convergence) {
          conv.append(py::make_tuple(pt.n, pt.mean_weight, pt.std_error, pt.bound));
        }
        out["convergence"] = conv;
        return out;
      },
      py::arg("d"), py::arg("params"), py::arg("n_max") = 2000, py::arg("replicas") = 1000, py::arg("seed") = 1,
      py::arg("threads") = 1);

  m.def("lambda_from_theta", &lambda_from_theta, py::arg("d"), py::arg("theta"), py::arg("gamma"),
        py::arg("delta"));

  m.def(
      "union_probability",
      [](int d, const ProcessParams& p, std::size_t n, std::size_t samples, std::uint64_t seed, unsigned threads) {
        UnionEstimate u;
        {
          py::gil_scoped_release release;
          u = estimate_union_probability(d, p, n, samples, seed, threads);
        }
        return py::make_tuple(u.p_hat, u.std_error, u.hits);
      },
      py::arg("d"), py::arg("params"), py::arg("n"), py::arg("samples"), py::arg("seed") = 1, py::arg("threads") = 1,
      "(p_hat, std_error, hits) for the union of path events over the walk class");

  m.def(
      "exact_marginal",
      [](const std::string& kind, int side, const ProcessParams& p, double t, std::size_t site) {
        const ExactChain chain = build_exact(parse_kind(kind), Geometry::torus(1, side), p);
        SparseConfig init;
        init.set(Site::origin(1), SiteState::fully_infected);
        const auto m = site_marginal(chain, transient(chain, chain.index_of(init), t), site);
        return std::vector<double>(m.begin(), m.end());
      },
      py::arg("kind"), py::arg("side"), py::arg("params"), py::arg("t"), py::arg("site") = 0,
      "Exact state probabilities [P(-1), P(0), P(1), P(2)] of one ring site, started from a single state-2 origin.");
}
