#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "sdidkit/did.hpp"
#include "sdidkit/exposure.hpp"
#include "sdidkit/ingest.hpp"
#include "sdidkit/panel.hpp"
#include "sdidkit/sdid.hpp"
#include "sdidkit/simlab.hpp"
#include "sdidkit/simplex.hpp"

namespace py = pybind11;
using namespace sdidkit;

namespace {

PanelDataset panel_from_rows(
    const std::vector<std::tuple<std::string, int, int, double, long>> &rows,
    const std::string &outcome_label) {
  std::map<std::pair<UnitId, TimeIndex>, PanelCell> cells;
  for (const auto &[unit, year, month, value, n_obs] : rows) {
    TimeIndex t{year, month};
    if (month < 1 || month > 12)
      throw ValidationError("month out of range 1..12");
    if (!cells.emplace(std::make_pair(unit, t), PanelCell{value, n_obs}).second)
      throw ValidationError("duplicate cell (" + unit + ", " + t.str() + ")");
  }
  return PanelDataset::from_cells(std::move(cells), outcome_label);
}

TreatmentSpec make_spec(const std::vector<std::string> &treated,
                        const std::vector<std::string> &controls, int onset_year,
                        int onset_month) {
  TreatmentSpec spec;
  spec.treated.insert(treated.begin(), treated.end());
  spec.controls.insert(controls.begin(), controls.end());
  spec.onset = TimeIndex{onset_year, onset_month};
  return spec;
}

} // namespace

PYBIND11_MODULE(_sdidkit, m) {
  m.doc() = "Panel treatment-effect estimators: TWFE DiD, event studies and "
            "synthetic DiD";

  py::register_exception<ValidationError>(m, "ValidationError",
                                          PyExc_ValueError);
  py::register_exception<EstimationError>(m, "EstimationError",
                                          PyExc_RuntimeError);

  py::class_<TimeIndex>(m, "TimeIndex")
      .def(py::init<int, int>(), py::arg("year"), py::arg("month"))
      .def_readonly("year", &TimeIndex::year)
      .def_readonly("month", &TimeIndex::month)
      .def("__repr__", [](const TimeIndex &t) { return t.str(); })
      .def("__eq__", [](const TimeIndex &a, const TimeIndex &b) { return a == b; })
      .def("__lt__", [](const TimeIndex &a, const TimeIndex &b) { return a < b; })
      .def("__hash__",
           [](const TimeIndex &t) { return t.year * 12 + t.month; });

  py::class_<PanelDataset>(m, "PanelDataset")
      .def_static("from_rows", &panel_from_rows, py::arg("rows"),
                  py::arg("outcome_label") = "outcome",
                  "rows: list of (unit, year, month, value, n_obs)")
      .def_static("read_csv", &read_panel_csv, py::arg("path"))
      .def("write_csv",
           [](const PanelDataset &p, const std::string &path) {
             write_panel_csv(p, path);
           })
      .def_property_readonly("units", &PanelDataset::units)
      .def_property_readonly("periods", &PanelDataset::periods)
      .def_property_readonly("outcome_label", &PanelDataset::outcome_label)
      .def("n_cells", &PanelDataset::n_cells)
      .def("value",
           [](const PanelDataset &p, const std::string &u, int y, int mo)
               -> py::object {
             const PanelCell *c = p.cell(u, TimeIndex{y, mo});
             if (!c) return py::none();
             return py::make_tuple(c->value, c->n_obs);
           });

  py::class_<TreatmentSpec>(m, "TreatmentSpec")
      .def(py::init(&make_spec), py::arg("treated"), py::arg("controls"),
           py::arg("onset_year") = 2022, py::arg("onset_month") = 12)
      .def_readonly("treated", &TreatmentSpec::treated)
      .def_readonly("controls", &TreatmentSpec::controls)
      .def_readonly("onset", &TreatmentSpec::onset);

  m.def("check_balanced",
        [](const PanelDataset &p, const std::vector<std::string> &units) {
          return check_balanced(p, std::set<UnitId>(units.begin(), units.end()));
        });
  m.def("donor_pool_for", &donor_pool_for);
  m.def("split_pre_post", [](const PanelDataset &p, const TreatmentSpec &s) {
    auto sp = split_pre_post(p, s);
    return py::make_tuple(sp.pre, sp.post);
  });

  py::class_<TwfeFit>(m, "TwfeFit")
      .def_readonly("beta", &TwfeFit::beta)
      .def_readonly("se_clustered", &TwfeFit::se_clustered)
      .def_readonly("n_cells", &TwfeFit::n_cells)
      .def_readonly("intercept", &TwfeFit::intercept)
      .def_readonly("alpha", &TwfeFit::alpha)
      .def_property_readonly("delta", [](const TwfeFit &f) {
        py::dict d;
        for (const auto &[t, v] : f.delta) d[py::cast(t.str())] = v;
        return d;
      });

  m.def("twfe_did", &twfe_did, py::arg("panel"), py::arg("spec"),
        py::arg("weight_by_nobs") = true);
  m.def(
      "event_study",
      [](const PanelDataset &p, const TreatmentSpec &s, bool w) {
        auto fit = event_study(p, s, w);
        py::dict d;
        for (const auto &[k, c] : fit.coefficients)
          d[py::cast(k)] = py::make_tuple(c.beta, c.se);
        return d;
      },
      py::arg("panel"), py::arg("spec"), py::arg("weight_by_nobs") = true,
      "returns {k: (beta, se)}; k = -1 is the omitted baseline");
  m.def(
      "continuous_did",
      [](const PanelDataset &p, const std::map<std::string, double> &exposure,
         int onset_year, int onset_month, bool w) {
        return continuous_did(p, exposure, TimeIndex{onset_year, onset_month},
                              w);
      },
      py::arg("panel"), py::arg("exposure"), py::arg("onset_year") = 2022,
      py::arg("onset_month") = 12, py::arg("weight_by_nobs") = true);

  m.def(
      "solve_simplex_ls",
      [](const Eigen::MatrixXd &A, const Eigen::VectorXd &b) {
        auto sol = solve_simplex_ls(A, b);
        return py::make_tuple(sol.weights, sol.objective);
      },
      py::arg("A"), py::arg("b"),
      "min ||Aw-b||^2 over the probability simplex; returns (weights, objective)");

  py::class_<SdidUnitFit>(m, "SdidUnitFit")
      .def_readonly("treated_unit", &SdidUnitFit::treated_unit)
      .def_readonly("tau", &SdidUnitFit::tau)
      .def_readonly("mu", &SdidUnitFit::mu)
      .def_readonly("donor_count", &SdidUnitFit::donor_count)
      .def_readonly("n_obs_weight", &SdidUnitFit::n_obs_weight)
      .def_property_readonly("omega",
                             [](const SdidUnitFit &f) {
                               py::dict d;
                               for (std::size_t i = 0; i < f.omega.keys.size(); ++i)
                                 d[py::cast(f.omega.keys[i])] =
                                     f.omega.values[static_cast<Eigen::Index>(i)];
                               return d;
                             })
      .def_property_readonly("lambda_", [](const SdidUnitFit &f) {
        py::dict d;
        for (std::size_t i = 0; i < f.lambda.keys.size(); ++i)
          d[py::cast(f.lambda.keys[i].str())] =
              f.lambda.values[static_cast<Eigen::Index>(i)];
        return d;
      });

  py::class_<SdidFit>(m, "SdidFit")
      .def_readonly("unit_fits", &SdidFit::unit_fits)
      .def_readonly("att", &SdidFit::att)
      .def_readonly("se_bootstrap", &SdidFit::se_bootstrap)
      .def_readonly("n_boot", &SdidFit::n_boot)
      .def_property_readonly("skipped", [](const SdidFit &f) {
        py::list out;
        for (const auto &s : f.skipped)
          out.append(py::make_tuple(s.unit, s.reason));
        return out;
      });

  m.def(
      "sdid_per_unit",
      [](const PanelDataset &p, const TreatmentSpec &s, int n_boot,
         std::uint64_t seed, int threads) {
        SdidOptions opts;
        opts.n_boot = n_boot;
        opts.seed = seed;
        opts.threads = threads;
        return sdid_per_unit(p, s, opts);
      },
      py::arg("panel"), py::arg("spec"), py::arg("n_boot") = 1000,
      py::arg("seed") = 20221130, py::arg("threads") = 1);

  py::class_<FactorDgpConfig>(m, "FactorDgpConfig")
      .def(py::init<>())
      .def_readwrite("n_treated", &FactorDgpConfig::n_treated)
      .def_readwrite("n_control", &FactorDgpConfig::n_control)
      .def_readwrite("n_pre", &FactorDgpConfig::n_pre)
      .def_readwrite("n_post", &FactorDgpConfig::n_post)
      .def_readwrite("tau_true", &FactorDgpConfig::tau_true)
      .def_readwrite("factor_dim", &FactorDgpConfig::factor_dim)
      .def_readwrite("loading_treatment_corr",
                     &FactorDgpConfig::loading_treatment_corr)
      .def_readwrite("noise_sd", &FactorDgpConfig::noise_sd)
      .def_readwrite("seed", &FactorDgpConfig::seed);

  m.def("generate", [](const FactorDgpConfig &cfg) {
    auto gp = generate(cfg);
    return py::make_tuple(gp.panel, gp.spec, gp.tau_true);
  });

  m.def(
      "monte_carlo",
      [](const FactorDgpConfig &cfg, int n_reps, bool run_did, bool run_sdid,
         int sdid_n_boot, int threads) {
        McOptions opts;
        opts.run_did = run_did;
        opts.run_sdid = run_sdid;
        opts.sdid_n_boot = sdid_n_boot;
        opts.threads = threads;
        auto rep = monte_carlo(cfg, n_reps, opts);
        py::dict out;
        for (const auto &[name, st] : rep.estimators) {
          py::dict d;
          d["mean_bias"] = st.mean_bias;
          d["rmse"] = st.rmse;
          d["coverage"] = st.coverage;
          d["n_failures"] = st.n_failures;
          d["estimates"] = rep.estimates.at(name);
          out[py::cast(name)] = d;
        }
        return out;
      },
      py::arg("config"), py::arg("n_reps"), py::arg("run_did") = true,
      py::arg("run_sdid") = true, py::arg("sdid_n_boot") = 200,
      py::arg("threads") = 1);

  m.def("compute_exposure", [](const std::vector<std::tuple<
                                   std::string, std::string, double,
                                   std::string>> &tasks) {
    std::vector<TaskRecord> recs;
    for (const auto &[occ, task, share, cls] : tasks)
      recs.push_back(TaskRecord{occ, task, share, parse_task_class(cls)});
    auto scores = compute_exposure(recs);
    py::list out;
    for (const auto &s : scores) {
      py::dict d;
      d["occupation"] = s.occupation;
      d["overall"] = s.overall;
      d["automative"] = s.automative;
      d["augmentative"] = s.augmentative;
      d["n_tasks"] = s.n_tasks;
      out.append(d);
    }
    return out;
  });
}
