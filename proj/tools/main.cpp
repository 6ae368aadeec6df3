#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <map>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "sdidkit/csv.hpp"
#include "sdidkit/did.hpp"
#include "sdidkit/exposure.hpp"
#include "sdidkit/ingest.hpp"
#include "sdidkit/manifest.hpp"
#include "sdidkit/panel.hpp"
#include "sdidkit/sdid.hpp"
#include "sdidkit/simlab.hpp"

namespace {

using namespace sdidkit;

TimeIndex parse_onset(const std::string &s) {
  auto dash = s.find('-');
  if (dash == std::string::npos)
    throw ValidationError("onset must be YYYY-MM, got '" + s + "'");
  return parse_time(s.substr(0, dash), s.substr(dash + 1));
}

TreatmentSpec read_treatment_csv(const std::string &path,
                                 const TimeIndex &onset) {
  auto t = csv::read_file(path);
  int cu = t.require_column("unit");
  int ct = t.require_column("treated");
  TreatmentSpec spec;
  spec.onset = onset;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto &row = t.rows[r];
    long flag = csv::to_long(row[ct], r + 2, ct);
    if (flag != 0 && flag != 1)
      throw ValidationError(path + ": treated flag must be 0 or 1, got '" +
                            row[ct] + "'");
    (flag == 1 ? spec.treated : spec.controls).insert(row[cu]);
  }
  return spec;
}

void write_text(const std::string &path, const std::string &text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ValidationError("cannot write file: " + path);
  f << text;
}

nlohmann::json twfe_fit_json(const TwfeFit &fit) {
  nlohmann::json j;
  j["beta"] = fit.beta;
  j["se_clustered"] = fit.se_clustered;
  j["n_cells"] = fit.n_cells;
  j["intercept"] = fit.intercept;
  nlohmann::json alpha = nlohmann::json::object();
  for (const auto &[u, v] : fit.alpha) alpha[u] = v;
  j["alpha"] = alpha;
  nlohmann::json delta = nlohmann::json::object();
  for (const auto &[t, v] : fit.delta) delta[t.str()] = v;
  j["delta"] = delta;
  return j;
}

int run_ingest(const std::string &micro_path, const std::string &deflator_path,
               const std::string &outcome, const std::string &out_path) {
  auto records = read_micro_csv(micro_path);
  PanelDataset panel = [&] {
    if (outcome == "unemployment") return aggregate_unemployment(records);
    if (outcome == "earnings")
      return aggregate_earnings(records, read_deflator_csv(deflator_path));
    throw ValidationError("outcome must be 'unemployment' or 'earnings'");
  }();
  write_panel_csv(panel, out_path);

  RunManifest m = make_manifest("ingest");
  m.parameters["outcome"] = outcome;
  m.add_input(micro_path);
  if (outcome == "earnings") m.add_input(deflator_path);
  m.add_output(out_path);
  m.write(out_path + ".manifest.json");
  return 0;
}

int run_exposure(const std::string &tasks_path, const std::string &out_path) {
  auto tasks = read_tasks_csv(tasks_path);
  auto scores = compute_exposure(tasks);
  std::cerr << "exposure computed over " << scores.size() << " occupations\n";

  std::map<ExposureVariant, std::string> variants = {
      {ExposureVariant::overall, "overall"},
      {ExposureVariant::automative, "automative"},
      {ExposureVariant::augmentative, "augmentative"}};
  std::map<std::string, std::map<UnitId, int>> quarts;
  std::map<std::string, TreatmentPartition> parts;
  for (const auto &[v, name] : variants) {
    if (scores.size() >= 4) quarts[name] = quartile_bins(scores, v);
    parts[name] = binarize_above_median(scores, v);
  }

  std::ostringstream os;
  os << "occupation,overall,automative,augmentative,n_tasks";
  for (const auto &[v, name] : variants)
    os << ",quartile_" << name << ",treated_" << name;
  os << '\n';
  for (const auto &s : scores) {
    os << s.occupation << ',' << csv::fmt_double(s.overall) << ','
       << csv::fmt_double(s.automative) << ',' << csv::fmt_double(s.augmentative)
       << ',' << s.n_tasks;
    for (const auto &[v, name] : variants) {
      os << ',';
      if (quarts.count(name)) os << quarts[name].at(s.occupation);
      os << ',' << (parts[name].treated.count(s.occupation) ? 1 : 0);
    }
    os << '\n';
  }
  write_text(out_path, os.str());

  RunManifest m = make_manifest("exposure");
  m.add_input(tasks_path);
  m.add_output(out_path);
  m.write(out_path + ".manifest.json");
  return 0;
}

int run_did(const std::string &panel_path, const std::string &treatment_path,
            const std::string &onset_s, bool unweighted,
            const std::string &exposure_path, const std::string &exposure_col,
            const std::string &out_prefix) {
  PanelDataset panel = read_panel_csv(panel_path);
  TimeIndex onset = parse_onset(onset_s);
  nlohmann::json j;
  RunManifest m = make_manifest("did");
  m.parameters["onset"] = onset.str();
  m.parameters["weighted"] = unweighted ? "false" : "true";
  m.add_input(panel_path);

  if (!exposure_path.empty()) {
    // continuous-treatment variant: exposure x post interaction
    auto t = csv::read_file(exposure_path);
    int cu = t.require_column("occupation");
    int ce = t.require_column(exposure_col);
    std::map<UnitId, double> exposure;
    for (std::size_t r = 0; r < t.rows.size(); ++r)
      exposure[t.rows[r][cu]] = csv::to_double(t.rows[r][ce], r + 2, ce);
    TwfeFit fit = continuous_did(panel, exposure, onset, !unweighted);
    j = twfe_fit_json(fit);
    j["model"] = "continuous_did";
    m.parameters["exposure_col"] = exposure_col;
    m.add_input(exposure_path);
  } else {
    TreatmentSpec spec = read_treatment_csv(treatment_path, onset);
    TwfeFit fit = twfe_did(panel, spec, !unweighted);
    j = twfe_fit_json(fit);
    j["model"] = "twfe_did";
    m.add_input(treatment_path);
  }
  std::string out_json = out_prefix + ".json";
  write_text(out_json, j.dump(2) + "\n");
  m.add_output(out_json);
  m.write(out_prefix + ".manifest.json");
  std::cout << "beta = " << j["beta"].get<double>()
            << " (se " << j["se_clustered"].get<double>() << ")\n";
  return 0;
}

int run_event_study(const std::string &panel_path,
                    const std::string &treatment_path,
                    const std::string &onset_s, bool unweighted,
                    const std::string &out_prefix) {
  PanelDataset panel = read_panel_csv(panel_path);
  TimeIndex onset = parse_onset(onset_s);
  TreatmentSpec spec = read_treatment_csv(treatment_path, onset);
  EventStudyFit fit = event_study(panel, spec, !unweighted);

  std::ostringstream os;
  os << "k,beta,se,ci_lo,ci_hi\n";
  nlohmann::json coefs = nlohmann::json::object();
  for (const auto &[k, c] : fit.coefficients) {
    os << k << ',' << csv::fmt_double(c.beta) << ',' << csv::fmt_double(c.se)
       << ',' << csv::fmt_double(c.beta - 1.96 * c.se) << ','
       << csv::fmt_double(c.beta + 1.96 * c.se) << '\n';
    coefs[std::to_string(k)] = {{"beta", c.beta}, {"se", c.se}};
  }
  nlohmann::json j;
  j["model"] = "event_study";
  j["omitted_k"] = EventStudyFit::omitted_k;
  j["coefficients"] = coefs;

  std::string out_csv = out_prefix + "_coefficients.csv";
  std::string out_json = out_prefix + ".json";
  write_text(out_csv, os.str());
  write_text(out_json, j.dump(2) + "\n");

  RunManifest m = make_manifest("event-study");
  m.parameters["onset"] = onset.str();
  m.parameters["weighted"] = unweighted ? "false" : "true";
  m.add_input(panel_path);
  m.add_input(treatment_path);
  m.add_output(out_csv);
  m.add_output(out_json);
  m.write(out_prefix + ".manifest.json");
  return 0;
}

double entropy(const Eigen::VectorXd &w) {
  double h = 0.0;
  for (Eigen::Index i = 0; i < w.size(); ++i)
    if (w[i] > 0) h -= w[i] * std::log(w[i]);
  return h;
}

int run_sdid(const std::string &panel_path, const std::string &treatment_path,
             const std::string &onset_s, int n_boot, std::uint64_t seed,
             int threads, const std::string &out_prefix) {
  PanelDataset panel = read_panel_csv(panel_path);
  TimeIndex onset = parse_onset(onset_s);
  TreatmentSpec spec = read_treatment_csv(treatment_path, onset);
  SdidOptions opts;
  opts.n_boot = n_boot;
  opts.seed = seed;
  opts.threads = threads;
  SdidFit fit = sdid_per_unit(panel, spec, opts);

  std::ostringstream per_unit;
  per_unit << "unit,tau,donor_count,omega_entropy,objective_pre,n_obs_weight,"
              "skip_reason\n";
  std::ostringstream hist;
  hist << "tau,weight\n";
  for (const auto &f : fit.unit_fits) {
    per_unit << f.treated_unit << ',' << csv::fmt_double(f.tau) << ','
             << f.donor_count << ',' << csv::fmt_double(entropy(f.omega.values))
             << ',' << csv::fmt_double(f.omega.objective) << ','
             << csv::fmt_double(f.n_obs_weight) << ",\n";
    hist << csv::fmt_double(f.tau) << ',' << csv::fmt_double(f.n_obs_weight)
         << '\n';
  }
  for (const auto &s : fit.skipped)
    per_unit << s.unit << ",,,,,," << s.reason << '\n';

  nlohmann::json j;
  j["att"] = fit.att;
  j["se_bootstrap"] = fit.se_bootstrap;
  j["n_boot"] = fit.n_boot;
  j["n_fitted"] = fit.unit_fits.size();
  j["n_skipped"] = fit.skipped.size();

  std::string out_units = out_prefix + "_units.csv";
  std::string out_hist = out_prefix + "_tau_hist.csv";
  std::string out_json = out_prefix + "_summary.json";
  write_text(out_units, per_unit.str());
  write_text(out_hist, hist.str());
  write_text(out_json, j.dump(2) + "\n");

  RunManifest m = make_manifest("sdid");
  m.parameters["onset"] = onset.str();
  m.parameters["n_boot"] = std::to_string(n_boot);
  m.parameters["seed"] = std::to_string(seed);
  m.add_input(panel_path);
  m.add_input(treatment_path);
  m.add_output(out_units);
  m.add_output(out_hist);
  m.add_output(out_json);
  m.write(out_prefix + ".manifest.json");
  std::cout << "att = " << fit.att << " (bootstrap se " << fit.se_bootstrap
            << "), fitted " << fit.unit_fits.size() << ", skipped "
            << fit.skipped.size() << "\n";
  return 0;
}

int run_simulate(const std::string &config_path, int n_reps,
                 const std::string &estimators, int threads,
                 const std::string &out_prefix) {
  FactorDgpConfig cfg = read_dgp_config(config_path);
  McOptions opts;
  opts.run_did = estimators == "did" || estimators == "did,sdid" ||
                 estimators == "sdid,did" || estimators == "both";
  opts.run_sdid = estimators == "sdid" || estimators == "did,sdid" ||
                  estimators == "sdid,did" || estimators == "both";
  if (!opts.run_did && !opts.run_sdid)
    throw ValidationError("estimators must name did and/or sdid");
  opts.threads = threads;
  McReport rep = monte_carlo(cfg, n_reps, opts);

  nlohmann::json j;
  j["n_reps"] = rep.n_reps;
  j["tau_true"] = rep.tau_true;
  for (const auto &[name, st] : rep.estimators)
    j["estimators"][name] = {{"mean_bias", st.mean_bias},
                             {"rmse", st.rmse},
                             {"coverage", st.coverage},
                             {"n_failures", st.n_failures}};

  std::ostringstream os;
  os << "rep";
  for (const auto &[name, v] : rep.estimates) os << ',' << name << "_estimate,"
                                                << name << "_se";
  os << '\n';
  for (int r = 0; r < rep.n_reps; ++r) {
    os << r;
    for (const auto &[name, v] : rep.estimates) {
      os << ',';
      if (!std::isnan(v[r])) os << csv::fmt_double(v[r]);
      os << ',';
      double se = rep.std_errors.at(name)[r];
      if (!std::isnan(se)) os << csv::fmt_double(se);
    }
    os << '\n';
  }

  std::string out_json = out_prefix + "_report.json";
  std::string out_csv = out_prefix + "_replications.csv";
  write_text(out_json, j.dump(2) + "\n");
  write_text(out_csv, os.str());

  RunManifest m = make_manifest("simulate");
  m.parameters["n_reps"] = std::to_string(n_reps);
  m.parameters["estimators"] = estimators;
  m.add_input(config_path);
  m.add_output(out_json);
  m.add_output(out_csv);
  m.write(out_prefix + ".manifest.json");
  return 0;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Panel treatment-effect toolkit: DiD, event studies and "
               "synthetic DiD over occupation-month panels"};
  app.require_subcommand(1);

  int threads = 1;
  app.add_option("--threads", threads, "worker thread cap")
      ->envname("SDIDKIT_THREADS");

  // ingest
  std::string micro_path, deflator_path, outcome = "unemployment";
  std::string ingest_out = "panel.csv";
  auto *ingest = app.add_subcommand("ingest", "aggregate micro records");
  ingest->add_option("--micro", micro_path, "micro CSV")->required();
  ingest->add_option("--deflator", deflator_path, "deflator CSV (earnings)");
  ingest->add_option("--outcome", outcome, "unemployment|earnings");
  ingest->add_option("--out", ingest_out, "output panel CSV");

  // exposure
  std::string tasks_path, exposure_out = "exposure.csv";
  auto *exposure = app.add_subcommand("exposure", "compute exposure scores");
  exposure->add_option("--tasks", tasks_path, "task CSV")->required();
  exposure->add_option("--out", exposure_out, "output CSV");

  // common estimation flags
  std::string panel_path, treatment_path, onset_s = "2022-12";
  bool unweighted = false;

  auto *did = app.add_subcommand("did", "two-way fixed-effects DiD");
  std::string did_exposure_path, did_exposure_col = "overall";
  std::string did_out = "did";
  did->add_option("--panel", panel_path, "panel CSV")->required();
  did->add_option("--treatment", treatment_path, "treatment CSV (unit,treated)");
  did->add_option("--exposure", did_exposure_path,
                  "exposure CSV for the continuous-treatment variant");
  did->add_option("--exposure-col", did_exposure_col, "exposure column");
  did->add_option("--onset", onset_s, "first treated month, YYYY-MM");
  did->add_flag("--unweighted", unweighted, "ignore n_obs weights");
  did->add_option("--out", did_out, "output prefix");

  auto *es = app.add_subcommand("event-study", "relative-month event study");
  std::string es_out = "event_study";
  es->add_option("--panel", panel_path, "panel CSV")->required();
  es->add_option("--treatment", treatment_path, "treatment CSV")->required();
  es->add_option("--onset", onset_s, "first treated month, YYYY-MM");
  es->add_flag("--unweighted", unweighted, "ignore n_obs weights");
  es->add_option("--out", es_out, "output prefix");

  auto *sdid = app.add_subcommand("sdid", "per-unit synthetic DiD");
  int n_boot = 1000;
  std::uint64_t seed = 20221130;
  std::string sdid_out = "sdid";
  sdid->add_option("--panel", panel_path, "panel CSV")->required();
  sdid->add_option("--treatment", treatment_path, "treatment CSV")->required();
  sdid->add_option("--onset", onset_s, "first treated month, YYYY-MM");
  sdid->add_option("--nboot", n_boot, "bootstrap repetitions");
  sdid->add_option("--seed", seed, "bootstrap seed");
  sdid->add_option("--out", sdid_out, "output prefix");

  auto *sim = app.add_subcommand("simulate", "Monte Carlo estimator comparison");
  std::string config_path, estimators = "did,sdid", sim_out = "simulate";
  int n_reps = 100;
  sim->add_option("--config", config_path, "key=value DGP config")->required();
  sim->add_option("--reps", n_reps, "replications");
  sim->add_option("--estimators", estimators, "did,sdid subset");
  sim->add_option("--out", sim_out, "output prefix");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (*ingest) return run_ingest(micro_path, deflator_path, outcome, ingest_out);
    if (*exposure) return run_exposure(tasks_path, exposure_out);
    if (*did) {
      if (did_exposure_path.empty() && treatment_path.empty())
        throw sdidkit::ValidationError(
            "did requires --treatment or --exposure");
      return run_did(panel_path, treatment_path, onset_s, unweighted,
                     did_exposure_path, did_exposure_col, did_out);
    }
    if (*es)
      return run_event_study(panel_path, treatment_path, onset_s, unweighted,
                             es_out);
    if (*sdid)
      return run_sdid(panel_path, treatment_path, onset_s, n_boot, seed,
                      threads, sdid_out);
    if (*sim) return run_simulate(config_path, n_reps, estimators, threads,
                                  sim_out);
  } catch (const sdidkit::ValidationError &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const sdidkit::EstimationError &e) {
    std::cerr << "estimation error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
