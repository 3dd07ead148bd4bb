// Command-line front end: dataset generation, staged training, sampling,
// exact analytics, and evaluation, all reproducible under a seed.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "ising/dataset.hpp"
#include "ising/eval.hpp"
#include "ising/flow.hpp"
#include "ising/montecarlo.hpp"
#include "ising/onsager.hpp"

namespace fs = std::filesystem;
using namespace ising;

namespace {

struct CommonOpts {
  std::uint64_t seed = 1;
  int threads = static_cast<int>(std::thread::hardware_concurrency());
  bool force = false;
};

void print_resolved_config(const CLI::App& cmd) {
  std::cout << "# resolved config [" << cmd.get_name() << "]\n";
  for (const CLI::Option* opt : cmd.get_options()) {
    if (opt->get_lnames().empty()) continue;
    const std::string name = opt->get_lnames().front();
    if (name.empty() || name == "help" || name == "config") continue;
    std::string value = opt->count() ? opt->results().at(0) : opt->get_default_str();
    if (opt->get_expected_min() == 0) value = opt->count() ? "true" : "false";
    std::cout << "#   " << name << " = " << value << "\n";
  }
}

// Refuses to clobber a completed output tree unless --force was given.
void prepare_output_dir(const fs::path& dir, const char* marker, bool force) {
  if (fs::exists(dir / marker)) {
    if (!force)
      throw std::runtime_error("output " + dir.string() + " already contains " + marker +
                               "; pass --force to overwrite");
    fs::remove_all(dir);
  }
  fs::create_directories(dir);
}

std::vector<SpinGrid> equilibrated_starts(int n, double beta0, int count,
                                          const EquilibrationConfig& cfg,
                                          std::uint64_t seed) {
  const CouplingParams cp{};
  RngStream base(seed, 0x517A);
  std::vector<SpinGrid> starts;
  starts.reserve(static_cast<std::size_t>(count));
  for (int t = 0; t < count; ++t) {
    RngStream rng = base.substream(static_cast<std::uint64_t>(t));
    SpinGrid g = make_random_grid(n, rng);
    equilibrate(g, beta0, cfg, cp, rng);
    starts.push_back(std::move(g));
  }
  return starts;
}

int run_gen_data(const fs::path& out, DatasetManifest manifest, EquilibrationConfig cfg,
                 const CommonOpts& common) {
  prepare_output_dir(out, "manifest.json", common.force);
  const BuildSummary summary = build_dataset(out, manifest, cfg, common.threads);
  std::cout << "dataset written to " << out.string() << "\n"
            << "equilibrations: " << summary.equilibrations
            << ", non-converged: " << summary.non_converged << "\n";
  if (summary.non_converged > 0) {
    std::cerr << "warning: " << summary.non_converged
              << " equilibrations hit the step cap\n";
    return 1;
  }
  return 0;
}

int run_train(const fs::path& data_dir, const fs::path& out, const std::string& stage,
              flow::FlowHyper hyper, bool force) {
  const Dataset data = load_dataset(data_dir);
  const std::string fingerprint = file_fingerprint(data_dir / "manifest.json");

  std::map<std::string, double> losses;
  flow::ModelBundle bundle;
  const bool fresh = stage == "encoder" || stage == "all";
  if (fresh) {
    if (fs::exists(out / "bundle.json") && !force)
      throw std::runtime_error("model dir " + out.string() +
                               " already holds a bundle; pass --force to overwrite");
    fs::remove_all(out);
    bundle = flow::make_bundle(data.manifest.n, hyper);
  } else {
    if (!fs::exists(out / "bundle.json"))
      throw std::runtime_error("train --stage " + stage + ": encoder required (no bundle at " +
                               out.string() + "; train the encoder stage first)");
    bundle = flow::load_bundle(out);
    if (!bundle.has_encoder())
      throw std::runtime_error("train --stage " + stage + ": encoder required");
    std::ifstream side(out / "bundle.json");
    auto j = nlohmann::ordered_json::parse(side);
    for (auto& [k, v] : j.at("final_losses").items()) losses[k] = v.get<double>();
  }

  auto run_stage = [&](const std::string& name) {
    flow::TrainStats stats;
    if (name == "encoder") stats = flow::train_encoder(bundle, data);
    else if (name == "field") stats = flow::train_field(bundle, data);
    else if (name == "projector") stats = flow::train_projector(bundle, data);
    else throw std::runtime_error("unknown training stage: " + name);
    losses[name] = stats.final_loss;
    std::cout << "stage " << name << ": " << stats.loss_history.size()
              << " epochs, final loss " << stats.final_loss << "\n";
  };

  if (stage == "all") {
    run_stage("encoder");
    run_stage("field");
    run_stage("projector");
  } else {
    run_stage(stage);
  }
  flow::save_bundle(bundle, out, fingerprint, losses);
  std::cout << "model bundle written to " << out.string() << "\n";
  return 0;
}

int run_sample(const fs::path& data_dir, const fs::path& model_dir, const fs::path& out,
               const std::string& decoder, int n_pred, EquilibrationConfig cfg,
               const CommonOpts& common) {
  const DatasetManifest gt = load_manifest(data_dir);
  const CoolingSchedule schedule = make_schedule(gt.t_max, gt.t_min, gt.d);
  prepare_output_dir(out, "manifest.json", common.force);

  const std::vector<SpinGrid> starts =
      equilibrated_starts(gt.n, schedule.betas.front(), n_pred, cfg, common.seed);

  std::vector<Trajectory> predicted;
  if (decoder == "mc15") {
    RngStream base(common.seed, 0xBA5E);
    for (int t = 0; t < n_pred; ++t) {
      RngStream rng = base.substream(static_cast<std::uint64_t>(t));
      predicted.push_back(eval::baseline_mc15(starts[static_cast<std::size_t>(t)],
                                              schedule, 15, rng));
    }
  } else {
    const flow::Decoder dec = flow::decoder_from_string(decoder);
    const flow::ModelBundle bundle = flow::load_bundle(model_dir);
    if (bundle.n != gt.n)
      throw std::runtime_error("sample: bundle lattice size does not match dataset");
    RngStream rng(common.seed, 0xF10B);
    predicted = flow::generate_trajectories(bundle, starts, schedule, dec, rng);
  }

  DatasetManifest pm = gt;
  pm.k = 0;
  pm.n_traj = n_pred;
  pm.seed = common.seed;
  write_trajectory_tree(out, pm, predicted);
  std::cout << "predicted trajectories (" << decoder << ") written to " << out.string()
            << "\n";
  return 0;
}

int run_onsager(double t_min, double t_max, int points, int p, const fs::path& out) {
  if (points < 1 || !(t_min > 0.0) || t_max < t_min)
    throw std::runtime_error("onsager: need t_max >= t_min > 0 and points >= 1");
  std::ostringstream csv;
  csv << "T,u_exact,f_integral,f_finite,f_singular\n";
  char buf[160];
  for (int i = 0; i < points; ++i) {
    const double t = points == 1 ? t_min
                                 : t_min + (t_max - t_min) * static_cast<double>(i) /
                                               (points - 1);
    const double beta = 1.0 / t;
    const AnisotropicCouplings c{beta, beta};
    std::snprintf(buf, sizeof buf, "%.10g,%.10g,%.10g,%.10g,%.10g\n", t,
                  internal_energy_exact(beta), free_energy_integral(c, t),
                  free_energy_finite(c, t, p), singular_free_energy(c, t));
    csv << buf;
  }
  if (out.empty()) {
    std::cout << csv.str();
  } else {
    std::ofstream f(out, std::ios::trunc);
    if (!f) throw std::runtime_error("onsager: cannot open " + out.string());
    f << csv.str();
    std::cout << "analytics written to " << out.string() << "\n";
  }
  return 0;
}

int run_evaluate(const fs::path& gt_dir, const std::vector<fs::path>& pred_dirs,
                 const fs::path& out, bool timing, const fs::path& model_dir,
                 const std::string& decoder, int reps, std::uint64_t seed) {
  const Dataset gt = load_dataset(gt_dir);
  const std::vector<ObservableRecord> gt_obs = dataset_observables(gt);
  const eval::TcEstimate gt_tc = eval::estimate_tc(gt_obs);
  if (gt_tc.has_peak)
    std::cout << "ground-truth chi peak: T_c = " << gt_tc.t_c << " +/- "
              << gt_tc.uncertainty << "\n";
  else
    std::cout << "ground-truth chi curve has no interior peak\n";

  std::vector<eval::MethodReport> rows;
  eval::TimingResult gt_time{};
  if (timing) {
    gt_time = eval::time_gt_trajectory(gt.manifest.n, gt.schedule, EquilibrationConfig{},
                                       seed, reps);
    eval::MethodReport gt_row;
    gt_row.method = "gt";
    gt_row.n = gt.manifest.n;
    gt_row.de.mean = gt_row.de.stdev = std::numeric_limits<double>::quiet_NaN();
    gt_row.dm = gt_row.dcv = gt_row.dchi = gt_row.de;
    gt_row.time_mean = gt_time.mean_s;
    gt_row.time_std = gt_time.std_s;
    rows.push_back(gt_row);
  }

  for (const fs::path& pd : pred_dirs) {
    const Dataset pred = load_dataset(pd);
    eval::MethodReport row = eval::compare_observables(
        pd.filename().string(), dataset_observables(pred), gt_obs);
    row.n = gt.manifest.n;
    const eval::TcEstimate tc = eval::estimate_tc(dataset_observables(pred));
    if (tc.has_peak)
      std::cout << row.method << " chi peak: T_c = " << tc.t_c << " +/- "
                << tc.uncertainty << "\n";
    rows.push_back(row);
  }

  if (timing && !model_dir.empty() && decoder != "mc15") {
    const flow::ModelBundle bundle = flow::load_bundle(model_dir);
    const std::vector<SpinGrid> starts = equilibrated_starts(
        gt.manifest.n, gt.schedule.betas.front(), reps, EquilibrationConfig{}, seed);
    const eval::TimingResult ft = eval::time_flow_trajectories(
        bundle, gt.schedule, starts, flow::decoder_from_string(decoder), seed, reps);
    eval::MethodReport row;
    row.method = decoder + "-timing";
    row.n = gt.manifest.n;
    row.de.mean = row.de.stdev = std::numeric_limits<double>::quiet_NaN();
    row.dm = row.dcv = row.dchi = row.de;
    row.time_mean = ft.mean_s;
    row.time_std = ft.std_s;
    rows.push_back(row);
  }

  eval::print_report(rows);
  if (!out.empty()) {
    eval::write_report_csv(out, rows);
    std::cout << "report written to " << out.string() << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"2D Ising cooling trajectories: Monte Carlo data generation, exact "
               "analytics, latent flow training and evaluation"};
  app.require_subcommand(1);

  CommonOpts common;
  DatasetManifest manifest;
  EquilibrationConfig eq_cfg;
  flow::FlowHyper hyper;

  std::string stage = "all", decoder = "ptheta";
  fs::path out_path, data_dir, model_dir, report_path;
  std::vector<fs::path> pred_dirs;
  int n_pred = 8, onsager_points = 21, onsager_p = 64, reps = 5;
  double onsager_tmin = 1.0, onsager_tmax = 5.0;
  bool timing = false;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--seed", common.seed, "RNG seed")->capture_default_str();
    cmd->add_option("--threads", common.threads, "worker thread cap")
        ->capture_default_str();
    cmd->add_flag("--force", common.force, "overwrite existing outputs");
    cmd->set_config("--config", "", "key=value config file; flags take precedence");
  };

  CLI::App* gen = app.add_subcommand("gen-data", "generate an annealing dataset");
  gen->add_option("--out", out_path, "output dataset directory")->required();
  gen->add_option("--n", manifest.n, "lattice side length")->capture_default_str();
  gen->add_option("--t-max", manifest.t_max, "hottest temperature")->capture_default_str();
  gen->add_option("--t-min", manifest.t_min, "coldest temperature")->capture_default_str();
  gen->add_option("--d", manifest.d, "schedule steps (D)")->capture_default_str();
  gen->add_option("--k", manifest.k, "conditional samples per transition")
      ->capture_default_str();
  gen->add_option("--n-traj", manifest.n_traj, "trajectories (0 = default by size)")
      ->capture_default_str();
  gen->add_option("--epsilon", eq_cfg.epsilon, "equilibration tolerance")
      ->capture_default_str();
  gen->add_option("--window", eq_cfg.window, "energy averaging window")
      ->capture_default_str();
  gen->add_option("--max-steps", eq_cfg.max_steps, "equilibration step cap")
      ->capture_default_str();
  add_common(gen);

  CLI::App* train = app.add_subcommand("train", "train pipeline stages");
  train->add_option("--data", data_dir, "dataset directory")->required();
  train->add_option("--out", out_path, "model bundle directory")->required();
  train->add_option("--stage", stage, "encoder|field|projector|all")
      ->check(CLI::IsMember({"encoder", "field", "projector", "all"}))
      ->capture_default_str();
  train->add_option("--latent-dim", hyper.latent_dim, "latent dim (0 = auto)")
      ->capture_default_str();
  train->add_option("--sigma", hyper.sigma, "KDE bandwidth")->capture_default_str();
  train->add_option("--lambda", hyper.lambda, "energy-consistency weight")
      ->capture_default_str();
  train->add_option("--lr", hyper.lr, "learning rate")->capture_default_str();
  train->add_option("--epochs", hyper.epochs, "training epochs")->capture_default_str();
  train->add_option("--batch", hyper.batch, "minibatch size")->capture_default_str();
  train->add_option("--field-hidden", hyper.field_hidden, "field hidden width")
      ->capture_default_str();
  add_common(train);

  CLI::App* sample = app.add_subcommand("sample", "generate predicted trajectories");
  sample->add_option("--data", data_dir, "reference dataset (schedule source)")->required();
  sample->add_option("--model", model_dir, "model bundle directory");
  sample->add_option("--out", out_path, "output directory")->required();
  sample->add_option("--decoder", decoder, "ptheta|mh10|mh15|mc15")
      ->check(CLI::IsMember({"ptheta", "mh10", "mh15", "mc15"}))
      ->capture_default_str();
  sample->add_option("--n-pred", n_pred, "trajectories to generate")->capture_default_str();
  add_common(sample);

  CLI::App* onsager = app.add_subcommand("onsager", "exact analytic curves as CSV");
  onsager->add_option("--t-min", onsager_tmin, "sweep start")->capture_default_str();
  onsager->add_option("--t-max", onsager_tmax, "sweep end")->capture_default_str();
  onsager->add_option("--points", onsager_points, "sweep points")->capture_default_str();
  onsager->add_option("--p", onsager_p, "transfer-matrix half-row count")
      ->capture_default_str();
  onsager->add_option("--out", report_path, "CSV path (stdout when omitted)");
  add_common(onsager);

  CLI::App* evaluate = app.add_subcommand("evaluate", "compare predictions to ground truth");
  evaluate->add_option("--gt", data_dir, "ground-truth dataset directory")->required();
  evaluate->add_option("--pred", pred_dirs, "predicted trajectory directories");
  evaluate->add_option("--out", report_path, "report CSV path");
  evaluate->add_flag("--timing", timing, "measure per-trajectory generation time");
  evaluate->add_option("--model", model_dir, "bundle for timed generation");
  evaluate->add_option("--decoder", decoder, "decoder for timed generation")
      ->capture_default_str();
  evaluate->add_option("--reps", reps, "timing repetitions")->capture_default_str();
  add_common(evaluate);

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      print_resolved_config(*gen);
      return run_gen_data(out_path, manifest, eq_cfg, common);
    }
    if (train->parsed()) {
      print_resolved_config(*train);
      hyper.seed = common.seed;
      return run_train(data_dir, out_path, stage, hyper, common.force);
    }
    if (sample->parsed()) {
      print_resolved_config(*sample);
      if (decoder != "mc15" && model_dir.empty())
        throw std::runtime_error("sample: --model is required for decoder " + decoder);
      return run_sample(data_dir, model_dir, out_path, decoder, n_pred, eq_cfg, common);
    }
    if (onsager->parsed())
      return run_onsager(onsager_tmin, onsager_tmax, onsager_points, onsager_p,
                         report_path);
    if (evaluate->parsed())
      return run_evaluate(data_dir, pred_dirs, report_path, timing, model_dir, decoder,
                          reps, common.seed);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
