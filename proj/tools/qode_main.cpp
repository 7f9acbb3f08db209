#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "qode/scenario.hpp"
#include "qode/serialize.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace {

constexpr int kOk = 0;
constexpr int kUsage = 2;
constexpr int kNumerical = 3;

void emit_error(const std::string& kind, const std::string& message) {
  nlohmann::json err;
  err["error"] = message;
  err["kind"] = kind;
  std::cerr << err.dump() << "\n";
}

qode::RunConfig load_config(const std::string& path, long seed_override,
                            const std::string& out_override) {
  nlohmann::json doc = nlohmann::json::parse(qode::read_text_file(path));
  if (seed_override >= 0) doc["seed"] = static_cast<unsigned>(seed_override);
  if (!out_override.empty()) doc["out"] = out_override;
  return qode::parse_config(doc);
}

std::vector<double> parse_ladder(const std::string& text) {
  std::vector<double> out;
  std::istringstream in(text);
  std::string cell;
  while (std::getline(in, cell, ','))
    if (!cell.empty()) out.push_back(std::stod(cell));
  return out;
}

std::string out_path(const qode::RunConfig& cfg, const std::string& name) {
  std::filesystem::create_directories(cfg.out_dir);
  return (std::filesystem::path(cfg.out_dir) / name).string();
}

int cmd_train(const qode::RunConfig& cfg) {
  const qode::TrainResult res = qode::run_training(cfg);
  qode::write_theta(res.theta, out_path(cfg, "theta.json"));
  qode::write_text_file(out_path(cfg, "train_report.json"),
                        res.report.dump(2) + "\n");
  std::cout << res.report.dump() << "\n";
  return kOk;
}

int cmd_diagnose(const qode::RunConfig& cfg) {
  const nlohmann::json report = qode::run_diagnostics(cfg);
  qode::write_text_file(out_path(cfg, "diagnostics.json"),
                        report.dump(2) + "\n");
  std::cout << report.dump() << "\n";
  return kOk;
}

int cmd_eval(const qode::RunConfig& cfg, const std::string& theta_nom_path,
             const std::string& theta_rob_path, const std::string& tau_text,
             const std::string& eps_text, int trials) {
  const std::vector<double> taus = parse_ladder(tau_text);
  const std::vector<double> epss = parse_ladder(eps_text);
  if (taus.empty() && epss.empty()) {
    emit_error("config", "eval requires --tau and/or --eps ladders");
    return kUsage;
  }
  const qode::ThetaVector nom = qode::read_theta(theta_nom_path);
  const qode::ThetaVector rob = theta_rob_path.empty()
                                    ? nom
                                    : qode::read_theta(theta_rob_path);
  const qode::EvalResult res =
      qode::run_eval(cfg, nom, rob, taus, epss, trials);
  qode::write_results_csv(out_path(cfg, "tau_costs.csv"),
                          {"tau_hours", "terminal_kind", "total_cost"},
                          res.tau_table, cfg.raw);
  qode::write_results_csv(out_path(cfg, "cost_to_go.csv"),
                          {"t", "J_star", "J_theta"}, res.cost_to_go,
                          cfg.raw);
  qode::write_results_csv(out_path(cfg, "power.csv"),
                          {"t", "z_sigma", "load"}, res.power, cfg.raw);
  qode::write_results_csv(out_path(cfg, "eps_nom.csv"),
                          {"eps", "mean", "stderr"}, res.eps_table_nom,
                          cfg.raw);
  qode::write_results_csv(out_path(cfg, "eps_rob.csv"),
                          {"eps", "mean", "stderr"}, res.eps_table_rob,
                          cfg.raw);
  return kOk;
}

int cmd_plot(const std::string& results_dir, const std::string& out_dir) {
  namespace fs = std::filesystem;
  const std::string target = out_dir.empty() ? results_dir : out_dir;
  fs::create_directories(target);

  struct Figure {
    const char* csv;
    const char* svg;
    const char* title;
    std::vector<std::pair<const char*, int>> series;  // name, column
  };
  const std::vector<Figure> figures = {
      {"cost_to_go.csv", "cost_to_go.svg", "Cost-to-go tracking",
       {{"J_star", 1}, {"J_theta", 2}}},
      {"tau_costs.csv", "tau_costs.svg", "Total cost vs look-ahead",
       {{"total_cost", 2}}},
      {"power.csv", "power.svg", "Power deviation",
       {{"z_sigma", 1}, {"load", 2}}},
      {"eps_nom.csv", "eps_nom.svg", "Mean cost vs eps (nominal)",
       {{"mean", 1}}},
      {"eps_rob.csv", "eps_rob.svg", "Mean cost vs eps (robust)",
       {{"mean", 1}}},
  };

  bool any = false;
  for (const auto& fig : figures) {
    const fs::path csv = fs::path(results_dir) / fig.csv;
    if (!fs::exists(csv)) continue;
    any = true;
    const auto rows = qode::read_results_csv(csv.string());
    std::vector<double> x;
    std::vector<std::pair<std::string, std::vector<double>>> series;
    for (const auto& s : fig.series) series.emplace_back(s.first,
                                                         std::vector<double>{});
    for (const auto& row : rows) {
      x.push_back(row.at(0));
      for (std::size_t i = 0; i < fig.series.size(); ++i)
        series[i].second.push_back(row.at(fig.series[i].second));
    }
    qode::write_text_file((fs::path(target) / fig.svg).string(),
                          qode::svg_line_plot(x, series, fig.title));
  }
  if (!any) {
    emit_error("config", "no results CSV found in " + results_dir);
    return kUsage;
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Continuous-time Q-learning trainer and evaluation tool"};
  app.require_subcommand(1);

  std::string config_path, out_override, theta_nom, theta_rob, results_dir;
  std::string tau_text, eps_text;
  long seed_override = -1;
  int jobs = 0, trials = 50;

  auto add_common = [&](CLI::App* sub, bool needs_config) {
    if (needs_config)
      sub->add_option("--config", config_path, "run configuration (JSON)")
          ->required();
    sub->add_option("--seed", seed_override, "seed override")
        ->envname("QODE_SEED");
    sub->add_option("--out", out_override, "output directory override")
        ->envname("QODE_OUT");
    sub->add_option("--jobs", jobs, "worker threads")->envname("QODE_JOBS");
  };

  CLI::App* train = app.add_subcommand("train", "train a value function");
  add_common(train, true);
  CLI::App* diagnose =
      app.add_subcommand("diagnose", "exploration diagnostics on a batch");
  add_common(diagnose, true);
  CLI::App* eval = app.add_subcommand("eval", "evaluate trained policies");
  add_common(eval, true);
  eval->add_option("--theta-nom", theta_nom, "nominal checkpoint")->required();
  eval->add_option("--theta-rob", theta_rob, "robust checkpoint");
  eval->add_option("--tau", tau_text, "look-ahead ladder, hours (csv)");
  eval->add_option("--eps", eps_text, "perturbation ladder (csv)");
  eval->add_option("--trials", trials, "trials per ladder point");
  CLI::App* plot = app.add_subcommand("plot", "emit SVG figures from results");
  plot->add_option("--results", results_dir, "results directory")->required();
  plot->add_option("--out", out_override, "output directory override")
      ->envname("QODE_OUT");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

#ifdef _OPENMP
  if (jobs > 0) omp_set_num_threads(jobs);
#endif

  try {
    if (plot->parsed()) return cmd_plot(results_dir, out_override);
    const qode::RunConfig cfg =
        load_config(config_path, seed_override, out_override);
    if (train->parsed()) return cmd_train(cfg);
    if (diagnose->parsed()) return cmd_diagnose(cfg);
    if (eval->parsed())
      return cmd_eval(cfg, theta_nom, theta_rob, tau_text, eps_text, trials);
  } catch (const qode::ConfigError& e) {
    emit_error("config", e.what());
    return kUsage;
  } catch (const nlohmann::json::exception& e) {
    emit_error("config", e.what());
    return kUsage;
  } catch (const std::exception& e) {
    emit_error("numerical", e.what());
    return kNumerical;
  }
  return kUsage;
}
