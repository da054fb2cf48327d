#include <CLI11.hpp>

#include <iostream>

#include "ergokit/harness/runner.hpp"

using namespace ergokit;
using namespace ergokit::harness;

int main(int argc, char** argv) {
  CLI::App app{"ergokit: Lyapunov exponents, local entropy and unstable-set dimension experiments"};
  app.set_version_flag("--version", std::string(ERGOKIT_VERSION));
  app.require_subcommand(1);

  std::string configPath, outDir = ".", formats = "json";
  std::optional<std::uint64_t> seed;
  int threads = 1;
  for (const auto& task : task_names()) {
    auto* sub = app.add_subcommand(task, "run the " + task + " task");
    sub->add_option("--config", configPath, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "override the config seed");
    sub->add_option("--out", outDir, "output directory")->capture_default_str();
    sub->add_option("--format", formats, "comma-separated: json,csv")->capture_default_str();
    sub->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber)->capture_default_str();
  }
  CLI11_PARSE(app, argc, argv);
  const std::string task = app.get_subcommands().front()->get_name();

  bool json = false, csv = false;
  for (const auto& f : CLI::detail::split(formats, ',')) {
    if (f == "json") json = true;
    else if (f == "csv") csv = true;
    else {
      std::cerr << "unknown format '" << f << "' (expected json, csv)\n";
      return 1;
    }
  }

  Report rep;
  try {
    rep = run_experiment(parse_config(load_json(configPath), task, seed), threads);
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    return 1;
  }
  try {
    for (const auto& p : emit_report(rep, outDir, json, csv)) std::cout << p.string() << "\n";
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    return 1;
  }
  std::cerr << task << ": " << to_string(rep.status);
  for (const auto& f : rep.flags) std::cerr << " [" << f << "]";
  if (rep.status == Status::Failed) std::cerr << " " << rep.errorMessage;
  std::cerr << "\n";
  return exit_code(rep.status);
}
