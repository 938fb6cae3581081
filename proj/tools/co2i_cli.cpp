#include <CLI11.hpp>

#include <iostream>

#include "co2i/run.hpp"
#include "co2i/scenario_io.hpp"

int main(int argc, char** argv) {
  CLI::App app{"CO2 intensities of multi-modal energy systems"};
  app.require_subcommand(1);

  co2i::RunOptions opt;
  std::string scenario, method = "both", out = "results";
  double tol = 0.0;
  auto* run = app.add_subcommand("run", "dispatch, then as-is and/or what-if intensities");
  auto* src = run->add_option("--scenario", scenario, "scenario file")->check(CLI::ExistingFile);
  auto* bi = run->add_option("--builtin", opt.builtin, "built-in system")
                 ->check(CLI::IsMember(co2i::builtin_names()));
  src->excludes(bi);
  bi->excludes(src);
  run->add_option("--method", method, "asis, whatif or both")
      ->check(CLI::IsMember({"asis", "whatif", "both"}));
  run->add_option("--out", out, "output directory");
  run->add_flag("--fd-check", opt.fd_check, "compare what-if values with forward differences");
  run->add_option("--fd-sample", opt.fd_sample, "check only N evenly spaced entries")
      ->check(CLI::NonNegativeNumber);
  auto* tol_opt = run->add_option("--tol", tol, "degeneracy tolerance [t/MWh]")->check(CLI::PositiveNumber);
  run->add_flag("--json-manifest", opt.json_manifest, "print the manifest to stdout");
  run->add_flag("--parallel", opt.parallel, "parallel what-if sweep");

  std::string export_dir = "scenarios";
  auto* exp = app.add_subcommand("export", "write the built-in systems as scenario files");
  exp->add_option("--dir", export_dir, "target directory");

  CLI11_PARSE(app, argc, argv);

  if (*exp) {
    std::filesystem::create_directories(export_dir);
    for (const auto& name : co2i::builtin_names()) {
      const auto path = std::filesystem::path(export_dir) / (name + ".scenario");
      co2i::save_scenario(co2i::make_builtin(name), path);
      std::cout << path.string() << "\n";
    }
    return 0;
  }

  if (scenario.empty() && opt.builtin.empty()) {
    std::cerr << "run: one of --scenario or --builtin is required\n";
    return 1;
  }
  if (!scenario.empty()) opt.scenario = scenario;
  opt.method = *co2i::parse_method(method);
  opt.out = out;
  if (*tol_opt) opt.tol = tol;
  return co2i::run(opt, std::cout, std::cerr);
}
