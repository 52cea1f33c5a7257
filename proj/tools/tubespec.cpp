#include <cstdlib>
#include <iostream>
#include <string>
#include <thread>

#include "CLI11.hpp"
#include "tubespec/error.hpp"
#include "tubespec/parallel.hpp"
#include "tubespec/pipeline.hpp"

using namespace tubespec;

int main(int argc, char** argv) {
  CLI::App app{"Eigenvalue asymptotics on a half-disk with a thin attached tube"};
  app.footer(config_reference());
  app.require_subcommand(1, 1);

  std::string config_path;
  std::string out_dir;
  int threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));

  const char* names[] = {"mesh", "eig", "frequency", "mk", "sweep", "verify"};
  const char* about[] = {"write meshes and manifest.json",
                         "perturbed and unperturbed spectra, branch.csv and field files",
                         "Almgren frequency profiles, frequency.csv and order.csv",
                         "exterior profiles, mk.csv and mk_summary.json",
                         "eps sweep and rate fit, sweep.csv and sweep_summary.json",
                         "run every acceptance criterion, verdict.json"};
  for (int i = 0; i < 6; ++i) {
    auto* sub = app.add_subcommand(names[i], about[i]);
    sub->add_option("--config", config_path, "INI config file")->required()->check(CLI::ExistingFile);
    sub->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--out", out_dir, "output directory (overrides OUTPUT_DIR and [output] directory)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    set_num_threads(threads);
    RunConfig cfg = load_config(config_path);
    std::string out = cfg.output_dir;
    if (const char* env = std::getenv("OUTPUT_DIR"); env && *env) out = env;
    if (!out_dir.empty()) out = out_dir;

    const std::string cmd = app.get_subcommands().front()->get_name();
    if (cmd == "mesh") cmd_mesh(cfg, out);
    else if (cmd == "eig") cmd_eig(cfg, out);
    else if (cmd == "frequency") cmd_frequency(cfg, out);
    else if (cmd == "mk") cmd_mk(cfg, out);
    else if (cmd == "sweep") cmd_sweep(cfg, out);
    else {
      const int rc = cmd_verify(cfg, out);
      if (rc) std::cerr << "acceptance failure, see " << out << "/verdict.json\n";
      return rc;
    }
  } catch (const Error& e) {
    std::cerr << "error (" << to_string(e.kind()) << "): " << e.what() << '\n';
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
