// hardyheat command line: experiment runner over the C library interface.
#include <CLI11.hpp>
#include <cstdio>
#include <string>

#include "hardyheat.h"

int main(int argc, char** argv) {
  CLI::App app{"hardyheat: ground states, functional inequalities and heat-kernel "
               "certificates for Hardy-type Schrodinger operators"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  long long seed = -1;
  int jobs = 1;
  bool dry_run = false, dump_matrices = false;

  CLI::App* run = app.add_subcommand("run", "run an experiment config");
  run->add_option("config", config_path, "experiment config (JSON)")->required();
  run->add_option("--out", out_dir, "output directory (overrides the config)");
  run->add_option("--seed", seed, "random seed (overrides the config)");
  run->add_option("--jobs", jobs, "task-level parallelism");
  run->add_flag("--dry-run", dry_run, "validate the config and exit");
  run->add_flag("--dump-matrices", dump_matrices, "write assembled matrices in "
                                                  "coordinate text format");

  std::string report_a, report_b;
  double rel_tol = 1e-9;
  CLI::App* compare = app.add_subcommand("compare", "compare two report files");
  compare->add_option("a", report_a, "first report.json")->required();
  compare->add_option("b", report_b, "second report.json")->required();
  compare->add_option("--rel-tol", rel_tol, "relative tolerance for numeric fields");

  CLI::App* catalog = app.add_subcommand("catalog", "list potentials with predicted exponents");

  CLI11_PARSE(app, argc, argv);

  if (run->parsed()) {
    hh_run_options opts{};
    opts.out_dir = out_dir.empty() ? nullptr : out_dir.c_str();
    opts.seed = seed;
    opts.jobs = jobs;
    opts.dry_run = dry_run ? 1 : 0;
    opts.dump_matrices = dump_matrices ? 1 : 0;
    int exit_code = 0;
    hh_status st = hh_run(config_path.c_str(), &opts, &exit_code);
    if (st != HH_OK) {
      std::fprintf(stderr, "error (%s): %s\n", hh_status_name(st), hh_last_error());
      return 1;
    }
    if (dry_run) {
      std::printf("config ok: %s\n", config_path.c_str());
      return 0;
    }
    std::printf("run finished with status %d\n", exit_code);
    return exit_code;
  }

  if (compare->parsed()) {
    hh_report *a = nullptr, *b = nullptr;
    hh_status st = hh_report_open(report_a.c_str(), &a);
    if (st == HH_OK) st = hh_report_open(report_b.c_str(), &b);
    int within = 0;
    char* diff = nullptr;
    if (st == HH_OK) st = hh_report_compare(a, b, rel_tol, &within, &diff);
    hh_report_close(a);
    hh_report_close(b);
    if (st != HH_OK) {
      std::fprintf(stderr, "error (%s): %s\n", hh_status_name(st), hh_last_error());
      return 1;
    }
    if (!within) std::printf("%s\n", diff ? diff : "{}");
    hh_string_free(diff);
    std::printf(within ? "reports agree to %.3g\n" : "reports differ\n", rel_tol);
    return within ? 0 : 1;
  }

  if (catalog->parsed()) {
    char* json = nullptr;
    hh_status st = hh_catalog_json(&json);
    if (st != HH_OK) {
      std::fprintf(stderr, "error (%s): %s\n", hh_status_name(st), hh_last_error());
      return 1;
    }
    std::printf("%s\n", json);
    hh_string_free(json);
    return 0;
  }
  return 0;
}
