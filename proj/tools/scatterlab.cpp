#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "scatterlab/lab/commands.hpp"

namespace {

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.push_back(std::stod(item));
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace scatterlab::lab;
  CLI::App app{"scatterlab: identification operators and scattering on weighted graphs"};
  app.require_subcommand(1);

  CommandOptions opts;
  std::string s_values;
  std::string out_dir;
  std::string run_dir;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opts.config, "Scenario config (JSON)")->required();
    sub->add_option("--out", out_dir, "Output directory (SCATTERLAB_OUT overrides)");
    sub->add_option("--jobs", opts.jobs, "Scenario worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--seed", opts.seed, "Seed for randomized invariant checks");
  };

  auto* validate = app.add_subcommand("validate", "Parse the config and validate level-0 graphs");
  add_common(validate);
  auto* criteria = app.add_subcommand("criteria", "Evaluate the equivalence criteria");
  add_common(criteria);
  criteria->add_option("--s-values", s_values, "Comma-separated heat times in (0,1)");
  auto* scatter = app.add_subcommand("scatter", "Simulate wave packets and test equivalence");
  add_common(scatter);
  scatter->add_flag("--both-signs", opts.both_signs, "Also run t -> -infinity");
  auto* report = app.add_subcommand("report", "Summarize a completed run directory");
  report->add_option("run_dir", run_dir, "Run directory");
  report->add_option("--out", out_dir, "Run directory (alternative to the positional)");

  CLI11_PARSE(app, argc, argv);

  if (!out_dir.empty()) opts.out = out_dir;
  if (!s_values.empty()) {
    try {
      opts.s_values = parse_list(s_values);
    } catch (const std::exception&) {
      std::cerr << "--s-values: expected a comma-separated list of numbers\n";
      return kExitValidation;
    }
    for (double s : *opts.s_values) {
      if (!(s > 0.0 && s < 1.0)) {
        std::cerr << "--s-values: every s must lie in (0, 1)\n";
        return kExitValidation;
      }
    }
  }

  try {
    if (*validate) return cmd_validate(opts, std::cout, std::cerr);
    if (*criteria) return cmd_criteria(opts, std::cout, std::cerr);
    if (*scatter) return cmd_scatter(opts, std::cout, std::cerr);
    if (*report) {
      std::filesystem::path dir = !run_dir.empty() ? run_dir : out_dir;
      if (const char* env = std::getenv("SCATTERLAB_OUT"); env && *env) dir = env;
      if (dir.empty()) {
        std::cerr << "report: no run directory given\n";
        return kExitValidation;
      }
      return cmd_report(dir, std::cout, std::cerr);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}
