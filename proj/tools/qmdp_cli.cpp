#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <string>

#include "qmdp/experiment.hpp"

namespace {

struct Options {
  std::string config_path;
  std::string out_dir = "out";
  long seed = -1;
  int jobs = 0;
};

int run(const std::string& command, const Options& opts) {
  qmdp::ExperimentConfig cfg =
      opts.config_path.empty()
          ? qmdp::ExperimentConfig::parse(nlohmann::json::object())
          : qmdp::ExperimentConfig::load(opts.config_path);
  if (opts.seed >= 0) cfg.seed = static_cast<std::uint64_t>(opts.seed);
  if (opts.jobs > 0) cfg.jobs = opts.jobs;

  static const std::map<std::string,
                        void (*)(const qmdp::ExperimentConfig&,
                                 const std::filesystem::path&)>
      commands = {{"design", qmdp::cmd_design},   {"solve", qmdp::cmd_solve},
                  {"learn", qmdp::cmd_learn},     {"sweep", qmdp::cmd_sweep},
                  {"compare", qmdp::cmd_compare}, {"verify", qmdp::cmd_verify}};
  commands.at(command)(cfg, opts.out_dir);
  std::cout << command << ": wrote results to " << opts.out_dir << "\n";
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Finite-model approximation experiments for continuous-state MDPs"};
  app.require_subcommand(1);

  Options opts;
  std::string command;
  for (const char* name :
       {"design", "solve", "learn", "sweep", "compare", "verify"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", opts.config_path, "JSON experiment config");
    sub->add_option("--out", opts.out_dir, "output directory");
    sub->add_option("--seed", opts.seed, "override the config seed");
    sub->add_option("--jobs", opts.jobs, "override the config job count");
    sub->callback([&command, name]() { command = name; });
  }

  CLI11_PARSE(app, argc, argv);

  try {
    return run(command, opts);
  } catch (const qmdp::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const qmdp::ConvergenceError& e) {
    std::cerr << "convergence error: " << e.what()
              << " (last residual " << e.last_residual << ")\n";
    return 3;
  } catch (const qmdp::OracleError& e) {
    std::cerr << "oracle unstable: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
