#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "locprune/locprune.h"

namespace {

struct Command {
  explicit Command(CLI::App* a) : app(a) {}
  CLI::App* app;
  std::string config_file;
  std::map<std::string, std::string> values;
  std::map<std::string, std::string> forced;
};

std::string flag_name(const char* key) {
  std::string name = key;
  for (auto& ch : name) {
    if (ch == '_') ch = '-';
  }
  return "--" + name;
}

void add_key_options(Command& cmd) {
  cmd.app->add_option("--config", cmd.config_file, "key=value configuration file");
  for (std::size_t i = 0; i < lp_config_key_count(); ++i) {
    const char* key = lp_config_key_name(i);
    std::string help = std::string(lp_config_key_help(i)) + " (default: " + lp_config_key_default(i) + ")";
    cmd.app->add_option(flag_name(key), cmd.values[key], help);
  }
}

int report(lp_status status) {
  if (status != LP_OK) std::fprintf(stderr, "locprune: %s\n", lp_last_error());
  return static_cast<int>(status);
}

int run(Command& cmd, lp_status (*action)(const lp_config*)) {
  lp_config* cfg = nullptr;
  if (auto st = lp_config_new(&cfg); st != LP_OK) return report(st);
  lp_status st = LP_OK;
  if (!cmd.config_file.empty()) st = lp_config_load_file(cfg, cmd.config_file.c_str());
  for (const auto& [key, value] : cmd.values) {
    if (st != LP_OK) break;
    if (cmd.app->count(flag_name(key.c_str())) == 0) continue;
    st = lp_config_set(cfg, key.c_str(), value.c_str());
  }
  for (const auto& [key, value] : cmd.forced) {
    if (st != LP_OK) break;
    st = lp_config_set(cfg, key.c_str(), value.c_str());
  }
  if (st == LP_OK) st = action(cfg);
  lp_config_free(cfg);
  return report(st);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Change point detection by candidate generation and localised pruning"};
  app.require_subcommand(1);
  app.set_version_flag("--version", lp_version());

  Command detect(app.add_subcommand("detect", "Detect change points in a series file"));
  Command simulate(app.add_subcommand("simulate", "Run a simulation study"));
  Command bench(app.add_subcommand("bench", "Time candidate generation and pruning"));
  Command generate(app.add_subcommand("generate", "Write one simulated series"));
  std::string input;
  detect.app->add_option("input_file", input, "Series file, one value per line or CSV")->required();
  for (auto* cmd : {&detect, &simulate, &bench, &generate}) add_key_options(*cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return LP_ERR_CONFIG;
  }

  if (*detect.app) {
    // Positional input wins over an "input" key from the config file.
    detect.forced["input"] = input;
    return run(detect, lp_detect_files);
  }
  if (*simulate.app) return run(simulate, lp_simulate);
  if (*bench.app) return run(bench, lp_bench);
  return run(generate, lp_generate);
}
