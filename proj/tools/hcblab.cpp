// Command-line front end for the experiment runner.

#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hcb/experiment.hpp"

namespace ex = hcb::experiment;

namespace {

struct Overrides {
  std::string config;
  std::string output;
  int workers = 0;
  std::vector<std::uint64_t> seeds;
  bool print_config = false;
};

ex::Config resolve(const std::string& kind, const Overrides& o) {
  ex::json doc = ex::json::object();
  if (!o.config.empty()) doc = ex::json::parse(hcb::io::read_file(o.config));
  if (!doc.contains("schema_version")) doc["schema_version"] = ex::kSchemaVersion;
  if (!kind.empty()) {
    if (doc.contains("kind") && doc["kind"] != kind)
      throw ex::ConfigError("config kind '" + doc["kind"].get<std::string>() + "' does not match subcommand '" +
                            kind + "'");
    doc["kind"] = kind;
  }
  ex::Config c = ex::parse_config(doc);
  if (!o.output.empty()) c.output = o.output;
  if (o.workers > 0) c.workers = o.workers;
  if (!o.seeds.empty()) c.seeds = o.seeds;
  return c;
}

void add_common(CLI::App* sub, Overrides& o, bool config_required) {
  auto* opt = sub->add_option("-c,--config", o.config, "experiment config (JSON, schema version 1)");
  opt->check(CLI::ExistingFile);
  if (config_required) opt->required();
  sub->add_option("-o,--output", o.output, "output directory (overrides output.directory)");
  sub->add_option("-j,--workers", o.workers, "worker threads (overrides workers)")->check(CLI::PositiveNumber);
  sub->add_option("-s,--seed", o.seeds, "disorder seed; repeat to give several (replaces seeds)");
  sub->add_flag("--print-config", o.print_config, "print the resolved config and exit");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hcblab: hard-core boson lattice experiments"};
  app.require_subcommand(1);
  Overrides o;
  std::string chosen;

  auto* run = app.add_subcommand("run", "run the experiment named by the config's kind");
  add_common(run, o, true);
  run->callback([&] { chosen = "run"; });
  for (const std::string& kind : ex::experiment_kinds()) {
    auto* sub = app.add_subcommand(kind, "run a " + kind + " experiment (config optional)");
    add_common(sub, o, false);
    sub->callback([&, kind] { chosen = kind; });
  }

  CLI11_PARSE(app, argc, argv);
  try {
    const ex::Config c = resolve(chosen == "run" ? "" : chosen, o);
    if (o.print_config) {
      std::cout << ex::to_json(c).dump(2) << "\n";
      return 0;
    }
    const ex::RunManifest m = ex::run(c);
    for (const auto& w : m.warnings) std::cerr << "warning: " << w << "\n";
    for (const auto& s : m.stages) std::cerr << s.name << ": " << s.seconds << " s\n";
    for (const auto& f : m.outputs) std::cout << f.sha256 << "  " << c.output << "/" << f.path << "\n";
  } catch (const hcb::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
