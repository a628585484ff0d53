// Command-line front end: one subcommand per experiment suite.
#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "alap/experiments.hpp"

namespace fs = std::filesystem;

namespace {

struct Flags {
  std::string config;
  std::string out;
  std::vector<std::uint64_t> seeds;
  std::vector<int> resolutions;
  std::vector<std::string> nf;
};

alap::ExperimentConfig build_config(const std::string& command, const Flags& f) {
  alap::ExperimentConfig cfg = alap::default_config(command);
  if (!f.config.empty()) alap::apply_json(cfg, alap::load_config_file(f.config));
  if (!f.out.empty()) cfg.out_dir = f.out;
  if (!f.seeds.empty()) cfg.seeds = f.seeds;
  if (!f.resolutions.empty()) cfg.resolutions = f.resolutions;
  if (!f.nf.empty()) {
    if (command == "theorem11" || (command == "maximal" && f.nf.size() >= 2)) {
      if (f.nf.size() % 2 != 0) {
        throw std::invalid_argument(command + ": --nf takes A,B pairs (give it an even number of times)");
      }
      cfg.pairs.clear();
      for (std::size_t i = 0; i < f.nf.size(); i += 2) cfg.pairs.push_back({f.nf[i], f.nf[i + 1]});
      if (command == "maximal") cfg.nfunctions = {f.nf.front()};
    } else {
      cfg.nfunctions = f.nf;
    }
  }
  cfg.validate();
  return cfg;
}

void write_outputs(const std::string& command, const alap::ExperimentConfig& cfg,
                   const alap::SuiteResult& res) {
  fs::create_directories(cfg.out_dir);
  const fs::path dir(cfg.out_dir);
  std::ofstream csv(dir / (command + ".csv"));
  alap::write_records_csv(csv, res.records);
  for (const auto& [name, field] : res.fields) {
    alap::write_olf((dir / (name + ".olf")).string(), field);
  }
  for (const auto& [name, text] : res.files) {
    std::ofstream(dir / name) << text;
  }
}

int run(const std::string& command, const Flags& flags) {
  const alap::ExperimentConfig cfg = build_config(command, flags);
  alap::SuiteResult res;
  if (command == "verify-inequalities") res = alap::run_inequality_suite(cfg);
  else if (command == "solve") res = alap::run_solve(cfg);
  else if (command == "compare-balls") res = alap::run_comparison_suite(cfg);
  else if (command == "lemma24") res = alap::run_lemma24(cfg);
  else if (command == "theorem11") res = alap::run_theorem11(cfg);
  else res = alap::run_maximal(cfg);
  write_outputs(command, cfg, res);

  int hard_rows = 0;
  for (const auto& r : res.records) hard_rows += r.hard;
  std::cout << command << ": " << res.records.size() << " rows, " << hard_rows
            << " hard checks, " << res.hard_failures << " failed -> "
            << (fs::path(cfg.out_dir) / (command + ".csv")).string() << '\n';
  for (const auto& r : res.records) {
    if (r.hard && !r.pass) {
      std::cout << "  FAIL " << r.lemma_id << ' ' << r.nf_label << " n=" << r.n << ' '
                << r.params << " lhs=" << r.lhs << " rhs=" << r.rhs << '\n';
    }
  }
  return res.ok() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Orlicz N-function calculus, A-Laplace solver and regularity experiments"};
  app.require_subcommand(1);
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"verify-inequalities", "structural inequalities, flux monotonicity and kernel bands"},
      {"solve", "solve div Theta(grad u) = div Theta(F) on a periodic box"},
      {"compare-balls", "A-harmonic replacement comparisons on sampled balls"},
      {"lemma24", "oscillation of A(|grad u|) against forcing and gradient terms"},
      {"theorem11", "higher-integrability ratio study over seeds and resolutions"},
      {"maximal", "maximal-function modular and pointwise sharp estimates"},
  };
  Flags flags;
  std::string chosen;
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", flags.config, "TOML or JSON config file");
    sub->add_option("--out", flags.out, "output directory");
    sub->add_option("--seed", flags.seeds, "random seed (repeatable)");
    sub->add_option("--resolution", flags.resolutions, "cells per axis (repeatable)");
    sub->add_option("--nf", flags.nf, "N-function such as power:2.5 or plog:2,1 (repeatable)")
        ->delimiter('\0');
    sub->callback([&chosen, name = name] { chosen = name; });
  }
  CLI11_PARSE(app, argc, argv);
  try {
    return run(chosen, flags);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
