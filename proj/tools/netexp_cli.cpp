// netexp: simulate congestion-interference experiments and analyse their logs.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "netexp/core/error.hpp"
#include "netexp/io/commands.hpp"
#include "netexp/io/config.hpp"
#include "netexp/io/csv.hpp"

namespace {

using namespace netexp;

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string format = "csv";
};

void add_common(CLI::App* cmd, Common& c, bool needs_out) {
  cmd->add_option("--config", c.config, "Scenario config (JSON)")->required()->check(CLI::ExistingFile);
  cmd->add_option("--seed", c.seed, "Override the config seed");
  auto* out = cmd->add_option("--out", c.out, "Output path (stdout when omitted)");
  if (needs_out) out->required();
  cmd->add_option("--format", c.format, "Output format")->check(CLI::IsMember({"csv"}));
}

// Writes to --out, or stdout when no path was given.
template <typename F>
void emit(const std::string& path, F&& write) {
  if (path.empty()) {
    write(std::cout);
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::io, "cannot write " + path);
  write(out);
  if (!out) fail(ErrorCode::io, "write failed for " + path);
}

std::vector<double> parse_allocations(const std::string& text) {
  std::vector<double> ps;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      ps.push_back(io::parse_number(item));
    } catch (const Error&) {
      fail(ErrorCode::config, "--allocations: cannot parse '" + item + "'");
    }
  }
  return ps;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Congestion-interference experiment simulator and analyser"};
  app.require_subcommand(1);

  Common sim_opts;
  auto* simulate = app.add_subcommand("simulate", "Run a scenario and write its session log");
  add_common(simulate, sim_opts, true);

  Common an_opts;
  std::string log_path, hourly_out;
  auto* analyze = app.add_subcommand("analyze", "Estimate every estimand of a design from a log");
  add_common(analyze, an_opts, false);
  analyze->add_option("--log", log_path, "Session log CSV")->required()->check(CLI::ExistingFile);
  analyze->add_option("--hourly-out", hourly_out, "Per-hour series CSV");

  Common sw_opts;
  std::string allocations, sweep_estimates, sweep_diag;
  auto* sweep = app.add_subcommand("sweep", "Run one A/B test per allocation");
  add_common(sweep, sw_opts, false);
  sweep->add_option("--allocations", allocations, "Comma-separated allocations, e.g. 0.1,0.5,0.9")
      ->required();
  sweep->add_option("--estimates-out", sweep_estimates, "Estimates CSV");
  sweep->add_option("--diagnostics-out", sweep_diag, "SUTVA diagnostic CSV");

  Common rep_opts;
  int replications = 0;
  auto* replicate = app.add_subcommand("replicate", "Monte Carlo summary over seeds seed..seed+R-1");
  add_common(replicate, rep_opts, false);
  replicate->add_option("--replications", replications, "Number of replications R")->required();

  Common cal_opts;
  std::vector<std::string> design_files;
  double alpha = 0.05;
  auto* calibrate = app.add_subcommand("calibrate", "A/A false-positive check of candidate designs");
  add_common(calibrate, cal_opts, false);
  calibrate->add_option("--designs", design_files, "Configs whose design sections are candidates")
      ->required()
      ->check(CLI::ExistingFile);
  calibrate->add_option("--alpha", alpha, "Test level")->check(CLI::Range(0.0, 1.0));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : exit_status(ErrorCode::config);
  }

  try {
    if (*simulate) {
      const auto config = io::load_config(sim_opts.config);
      const auto seed = sim_opts.seed.value_or(config.seed);
      const auto out = io::cmd_simulate(config, seed, sim_opts.out);
      io::print_summary(std::cout, out);
    } else if (*analyze) {
      const auto config = io::load_config(an_opts.config);
      const auto seed = an_opts.seed.value_or(config.seed);
      const auto log = io::load_session_log(log_path);
      const auto report = io::cmd_analyze(log, config, seed);
      emit(an_opts.out, [&](std::ostream& os) {
        io::write_estimates(os, report.estimates, report.provenance.line());
      });
      if (!hourly_out.empty()) {
        emit(hourly_out, [&](std::ostream& os) {
          io::write_hourly_series(os, report.hourly, report.provenance);
        });
      }
      for (const auto& n : report.notes) std::cerr << "note: " << n << '\n';
    } else if (*sweep) {
      const auto config = io::load_config(sw_opts.config);
      const auto seed = sw_opts.seed.value_or(config.seed);
      const auto report = io::cmd_sweep(config, parse_allocations(allocations), seed);
      emit(sw_opts.out, [&](std::ostream& os) { io::write_sweep_table(os, report); });
      if (!sweep_estimates.empty()) {
        emit(sweep_estimates, [&](std::ostream& os) {
          io::write_estimates(os, report.estimates, report.provenance.line());
        });
      }
      if (!sweep_diag.empty()) {
        emit(sweep_diag, [&](std::ostream& os) { io::write_diagnostics(os, report); });
      }
    } else if (*replicate) {
      const auto config = io::load_config(rep_opts.config);
      const auto seed = rep_opts.seed.value_or(config.seed);
      const auto report = io::cmd_replicate(config, replications, seed);
      emit(rep_opts.out, [&](std::ostream& os) { io::write_replicate(os, report); });
    } else if (*calibrate) {
      const auto config = io::load_config(cal_opts.config);
      const auto seed = cal_opts.seed.value_or(config.seed);
      std::vector<io::CalibrationCandidate> candidates;
      for (const auto& path : design_files) {
        const auto c = io::load_config(path);
        candidates.push_back({c.name.empty() ? path : c.name, c.design});
      }
      const auto report = io::cmd_calibrate(config, candidates, seed, alpha);
      emit(cal_opts.out, [&](std::ostream& os) { io::write_calibration(os, report); });
      for (const auto& v : report.verdicts) {
        std::cerr << v.design << ": " << (v.flagged ? "FALSE POSITIVE" : "ok") << " ("
                  << v.raw_false_positives << " raw rejections)\n";
        for (const auto& w : v.warnings) std::cerr << "  warning: " << w << '\n';
      }
    }
  } catch (const Error& e) {
    std::cerr << "error[" << to_string(e.code()) << "]: " << e.what() << '\n';
    return exit_status(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error[internal]: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
