#include "dmcanc/cli.hpp"

#include <CLI11.hpp>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <future>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>

#include "dmcanc/archive.hpp"
#include "dmcanc/csv.hpp"
#include "dmcanc/errors.hpp"
#include "dmcanc/scenario.hpp"
#include "dmcanc/simulation.hpp"

namespace dmcanc {
namespace {

namespace fs = std::filesystem;

fs::path default_out_dir() {
  if (const char* env = std::getenv("DMCANC_OUT_DIR")) return fs::path(env);
  return fs::path(".");
}

std::string sanitize(const std::string& s) {
  std::string out = s;
  for (char& c : out)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_') c = '_';
  return out;
}

int cmd_run(const std::string& scenario_path, const std::string& out_dir,
            const std::vector<std::string>& overrides) {
  const Scenario scenario = load_scenario(scenario_path, overrides);
  const fs::path dir = out_dir.empty() ? default_out_dir() : fs::path(out_dir);
  fs::create_directories(dir);

  // One scene and one compensation set shared by the whole campaign, so the
  // per-entry curves are comparable.
  const SimConfig& base = scenario.entries.front().config;
  const AcousticScene scene = resolve_scene(base);
  std::optional<CompensationSet> comp;
  for (const auto& entry : scenario.entries) {
    if (needs_compensation(entry.config)) {
      comp.emplace(resolve_compensation(base, scene));
      break;
    }
  }

  // Entries are independent jobs over the shared immutable scene; their
  // output files never collide, so they can run in parallel.
  std::vector<std::future<std::string>> jobs;
  for (const auto& entry : scenario.entries) {
    jobs.push_back(std::async(std::launch::async, [&scenario, &entry, &scene, &comp, &dir] {
      RunLog log = run_scenario(entry.config, scene, comp ? &*comp : nullptr);
      log.resolved_config_json = resolved_config_json(scenario, entry);
      log.config_hash = config_hash(log.resolved_config_json);

      const std::string stem = sanitize(scenario.name) + "_" + sanitize(entry.label);
      write_run_log_csv(dir / (stem + "_log.csv"), log, scenario.outputs.log_decimate);
      write_event_csv(dir / (stem + "_events.csv"), log);
      write_weights_csv(dir / (stem + "_weights.csv"), log);
      if (scenario.outputs.spectrum) write_spectrum_csv(dir / (stem + "_spectrum.csv"), log);

      double final_anse = std::numeric_limits<double>::quiet_NaN();
      for (std::size_t i = log.anse_db.size(); i-- > 0;) {
        if (std::isfinite(log.anse_db[i])) {
          final_anse = log.anse_db[i];
          break;
        }
      }
      std::ostringstream line;
      line << stem << ": samples=" << log.n_samples << " events=" << log.comm_event_count
           << " final_anse_db=" << format_double(final_anse)
           << (log.ended_early ? " (ended early: noise exhausted)" : "");
      return line.str();
    }));
  }
  for (auto& job : jobs) std::cout << job.get() << "\n";
  return 0;
}

int cmd_make_scene(const SimConfig& cfg, bool factorable, const std::string& out,
                   const std::string& generators_out) {
  AcousticScene scene = [&] {
    if (factorable) {
      FactorableScene f = factorable_scene(cfg.scene.synthesis, cfg.K, cfg.fs, cfg.L_c);
      if (!generators_out.empty()) save_compensation(f.generators, generators_out);
      return f.scene;
    }
    return synthesize_scene(cfg.scene.synthesis, cfg.K, cfg.fs);
  }();
  save_scene(scene, out);

  std::cout << "scene: K=" << scene.node_count() << " L_s=" << scene.secondary_length()
            << " fs=" << format_double(scene.fs()) << "\n";
  std::cout << "sensor,self_norm,cross_energy\n";
  for (int m = 0; m < scene.node_count(); ++m) {
    double cross = 0.0;
    for (int k = 0; k < scene.node_count(); ++k)
      if (k != m) cross += scene.secondary(m, k).taps().squaredNorm();
    std::cout << m << ',' << format_double(scene.secondary(m, m).norm()) << ','
              << format_double(cross) << "\n";
  }
  return 0;
}

int cmd_train_compensation(const std::string& scene_path, Eigen::Index L_c,
                           const std::string& out) {
  const AcousticScene scene = load_scene(scene_path);
  const CompensationSet set = estimate_compensation(scene, L_c);
  save_compensation(set, out);
  std::cout << "m,k,residual\n";
  for (int m = 0; m < set.node_count(); ++m)
    for (int k = 0; k < set.node_count(); ++k)
      if (m != k) std::cout << m << ',' << k << ',' << format_double(set.residual(m, k)) << "\n";
  return 0;
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
  CLI::App app{"dmcanc: deterministic distributed multichannel ANC simulator"};
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "run a scenario file (optionally a whole campaign)");
  std::string scenario_path, out_dir;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::optional<double> duration;
  run->add_option("scenario", scenario_path, "scenario JSON document")->required();
  run->add_option("--out-dir", out_dir, "output directory (default $DMCANC_OUT_DIR or .)");
  run->add_option("--override", overrides, "dotted-path override, e.g. noise.seed=9");
  run->add_option("--seed", seed, "shorthand for --override noise.seed=N");
  run->add_option("--duration", duration, "shorthand for --override duration_s=S");

  // make-scene
  auto* mk = app.add_subcommand("make-scene", "synthesize and save an acoustic scene");
  SimConfig mk_cfg;
  std::string mk_out, mk_kind = "synthesize", mk_generators;
  mk->add_option("--out", mk_out, "scene archive path")->required();
  mk->add_option("--kind", mk_kind, "synthesize | factorable");
  mk->add_option("--K", mk_cfg.K, "node count")->required();
  mk->add_option("--fs", mk_cfg.fs, "sampling frequency");
  mk->add_option("--length", mk_cfg.scene.synthesis.length, "path length L_s");
  mk->add_option("--delay-min", mk_cfg.scene.synthesis.delay_min, "minimum path delay");
  mk->add_option("--delay-max", mk_cfg.scene.synthesis.delay_max, "maximum path delay");
  mk->add_option("--tau", mk_cfg.scene.synthesis.tau, "decay constant in samples");
  mk->add_option("--rho", mk_cfg.scene.synthesis.cross_attenuation, "cross attenuation (0,1]");
  mk->add_option("--seed", mk_cfg.scene.synthesis.seed, "generator seed");
  mk->add_option("--L-c", mk_cfg.L_c, "generator length (factorable scenes)");
  mk->add_option("--save-generators", mk_generators,
                 "also save the generating compensation filters (factorable)");

  // train-compensation
  auto* tr = app.add_subcommand("train-compensation",
                                "least-squares fit of the compensation filters from a scene");
  std::string tr_scene, tr_out;
  Eigen::Index tr_lc = 33;
  tr->add_option("scene", tr_scene, "scene archive")->required();
  tr->add_option("--L-c", tr_lc, "compensation filter length");
  tr->add_option("--out", tr_out, "compensation archive path")->required();

  try {
    app.parse(argc, argv);
    if (*run) {
      if (seed) overrides.push_back("noise.seed=" + std::to_string(*seed));
      if (duration) overrides.push_back("duration_s=" + format_double(*duration));
      return cmd_run(scenario_path, out_dir, overrides);
    }
    if (*mk) {
      if (mk_kind != "synthesize" && mk_kind != "factorable")
        throw ConfigError("--kind must be synthesize or factorable");
      return cmd_make_scene(mk_cfg, mk_kind == "factorable", mk_out, mk_generators);
    }
    if (*tr) return cmd_train_compensation(tr_scene, tr_lc, tr_out);
    return 2;
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;  // bad flags are configuration errors
  } catch (const NumericError& e) {
    std::cerr << "numerical abort: " << e.what() << "\n";
    return 3;
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const IoError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const ProtocolError& e) {
    std::cerr << "protocol error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace dmcanc
