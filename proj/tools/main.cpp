#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dforge/errors.hpp"
#include "dforge/pipeline.hpp"

namespace {

void write_artifact(const std::string& path, const std::string& content) {
  std::filesystem::path p(path);
  if (p.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(p.parent_path(), ec);
  }
  std::ofstream f(path);
  if (!f) throw dforge::model_error("cannot write to '" + path + "'");
  f << content;
}

int run(const dforge::PipelineOptions& opt) {
  dforge::PipelineResult res = dforge::run_pipeline(opt);

  // The gauge command's artifact is the gauged model file; the analysis
  // report goes to stdout when the model is routed to --out. Every other
  // command routes its report to --out (or stdout).
  const std::string& primary = opt.command == "gauge" ? res.emitted_model : res.report;
  if (!opt.out.empty()) {
    write_artifact(opt.out, primary);
    if (opt.command == "gauge") std::cout << res.report;
  } else {
    std::cout << primary;
  }

  for (const auto& [name, content] : res.csv_files) write_artifact(name, content);
  return res.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dirac-forge: a symbolic and numerical workbench for constrained dynamics"};
  app.require_subcommand(1);

  dforge::PipelineOptions opt;
  if (const char* env = std::getenv("DIRAC_FORGE_SEED"))
    opt.seed = static_cast<unsigned>(std::strtoul(env, nullptr, 10));

  double step = 0.0, tol = 0.0;
  struct Sub {
    const char* name;
    const char* help;
  };
  const Sub subs[] = {
      {"analyze", "constraint chain, classification, and multiplier report"},
      {"gauge", "gauge the action named by --action and emit the gauged model"},
      {"equiv", "compare the local structure of two models and reconstruct a witness"},
      {"fixgauge", "impose the [gauges] conditions and reduce the phase space"},
      {"simulate", "integrate the [simulation] blocks and export csv orbits"},
  };
  for (const auto& s : subs) {
    CLI::App* sc = app.add_subcommand(s.name, s.help);
    sc->add_option("models", opt.models, "model file(s)")->required()->expected(-1);
    sc->add_option("--gauge", opt.gauge, "select one entry of [gauges]");
    sc->add_option("--action", opt.action, "select one [action] block");
    sc->add_option("--format", opt.format, "report format")
        ->check(CLI::IsMember({"text", "json"}));
    sc->add_option("--out", opt.out, "write the primary artifact to this path");
    sc->add_option("--step", step, "override the integration step");
    sc->add_option("--tol", tol, "override the drift tolerance");
  }

  CLI11_PARSE(app, argc, argv);

  CLI::App* sc = app.get_subcommands().front();
  opt.command = sc->get_name();
  if (sc->count("--step")) opt.step = step;
  if (sc->count("--tol")) opt.tol = tol;

  try {
    return run(opt);
  } catch (const dforge::numerical_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const dforge::analysis_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const dforge::kernel_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const dforge::model_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
