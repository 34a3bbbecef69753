#include <cstdint>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "glperiod/harness/commands.hpp"

namespace h = glperiod::harness;

int main(int argc, char** argv) {
  CLI::App app{"Time-periodic solver and stability harness for the forced cubic Ginzburg-Landau equation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", h::kVersion);

  std::string config;
  std::string out, base, axis;
  std::uint64_t seed = 0;

  auto* solve = app.add_subcommand("solve-periodic", "Compute the T-periodic solution and write its manifest");
  solve->add_option("--config", config, "YAML run config")->required();
  solve->add_option("--out", out, "Output directory (default: output_dir from the config)");

  auto* stab = app.add_subcommand("stability", "Integrate a perturbation about the periodic solution");
  stab->add_option("--config", config, "YAML run config")->required();
  stab->add_option("--base", base, "manifest.json of a converged solve-periodic run");
  stab->add_option("--out", out, "Output directory (default: <output_dir>/stability)");

  auto* verify = app.add_subcommand("verify", "Run the inequality batteries");
  verify->add_option("--config", config, "YAML run config")->required();
  auto* seed_opt = verify->add_option("--seed", seed, "Root seed (default: seed from the config)");
  verify->add_option("--out", out, "Output directory (default: <output_dir>/verify)");

  auto* sweep = app.add_subcommand("sweep", "Independent solves along one parameter axis");
  sweep->add_option("--config", config, "YAML run config")->required();
  sweep->add_option("--axis", axis, "Swept parameter")->required()->check(CLI::IsMember({"epsilon", "m_t", "n"}));
  sweep->add_option("--out", out, "Output directory (default: <output_dir>/sweep_<axis>)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : h::kExitConfig;
  }

  const std::optional<std::filesystem::path> out_dir =
      out.empty() ? std::nullopt : std::optional<std::filesystem::path>(out);
  return h::guarded(
      [&] {
        const h::RunConfig cfg = h::load_config(config);
        if (*solve) return h::cmd_solve_periodic(cfg, out_dir, std::cout);
        if (*stab) {
          const std::optional<std::filesystem::path> base_path =
              base.empty() ? std::nullopt : std::optional<std::filesystem::path>(base);
          return h::cmd_stability(cfg, base_path, out_dir, std::cout);
        }
        if (*verify) {
          const std::optional<std::uint64_t> s = seed_opt->count() ? std::optional(seed) : std::nullopt;
          return h::cmd_verify(cfg, s, out_dir, std::cout);
        }
        return h::cmd_sweep(cfg, axis, out_dir, std::cout);
      },
      std::cerr);
}
