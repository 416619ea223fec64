#include <iostream>

#include "CLI11.hpp"
#include "memkernel/commands.hpp"
#include "memkernel/errors.hpp"

int main(int argc, char** argv) {
  using namespace memkernel;
  CLI::App app{"memkernel: memory kernel wave problems, direct and inverse"};
  app.require_subcommand(1);

  std::string config_path, out_dir, sign, field_format = "long";
  bool force = false, twin = false;
  const char* names[] = {"direct", "synth", "invert", "check", "energy"};
  const char* help[] = {"solve the direct problem for data.k_true",
                        "generate the measurement f from data.k_true",
                        "reconstruct the kernel from f (or from data.k_true with --twin)",
                        "run the compatibility checks on the data",
                        "energy track of the homogeneous Dirichlet problem"};
  for (int i = 0; i < 5; ++i) {
    CLI::App* sub = app.add_subcommand(names[i], help[i]);
    sub->add_option("--config", config_path, "config file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "output directory (overrides output.dir)");
    if (std::string(names[i]) == "direct" || std::string(names[i]) == "invert")
      sub->add_option("--field-format", field_format, "layout of u.csv / v.csv")
          ->check(CLI::IsMember({"long", "matrix"}));
    if (std::string(names[i]) == "invert") {
      sub->add_flag("--force", force, "continue past a failed compatibility check");
      sub->add_flag("--twin", twin, "synthesize f from data.k_true and reconstruct it");
      sub->add_option("--sign-variant", sign, "sign in the kernel equation")
          ->check(CLI::IsMember({"eq35", "eq41"}));
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  CommandFlags flags;
  if (!out_dir.empty()) flags.out = out_dir;
  flags.force = force;
  flags.twin = twin;
  flags.field_format = field_format == "matrix" ? FieldFormat::Matrix : FieldFormat::Long;
  if (!sign.empty()) flags.sign = sign == "eq35" ? SignVariant::Eq35 : SignVariant::Eq41;

  RunConfig cfg;
  try {
    cfg = load_config(config_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e);
  }
  return run_command(app.get_subcommands().front()->get_name(), cfg, flags, std::cout, std::cerr);
}
