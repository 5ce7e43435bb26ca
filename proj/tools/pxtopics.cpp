#include <iostream>

#include <CLI11.hpp>

#include "pxt/pipeline.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Patient feedback topic pipeline"};
  app.set_version_flag("--version", std::string(PXT_VERSION));
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  std::string format;
  std::size_t k = 0;
  std::string backend;

  app.add_option("--config", config_path, "Pipeline config file")->required()->check(CLI::ExistingFile);
  auto* out_opt = app.add_option("--out", out_dir, "Output directory (overrides [output] dir)");
  auto* seed_opt = app.add_option("--seed", seed, "Seed for sampling (overrides [output] seed)");
  auto* format_opt = app.add_option("--format", format, "Report format")->check(CLI::IsMember({"json", "csv", "text"}));
  auto* k_opt = app.add_option("--k", k, "Number of shot examples (overrides [classify] k_shots)");
  auto* backend_opt = app.add_option("--backend", backend, "Classifier backend")->check(CLI::IsMember({"remote", "rules"}));

  app.add_subcommand("redact", "Redact PHI from the comment corpus and write a review report");
  app.add_subcommand("classify", "Classify redacted comments into topics");
  app.add_subcommand("evaluate", "Score predictions against the gold annotations");
  app.add_subcommand("agreement", "Per-comment Cohen's kappa between annotators");
  app.add_subcommand("associate", "Associate predicted topics with survey variables");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? pxt::kExitOk : pxt::kExitInvalid;
  }

  pxt::Overrides overrides;
  if (*out_opt) overrides.out = out_dir;
  if (*seed_opt) overrides.seed = seed;
  if (*format_opt) overrides.format = pxt::parse_output_format(format);
  if (*k_opt) overrides.k_shots = k;
  if (*backend_opt) overrides.backend = backend == "remote" ? pxt::BackendKind::RemoteLlm : pxt::BackendKind::RuleBased;

  pxt::PipelineConfig config;
  try {
    config = pxt::validate_config(config_path, overrides);
  } catch (const pxt::ConfigError& e) {
    std::cerr << e.what() << "\n";
    return pxt::kExitInvalid;
  }
  return pxt::run_subcommand(app.get_subcommands().front()->get_name(), config, std::cerr);
}
