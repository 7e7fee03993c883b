// Command-line front end. Talks to the library only through the C interface.

#include <cstdio>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "softskills/softskills.h"

namespace {

int exit_code(ss_status s) {
  switch (s) {
    case SS_OK: return 0;
    case SS_ERR_IO: return 2;
    default: return 1;
  }
}

int report(ss_status s, const std::string& what) {
  if (s != SS_OK) std::fprintf(stderr, "softskills %s: %s: %s\n", what.c_str(), ss_status_string(s), ss_last_error_message());
  return exit_code(s);
}

std::string flag_name(std::string key) {
  for (auto& c : key) {
    if (c == '_') c = '-';
  }
  return "--" + key;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Soft-skill lexicon building, detection and salary/gender analysis"};
  app.set_version_flag("--version", std::string(ss_version()));
  app.require_subcommand(1);

  std::optional<std::string> config_path;
  std::vector<std::string> sets;
  std::map<std::string, std::optional<std::string>> overrides;
  app.add_option("-c,--config", config_path, "JSON config file");
  app.add_option("--set", sets, "Override a config key: key=value (repeatable)");
  for (std::size_t i = 0; i < ss_config_key_count(); ++i) {
    const std::string key = ss_config_key_name(i);
    app.add_option(flag_name(key), overrides[key], "Config key '" + key + "'")->group("Config overrides");
  }

  auto* build = app.add_subcommand("build-lexicon", "Clean, filter and cluster crowd-collected skill phrases");
  auto* snippets = app.add_subcommand("snippets", "Sample annotation snippets for the cleaned phrases");
  auto* detect = app.add_subcommand("detect", "Detect skill clusters in every ad of the corpus");
  auto* analyze = app.add_subcommand("analyze", "Salary rewards, salary bands, female-share regression, stereotypes");
  auto* render = app.add_subcommand("render", "Pretty-print a report file");
  std::string render_path;
  render->add_option("report", render_path, "Report file (TSV, CSV or JSON)")->required();
  for (auto* sub : {build, snippets, detect, analyze}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  if (*render) {
    char* text = nullptr;
    const auto s = ss_render_report(render_path.c_str(), &text);
    if (s != SS_OK) return report(s, "render");
    std::fputs(text, stdout);
    ss_string_free(text);
    return 0;
  }

  ss_config* config = nullptr;
  if (auto s = ss_config_create(&config); s != SS_OK) return report(s, "config");
  struct Guard {
    ss_config* c;
    ~Guard() { ss_config_destroy(c); }
  } guard{config};

  // Precedence: flag > file > default.
  if (config_path) {
    if (auto s = ss_config_load(config, config_path->c_str()); s != SS_OK) return report(s, "config");
  }
  for (const auto& kv : sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      std::fprintf(stderr, "softskills: --set expects key=value, got '%s'\n", kv.c_str());
      return 1;
    }
    const auto key = kv.substr(0, eq), value = kv.substr(eq + 1);
    if (auto s = ss_config_set(config, key.c_str(), value.c_str()); s != SS_OK) return report(s, "config");
  }
  for (const auto& [key, value] : overrides) {
    if (!value) continue;
    if (auto s = ss_config_set(config, key.c_str(), value->c_str()); s != SS_OK) return report(s, "config");
  }

  if (*build) return report(ss_run_build_lexicon(config), "build-lexicon");
  if (*snippets) return report(ss_run_snippets(config), "snippets");
  if (*detect) return report(ss_run_detect(config), "detect");
  if (*analyze) return report(ss_run_analyze(config), "analyze");
  return 1;
}
