#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

#include "CLI11.hpp"

namespace wiw::cli {

struct GlobalOptions {
  std::size_t workers = 1;
  std::uint64_t seed = 1;
  std::string data_dir;
};

/// Registers every subcommand on `app`. Subcommand callbacks throw
/// wiw::DataError / wiw::UsageError; main maps them to exit codes.
void add_commands(CLI::App& app, GlobalOptions& global);

/// Reads JSON config files: top-level keys set global options, an object
/// under a subcommand's name sets that subcommand's options. Underscores in
/// keys are accepted for hyphens.
class JsonConfig : public CLI::Config {
 public:
  std::string to_config(const CLI::App* app, bool default_also, bool write_description,
                        std::string prefix) const override;
  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override;
};

}  // namespace wiw::cli
