#include <exception>
#include <iostream>
#include <memory>

#include "commands.hpp"
#include "wiw/common.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Author name disambiguation toolkit: SND clustering, RND assignment, IND outlier scoring."};
  app.name("wiw");
  app.require_subcommand(1);
  app.fallthrough();
  app.config_formatter(std::make_shared<wiw::cli::JsonConfig>());
  app.set_config("--config", "", "JSON config file; command-line flags take precedence");

  wiw::cli::GlobalOptions global;
  wiw::cli::add_commands(app, global);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const wiw::UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 1;
  } catch (const wiw::DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
