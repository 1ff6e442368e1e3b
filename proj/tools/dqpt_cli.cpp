// dqpt: command-line front end. Exit codes: 0 ok, 2 bad configuration,
// 3 numerical failure, 4 resource cap.

#include <iostream>
#include <new>
#include <string>
#include <vector>

#include "dqpt/dqpt.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  if (args.empty() || args[0] == "--help" || args[0] == "--version") {
    if (!args.empty() && args[0] == "--version") {
      std::cout << "dqpt " << dqpt::kVersion << "\n";
    } else {
      dqpt::CliOptions opts;
      std::cout << opts.app.help();
    }
    return args.empty() ? dqpt::kExitConfig : dqpt::kExitOk;
  }
  for (const auto& a : args) {
    if (a == "--help") {
      dqpt::CliOptions opts;
      std::cout << opts.app.help();
      return dqpt::kExitOk;
    }
  }
  try {
    const dqpt::RunConfig cfg = dqpt::parse_config(args);
    const auto summary = dqpt::run_command(cfg);
    std::cout << summary.dump(2) << "\n";
    return dqpt::kExitOk;
  } catch (const dqpt::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return dqpt::kExitConfig;
  } catch (const dqpt::ResourceCapError& e) {
    std::cerr << "resource cap: " << e.what() << "\n";
    return dqpt::kExitResource;
  } catch (const dqpt::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return dqpt::kExitNumerical;
  } catch (const std::bad_alloc&) {
    std::cerr << "resource cap: out of memory\n";
    return dqpt::kExitResource;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return dqpt::kExitFailure;
  }
}
