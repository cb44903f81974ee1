#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "config.hpp"
#include "runner.hpp"

namespace {

enum ExitCode { ok = 0, usage = 1, resolution = 2, domain = 3, io = 4 };

toa::Execution execution_from_env() {
  const char* env = std::getenv("TOA_THREADS");
  if (!env || !*env) return {};
  try {
    const long v = std::stol(env);
    return {v > 0 ? static_cast<unsigned>(v) : 0u};
  } catch (const std::exception&) {
    throw toa::cli::UsageError(std::string("TOA_THREADS must be a nonnegative integer, got '") + env + "'");
  }
}

}  // namespace

int main(int argc, char** argv) {
  using namespace toa::cli;
  const std::vector<std::string> args(argv + 1, argv + argc);
  try {
    std::optional<std::string> text;
    if (const auto path = find_config_path(args)) text = detail::read_text_file(*path);
    const auto config = parse_config(args, text);
    const auto record = run(config, execution_from_env());
    write_outputs(record, std::cout, std::cerr);
    std::cerr << "toa_cli " << record.version << ": " << to_string(config.command) << " done in "
              << record.wall_seconds << " s\n";
    return ok;
  } catch (const HelpRequested& h) {
    std::cout << h.what();
    return ok;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return usage;
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return io;
  } catch (const toa::ResolutionError& e) {
    std::cerr << "resolution error: " << e.what() << "\n";
    return resolution;
  } catch (const toa::DomainError& e) {
    std::cerr << "domain error: " << e.what() << "\n";
    return domain;
  } catch (const toa::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return domain;
  }
}
