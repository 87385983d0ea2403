#pragma once

#include <iosfwd>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "rwr/backend.hpp"
#include "rwr/settings.hpp"

namespace rwr::cli {

enum class Subcommand { BuildData, Infer, Evaluate, Synth };

std::string_view to_string(Subcommand cmd);
Subcommand parse_subcommand(std::string_view name);

/// Effective defaults for a subcommand; every key appears in the manifest.
Settings defaults(Subcommand cmd);

/// Backend bound to a pipeline role (extractor, verifier, locator, student,
/// judge). Role-scoped keys win over backend.* keys; mock rules win over a
/// URL at the same scope. Throws InvalidArgument when nothing is configured.
std::unique_ptr<ChatBackend> make_backend(const Settings& settings, std::string_view role);

/// Runs a subcommand from fully merged settings and writes its manifest.
/// Domain failures propagate as rwr::Error.
void execute(Subcommand cmd, const Settings& settings, std::ostream& out);

/// Parses argv, dispatches, and maps failures to exit codes: 0 success,
/// 1 domain error (error JSON on `err`), 2 usage error (help on `err`).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run(int argc, char** argv);

}  // namespace rwr::cli
