#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>

#include "qnd/config.hpp"

namespace qndcli {

struct Invocation {
    std::string command;
    qnd::RunConfig config;
    std::filesystem::path out_dir = "out";
    bool svg = false;
    std::map<std::string, std::string> args;  // subcommand flags, recorded in the manifest
};

// Runs one subcommand, writes CSV/SVG/manifest into out_dir and prints a
// short summary. Throws qnd::Error on physics failures.
void run(const Invocation& inv, std::ostream& log);

}  // namespace qndcli
