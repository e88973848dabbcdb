#pragma once

// Helpers for driving the command-line binary from tests.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace cli {

inline std::string binary_path() { return DEFLECT_CLI_PATH; }

inline std::filesystem::path scratch_dir(const std::string& name) {
    std::filesystem::path dir = std::filesystem::path(DEFLECT_TEST_TMP) / name;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

// Runs the CLI with the given argument string; returns the exit code.
// stdout/stderr go to log_file when provided, otherwise to /dev/null.
inline int run(const std::string& args, const std::string& log_file = "") {
    std::string cmd = binary_path() + " " + args;
    if (log_file.empty())
        cmd += " > /dev/null 2>&1";
    else
        cmd += " > " + log_file + " 2>&1";
    const int status = std::system(cmd.c_str());
    if (status < 0) return -1;
    return WEXITSTATUS(status);
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

}  // namespace cli
