#pragma once

// Helpers for driving the command-line binary from tests. The binary path
// comes from the GCFLOW_BIN environment variable (set by ctest).

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "helpers.hpp"

namespace testing {

inline std::string gcflow_bin() {
    const char* p = std::getenv("GCFLOW_BIN");
    if (!p || !*p)
        throw std::runtime_error("GCFLOW_BIN is not set; run through ctest or export it");
    return p;
}

struct RunResult {
    int status = -1;
    std::string out;
    std::string err;
};

inline std::string read_text(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Runs `gcflow <args>` with stdout/stderr captured to files in `dir`.
inline RunResult run_cli(const std::string& args, const fs::path& dir) {
    static int counter = 0;
    const fs::path out_file = dir / ("stdout-" + std::to_string(counter) + ".txt");
    const fs::path err_file = dir / ("stderr-" + std::to_string(counter) + ".txt");
    ++counter;

    const std::string cmd = "\"" + gcflow_bin() + "\" " + args + " >\"" + out_file.string() +
                            "\" 2>\"" + err_file.string() + "\"";
    const int rc = std::system(cmd.c_str());

    RunResult r;
    if (rc == -1)
        r.status = -1;
    else if (WIFEXITED(rc))
        r.status = WEXITSTATUS(rc);
    else
        r.status = 128;
    r.out = read_text(out_file);
    r.err = read_text(err_file);
    return r;
}

}  // namespace testing
