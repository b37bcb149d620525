#pragma once

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

namespace bsid::testing {

struct RunResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

inline std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Runs `args` through the shell with stdout/stderr captured in `scratch`.
inline RunResult run(const std::string& args, const std::string& scratch) {
    const std::string out = scratch + "/.stdout";
    const std::string err = scratch + "/.stderr";
    const int status = std::system((args + " > '" + out + "' 2> '" + err + "'").c_str());
    RunResult r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
}

} // namespace bsid::testing
