#ifndef FABKIT_SUBPROCESS_HPP
#define FABKIT_SUBPROCESS_HPP

#include <string>
#include <vector>

namespace fabkit::detail {

struct ProcessResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

// Run argv[0] with the given arguments, capturing stdout and stderr
// separately. Never touches a tty; stdin is /dev/null.
ProcessResult run_process(const std::vector<std::string>& argv,
                          const std::string& workdir = {});

// Convenience: run a command line through /bin/sh -c.
ProcessResult run_shell(const std::string& command, const std::string& workdir = {});

} // namespace fabkit::detail

#endif
