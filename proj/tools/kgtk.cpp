#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "kgtk/cli.hpp"

namespace {

// Peak resident set in kB from the kernel's own accounting; used by the
// performance harness (enabled via KGTK_PRINT_MAXRSS=1).
void print_peak_rss() {
    std::ifstream status("/proc/self/status");
    std::string line;
    while (std::getline(status, line)) {
        if (line.rfind("VmHWM:", 0) != 0) continue;
        long kb = 0;
        std::sscanf(line.c_str(), "VmHWM: %ld", &kb);
        std::fprintf(stderr, "maxrss_kb=%ld\n", kb);
        return;
    }
}

}  // namespace

int main(int argc, char** argv) {
    std::ios::sync_with_stdio(false);
    static char out_buffer[1 << 20];
    std::setvbuf(stdout, out_buffer, _IOFBF, sizeof out_buffer);

    std::vector<std::string> args(argv + 1, argv + argc);
    kgtk::CliStreams io{&std::cin, &std::cout, &std::cerr};
    int code = kgtk::run_cli(args, io);

    std::cout.flush();
    std::fflush(stdout);
    const char* want_rss = std::getenv("KGTK_PRINT_MAXRSS");
    if (want_rss && *want_rss && std::strcmp(want_rss, "0") != 0) print_peak_rss();
    return code;
}
