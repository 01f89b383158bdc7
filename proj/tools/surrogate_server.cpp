// Line-protocol test integrands: one request line of decimals in, one decimal line out.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace {

double z1(const std::vector<double>& x) { return 0.3 * x[0] + 0.5 * std::tanh(3.0 * x[1]) + 0.05 * x[2] * x[2]; }
double z2(const std::vector<double>& x) { return -5.5 + 0.4 * x[1] + 0.3 * std::sin(x[0]) + 0.2 * x[0] * x[2]; }

int usage() {
  std::fprintf(stderr,
               "usage: surrogate_server MODE\n"
               "  z1 | z2 | z1sq | z2sq   three-dimensional surrogates\n"
               "  echo                    returns x1\n"
               "  crash-once MARKER       exits on the first request unless MARKER exists, then echoes\n"
               "  sleep SECONDS           sleeps before every answer, then echoes\n"
               "  garbage                 answers with a malformed line\n");
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) return usage();
  const std::string mode = argv[1];
  const bool three_d = mode == "z1" || mode == "z2" || mode == "z1sq" || mode == "z2sq";
  if (!three_d && mode != "echo" && mode != "crash-once" && mode != "sleep" && mode != "garbage") return usage();
  if ((mode == "crash-once" || mode == "sleep") && argc < 3) return usage();

  std::string line;
  while (std::getline(std::cin, line)) {
    std::istringstream in(line);
    std::vector<double> x;
    for (double v; in >> v;) x.push_back(v);
    if (x.empty() || (three_d && x.size() != 3)) {
      std::fprintf(stderr, "surrogate_server: bad request '%s'\n", line.c_str());
      return 1;
    }
    double y = x[0];
    if (mode == "z1") y = z1(x);
    if (mode == "z2") y = z2(x);
    if (mode == "z1sq") y = z1(x) * z1(x);
    if (mode == "z2sq") y = z2(x) * z2(x);
    if (mode == "crash-once") {
      if (std::FILE* f = std::fopen(argv[2], "r")) {
        std::fclose(f);
      } else {
        if (std::FILE* g = std::fopen(argv[2], "w")) std::fclose(g);
        std::_Exit(3);
      }
    }
    if (mode == "sleep") std::this_thread::sleep_for(std::chrono::duration<double>(std::atof(argv[2])));
    if (mode == "garbage") {
      std::printf("value=%g\n", y);
    } else {
      std::printf("%.17g\n", y);
    }
    std::fflush(stdout);
  }
  return 0;
}
