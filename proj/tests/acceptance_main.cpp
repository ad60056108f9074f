// Prints one line per acceptance criterion; exits non-zero if any fails.
#include <cstring>
#include <iostream>

#include "viscoid/acceptance.hpp"

int main(int argc, char** argv) {
  viscoid::AcceptanceOptions opt;
  for (int i = 1; i + 1 < argc; i += 2) {
    if (std::strcmp(argv[i], "--filter") == 0) opt.filter = argv[i + 1];
    if (std::strcmp(argv[i], "--threads") == 0) opt.threads = std::atoi(argv[i + 1]);
  }
  bool ok = true;
  viscoid::run_acceptance(opt, [&](const viscoid::CriterionResult& r) {
    std::cout << viscoid::format_line(r) << "    # " << r.detail << "\n" << std::flush;
    ok = ok && r.pass;
  });
  return ok ? 0 : 1;
}
