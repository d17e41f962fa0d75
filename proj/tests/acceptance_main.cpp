// Runs every acceptance criterion and prints one PASS/FAIL line each.

#include <cstdlib>
#include <iostream>
#include <string>

#include "qnk/acceptance.hpp"

int main(int argc, char** argv) {
  qnk::AcceptanceOptions opts;
  if (argc > 1) opts.output_dir = argv[1];
  if (const char* s = std::getenv("QNK_SEED")) opts.seed = std::stoull(s);
  const auto report = qnk::run_acceptance(opts);
  for (const auto& r : report.results) std::cout << qnk::format_result_line(r) << '\n';
  std::cout << (report.all_pass() ? "ALL PASS" : "FAILURES") << std::endl;
  return report.all_pass() ? 0 : 1;
}
